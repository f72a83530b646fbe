"""Run configuration: similarity provider, match rounds, penalties, agent
endpoints, and concurrency caps.

Every report embeds ``config_hash()`` so results stay attributable to the
exact configuration that produced them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .matching import MatchConfig, RoundConfig, SimWeights
from .util import canonical_json

DEFAULT_OVERALL_WEIGHTS = (0.3, 0.3, 0.4)


@dataclass
class ProviderConfig:
    kind: str = "token-cosine"  # or "embedding"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = ""


@dataclass
class RoundSettings:
    w_text: float
    w_degree: float
    w_ancestor: float
    w_neighbor: float
    threshold: float


@dataclass
class AgentSettings:
    endpoint: str = ""
    model: str = "default"
    api_key_env: str = "ARCHIGRAPH_API_KEY"
    temperature_generation: float = 0.7
    temperature_evaluation: float = 0.0
    max_retries: int = 3
    retry_delay: float = 0.25


@dataclass
class RunConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    rounds: list[RoundSettings] = field(
        default_factory=lambda: [
            RoundSettings(0.7, 0.1, 0.2, 0.0, 0.75),
            RoundSettings(0.3, 0.1, 0.3, 0.3, 0.5),
        ]
    )
    layout_defect_penalty: float = 0.1
    legibility_penalty: float = 0.1
    overall_weights: tuple[float, float, float] = DEFAULT_OVERALL_WEIGHTS
    semantic_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    visual_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    agents: AgentSettings = field(default_factory=AgentSettings)
    filter_threshold: float = 0.75
    char_budget: int = 60_000
    draft_concurrency: int = 4
    sample_concurrency: int = 4
    units_per_inch: float = 96.0

    def __post_init__(self):
        if abs(sum(self.overall_weights) - 1.0) > 1e-9:
            raise ValueError("overall weights must sum to 1")

    def match_config(self) -> MatchConfig:
        return MatchConfig(
            rounds=[
                RoundConfig(
                    weights=SimWeights(r.w_text, r.w_degree, r.w_ancestor, r.w_neighbor),
                    threshold=r.threshold,
                )
                for r in self.rounds
            ]
        )

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["overall_weights"] = list(self.overall_weights)
        doc["semantic_weights"] = list(self.semantic_weights)
        doc["visual_weights"] = list(self.visual_weights)
        return doc

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_json()).encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        cfg = cls()
        if "provider" in doc:
            cfg.provider = ProviderConfig(**doc["provider"])
        if "rounds" in doc:
            cfg.rounds = [RoundSettings(**r) for r in doc["rounds"]]
        if "agents" in doc:
            cfg.agents = AgentSettings(**doc["agents"])
        for key in (
            "layout_defect_penalty",
            "legibility_penalty",
            "filter_threshold",
            "char_budget",
            "draft_concurrency",
            "sample_concurrency",
            "units_per_inch",
        ):
            if key in doc:
                setattr(cfg, key, doc[key])
        for key in ("overall_weights", "semantic_weights", "visual_weights"):
            if key in doc:
                setattr(cfg, key, tuple(doc[key]))
        if abs(sum(cfg.overall_weights) - 1.0) > 1e-9:
            raise ValueError("overall weights must sum to 1")
        return cfg
