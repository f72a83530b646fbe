"""Node alignment between a generated and a ground-truth flat graph.

A composite per-pair score combines four features -- text, degree, ancestor
and neighbor similarity -- and matching runs in two greedy rounds: round 1
leans on text to place confident anchors, round 2 shifts weight onto the
structural terms so paraphrased nodes can still be recalled.  Pairs accepted
in round 1 are never revoked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import FlatGraph, NodeStats, node_stats
from .similarity import SimilarityProvider, text_similarity

__all__ = [
    "SimWeights",
    "RoundConfig",
    "MatchConfig",
    "MatchedPair",
    "MatchResult",
    "degree_similarity",
    "ancestor_similarity",
    "neighbor_similarity",
    "composite_score",
    "match_two_rounds",
]

ANCESTOR_DECAY = 0.5


@dataclass
class SimWeights:
    """Feature weights; normalized to sum to 1 at construction."""

    w_text: float = 0.7
    w_degree: float = 0.1
    w_ancestor: float = 0.2
    w_neighbor: float = 0.0

    def __post_init__(self):
        vals = (self.w_text, self.w_degree, self.w_ancestor, self.w_neighbor)
        if any(v < 0 for v in vals):
            raise ValueError("similarity weights must be non-negative")
        total = sum(vals)
        if total <= 0:
            raise ValueError("at least one similarity weight must be positive")
        self.w_text, self.w_degree, self.w_ancestor, self.w_neighbor = (
            v / total for v in vals
        )


@dataclass
class RoundConfig:
    weights: SimWeights
    threshold: float = 0.5


def default_rounds() -> list[RoundConfig]:
    return [
        RoundConfig(weights=SimWeights(0.7, 0.1, 0.2, 0.0), threshold=0.75),
        RoundConfig(weights=SimWeights(0.3, 0.1, 0.3, 0.3), threshold=0.5),
    ]


@dataclass
class MatchConfig:
    rounds: list[RoundConfig] = field(default_factory=default_rounds)


@dataclass
class MatchedPair:
    gen_id: str
    gt_id: str
    score: float
    round: int
    text_score: float


@dataclass
class MatchResult:
    pairs: list[MatchedPair] = field(default_factory=list)
    unmatched_gen: list[str] = field(default_factory=list)
    unmatched_gt: list[str] = field(default_factory=list)

    def gen_to_gt(self) -> dict[str, str]:
        return {p.gen_id: p.gt_id for p in self.pairs}

    def gt_to_gen(self) -> dict[str, str]:
        return {p.gt_id: p.gen_id for p in self.pairs}

    def to_json(self) -> dict:
        return {
            "pairs": [
                {
                    "gen_id": p.gen_id,
                    "gt_id": p.gt_id,
                    "score": p.score,
                    "round": p.round,
                    "text_score": p.text_score,
                }
                for p in self.pairs
            ],
            "unmatched_gen": list(self.unmatched_gen),
            "unmatched_gt": list(self.unmatched_gt),
        }


def degree_similarity(sg: NodeStats, sgt: NodeStats) -> float:
    """exp(-(|out_g - out_gt| + |in_g - in_gt|))."""
    return math.exp(
        -(
            abs(sg.out_degree - sgt.out_degree)
            + abs(sg.in_degree - sgt.in_degree)
        )
    )


def ancestor_similarity(
    a_chain: list[str],
    b_chain: list[str],
    provider: SimilarityProvider,
    decay: float = ANCESTOR_DECAY,
) -> float:
    """Decayed sum of text similarities along the parent-first ancestor
    chains, normalized over the shorter chain.

    Two roots (both chains empty) compare as 1.0; a root against a nested
    node compares as 0.0.
    """
    if not a_chain and not b_chain:
        return 1.0
    depth = min(len(a_chain), len(b_chain))
    if depth == 0:
        return 0.0
    total = sum(decay**k * text_similarity(a_chain[k], b_chain[k], provider) for k in range(depth))
    norm = sum(decay**k for k in range(depth))
    return total / norm


def neighbor_similarity(
    gen_id: str,
    gt_id: str,
    gen_to_gt: dict[str, str],
    gen_stats: dict[str, NodeStats],
    gt_stats: dict[str, NodeStats],
) -> float:
    """Fraction of the gen node's neighbors whose established match is a
    neighbor of the gt node."""
    gen_neighbors = gen_stats[gen_id].neighbors
    gt_neighbors = gt_stats[gt_id].neighbors
    consistent = sum(
        1
        for n in gen_neighbors
        if n in gen_to_gt and gen_to_gt[n] in gt_neighbors
    )
    return consistent / max(1, len(gen_neighbors))


def composite_score(
    text: float, degree: float, ancestor: float, neighbor: float, weights: SimWeights
) -> float:
    return (
        weights.w_text * text
        + weights.w_degree * degree
        + weights.w_ancestor * ancestor
        + weights.w_neighbor * neighbor
    )


def match_two_rounds(
    f_gen: FlatGraph,
    f_gt: FlatGraph,
    provider: SimilarityProvider,
    config: MatchConfig | None = None,
) -> MatchResult:
    """Greedy iterative matching over the configured rounds (two by default).

    Each round scores every remaining cross pair once (the neighbor term
    sees the matches established in earlier rounds), then accepts pairs in
    descending score order, ties broken by (gt_id, gen_id), while the score
    stays at or above the round threshold.  The mapping is injective and the
    whole procedure is deterministic.
    """
    config = config or MatchConfig()
    gen_stats = node_stats(f_gen)
    gt_stats = node_stats(f_gt)
    gen_names = {n.id: n.name for n in f_gen.nodes}
    gt_names = {n.id: n.name for n in f_gt.nodes}

    text_cache: dict[tuple[str, str], float] = {}

    def text_sim(gid: str, tid: str) -> float:
        key = (gid, tid)
        if key not in text_cache:
            text_cache[key] = text_similarity(gen_names[gid], gt_names[tid], provider)
        return text_cache[key]

    def chain_names(stats: dict[str, NodeStats], names: dict[str, str], nid: str) -> list[str]:
        return [names[a] for a in stats[nid].ancestor_chain]

    pairs: list[MatchedPair] = []
    matched_gen: set[str] = set()
    matched_gt: set[str] = set()

    for round_no, round_cfg in enumerate(config.rounds, start=1):
        gen_to_gt = {p.gen_id: p.gt_id for p in pairs}
        candidates: list[tuple[float, str, str, float]] = []
        for gen_node in f_gen.nodes:
            if gen_node.id in matched_gen:
                continue
            for gt_node in f_gt.nodes:
                if gt_node.id in matched_gt:
                    continue
                t = text_sim(gen_node.id, gt_node.id)
                d = degree_similarity(gen_stats[gen_node.id], gt_stats[gt_node.id])
                a = ancestor_similarity(
                    chain_names(gen_stats, gen_names, gen_node.id),
                    chain_names(gt_stats, gt_names, gt_node.id),
                    provider,
                )
                n = neighbor_similarity(
                    gen_node.id, gt_node.id, gen_to_gt, gen_stats, gt_stats
                )
                score = composite_score(t, d, a, n, round_cfg.weights)
                if score >= round_cfg.threshold:
                    candidates.append((score, gt_node.id, gen_node.id, t))

        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        for score, gt_id, gen_id, t in candidates:
            if gen_id in matched_gen or gt_id in matched_gt:
                continue
            matched_gen.add(gen_id)
            matched_gt.add(gt_id)
            pairs.append(
                MatchedPair(
                    gen_id=gen_id, gt_id=gt_id, score=score, round=round_no, text_score=t
                )
            )

    return MatchResult(
        pairs=pairs,
        unmatched_gen=[n.id for n in f_gen.nodes if n.id not in matched_gen],
        unmatched_gt=[n.id for n in f_gt.nodes if n.id not in matched_gt],
    )
