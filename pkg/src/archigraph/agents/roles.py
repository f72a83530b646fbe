"""Agent roles, handles, and prompt bundles.

Prompt text lives in external assets under ``prompts/`` (one system and one
user file per bundle) so prompt edits never require code changes.  User
templates use ``${slot}`` placeholders; rendering fails when a slot is left
unfilled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from string import Template

GENERATION_TEMPERATURE = 0.7
EVALUATION_TEMPERATURE = 0.0


class AgentRole(str, Enum):
    ANALYST = "analyst"
    ARCHITECT = "architect"
    DESIGNER = "designer"
    GRAPH_EXTRACT = "graph_extract"
    ICON_EXAMINE = "icon_examine"
    LAYOUT_EXAMINE = "layout_examine"
    SYSTEM_UNDERSTAND = "system_understand"
    TEXT_LEGIBILITY = "text_legibility"
    IMAGE_FILTER = "image_filter"

    @property
    def is_generation(self) -> bool:
        return self in (AgentRole.ANALYST, AgentRole.ARCHITECT, AgentRole.DESIGNER)

    @property
    def default_temperature(self) -> float:
        return GENERATION_TEMPERATURE if self.is_generation else EVALUATION_TEMPERATURE


class PromptRenderError(KeyError):
    """A template slot was left unfilled."""


@dataclass
class PromptBundle:
    system_text: str
    user_template: str

    def render(self, inputs: dict[str, str]) -> list[dict]:
        """Render to chat messages; every ``${slot}`` must be provided."""
        try:
            user = Template(self.user_template).substitute(inputs)
        except KeyError as exc:
            raise PromptRenderError(f"missing prompt slot {exc.args[0]!r}") from exc
        return [
            {"role": "system", "content": self.system_text},
            {"role": "user", "content": user},
        ]


def load_bundle(name: str) -> PromptBundle:
    """Load the named bundle from the packaged prompt assets."""
    base = resources.files("archigraph.agents") / "prompts"
    system = (base / f"{name}.system.txt").read_text(encoding="utf-8")
    user = (base / f"{name}.user.txt").read_text(encoding="utf-8")
    return PromptBundle(system_text=system, user_template=user)


@dataclass
class AgentHandle:
    """Configured access to one agent role.

    ``transport`` is any object with a ``send(request: dict) -> str`` method
    and a ``kind`` attribute ("live" or "mock"); mock transports never touch
    the network.
    """

    role: AgentRole
    transport: object
    model: str = "default"
    endpoint: str = ""
    temperature: float | None = None
    max_retries: int = 3
    retry_delay: float = 0.25
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.temperature is None:
            self.temperature = self.role.default_temperature
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
