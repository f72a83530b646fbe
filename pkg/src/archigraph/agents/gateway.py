"""Response parsing, per-role output validation, and high-level agent calls.

``run_agent`` never hands unvalidated JSON back to callers: a reply that
fails its role schema triggers exactly one repair re-prompt (with the
validation error appended) before the call fails.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass

from ..graph import GraphParseError, flat_from_payload, parse_hier
from .roles import AgentHandle, AgentRole, load_bundle
from .transport import chat_complete

FILTER_CONFIDENCE_THRESHOLD = 0.75

_FENCE_RE = re.compile(r"```json\s*(.*?)```", re.DOTALL | re.IGNORECASE)

SUMMARY_DIMENSIONS = (
    "task_goal",
    "modules_and_responsibilities",
    "data_flow",
    "core_algorithms",
    "constraints",
)

LAYOUT_ISSUE_TYPES = ("line_crossing", "image_overlap", "text_overflow")
LEGIBILITY_ISSUE_TYPES = ("Blurry", "Incomplete", "Ambiguous")


class NoJsonFoundError(ValueError):
    code = "NO_JSON_FOUND"


class JsonParseError(ValueError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class SchemaViolationError(ValueError):
    code = "SCHEMA_VIOLATION"


def extract_json_payload(raw: str):
    """Pull the JSON value out of a model reply.

    Prefers the first fenced ```json block, then a whole-text parse, then a
    first-brace-to-last-brace salvage.  NO_JSON_FOUND when the text has no
    JSON delimiters at all; PARSE_ERROR (with offset) when nothing parses.
    """
    fenced = _FENCE_RE.search(raw)
    if fenced:
        text = fenced.group(1).strip()
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise JsonParseError(exc.msg, exc.pos) from exc

    stripped = raw.strip()
    if not any(c in stripped for c in "{["):
        raise NoJsonFoundError("reply contains no JSON value")
    try:
        return json.loads(stripped)
    except json.JSONDecodeError as first_exc:
        start = min(
            (i for i in (stripped.find("{"), stripped.find("[")) if i >= 0),
            default=-1,
        )
        end = max(stripped.rfind("}"), stripped.rfind("]"))
        if 0 <= start < end:
            try:
                return json.loads(stripped[start : end + 1])
            except json.JSONDecodeError:
                pass
        raise JsonParseError(first_exc.msg, first_exc.pos) from first_exc


# ---------------------------------------------------------------------------
# Per-role output schemas
# ---------------------------------------------------------------------------


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaViolationError(message)


def _validate_issue_list(payload, key: str, allowed_types) -> None:
    _require(isinstance(payload, dict), "reply must be a JSON object")
    issues = payload.get(key)
    _require(isinstance(issues, list), f"'{key}' must be a list")
    for i, issue in enumerate(issues):
        _require(isinstance(issue, dict), f"'{key}[{i}]' must be an object")
        _require(
            issue.get("type") in allowed_types,
            f"'{key}[{i}].type' must be one of {list(allowed_types)}",
        )
        count = issue.get("count")
        _require(
            isinstance(count, int) and not isinstance(count, bool) and count >= 0,
            f"'{key}[{i}].count' must be a non-negative integer",
        )


def validate_payload(role: AgentRole, payload, context: dict | None = None) -> None:
    """Raise SchemaViolationError unless ``payload`` matches the role schema."""
    context = context or {}
    if role is AgentRole.ANALYST:
        _require(isinstance(payload, dict), "reply must be a JSON object")
        for key in SUMMARY_DIMENSIONS:
            _require(
                isinstance(payload.get(key), str) and payload[key].strip() != "",
                f"summary dimension {key!r} is missing or empty",
            )
        if "system_name" in payload:
            _require(isinstance(payload["system_name"], str), "'system_name' must be a string")
    elif role in (AgentRole.ARCHITECT, AgentRole.DESIGNER):
        _require(isinstance(payload, dict), "reply must be a single graph object")
        try:
            # Fragments may reference sibling-module nodes, so dangling
            # endpoints are tolerated here; Step 5 reroutes or prunes them.
            parse_hier(json.dumps(payload), allow_dangling=True)
        except GraphParseError as exc:
            raise SchemaViolationError(f"graph does not parse: {exc}") from exc
    elif role is AgentRole.GRAPH_EXTRACT:
        _require(isinstance(payload, dict), "reply must be a JSON object")
        _require(isinstance(payload.get("graph"), dict), "'graph' object is required")
        _require(isinstance(payload.get("explain", ""), str), "'explain' must be text")
        try:
            flat_from_payload(payload)
        except GraphParseError as exc:
            raise SchemaViolationError(f"graph does not parse: {exc}") from exc
    elif role is AgentRole.ICON_EXAMINE:
        _require(isinstance(payload, dict), "reply must be an id -> description map")
        allowed = context.get("node_ids")
        for key, value in payload.items():
            _require(isinstance(value, str), f"description for {key!r} must be a string")
            if allowed is not None:
                _require(key in allowed, f"{key!r} is not a node id of the provided graph")
    elif role is AgentRole.LAYOUT_EXAMINE:
        _validate_issue_list(payload, "layout_issues", LAYOUT_ISSUE_TYPES)
    elif role is AgentRole.SYSTEM_UNDERSTAND:
        _require(isinstance(payload, dict), "reply must be a JSON object")
        _require(
            isinstance(payload.get("system_understanding"), str),
            "'system_understanding' string is required",
        )
    elif role is AgentRole.TEXT_LEGIBILITY:
        _validate_issue_list(payload, "text_legibility_issues", LEGIBILITY_ISSUE_TYPES)
    elif role is AgentRole.IMAGE_FILTER:
        _require(isinstance(payload, dict), "reply must be a JSON object")
        conf = payload.get("confidence")
        _require(
            isinstance(conf, (int, float)) and not isinstance(conf, bool) and 0 <= conf <= 1,
            "'confidence' must be a number in [0, 1]",
        )


def defect_counts_from_payload(payload: dict) -> dict[str, int]:
    """Collapse a layout_issues reply to counts keyed by issue type."""
    counts = {t: 0 for t in LAYOUT_ISSUE_TYPES}
    for issue in payload.get("layout_issues", []):
        counts[issue["type"]] += issue["count"]
    return counts


def legibility_counts_from_payload(payload: dict) -> dict[str, int]:
    counts = {t: 0 for t in LEGIBILITY_ISSUE_TYPES}
    for issue in payload.get("text_legibility_issues", []):
        counts[issue["type"]] += issue["count"]
    return counts


# ---------------------------------------------------------------------------
# High-level calls
# ---------------------------------------------------------------------------


def _attach_images(messages: list[dict], images: list[bytes]) -> list[dict]:
    """Convert the user message to content parts carrying base64 images."""
    if not images:
        return messages
    out = [dict(m) for m in messages]
    user = out[-1]
    parts = [{"type": "text", "text": user["content"]}]
    for blob in images:
        b64 = base64.b64encode(blob).decode("ascii")
        parts.append(
            {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{b64}"}}
        )
    user["content"] = parts
    return out


def run_agent(
    role: AgentRole,
    inputs: dict[str, str],
    handle: AgentHandle,
    images: list[bytes] | None = None,
    bundle_name: str | None = None,
    context: dict | None = None,
    extra_validator=None,
):
    """Render the role's prompt, call the model, parse and validate the reply.

    On a schema violation the agent is re-prompted once with the validation
    error appended; a second failure raises SchemaViolationError.  Transport
    errors propagate from chat_complete.
    """
    bundle = load_bundle(bundle_name or role.value)
    messages = _attach_images(bundle.render(inputs), images or [])

    def attempt(msgs):
        raw = chat_complete(handle, msgs)
        payload = extract_json_payload(raw)
        if bundle_name is None:
            # Custom bundles carry their own schema via extra_validator.
            validate_payload(role, payload, context)
        if extra_validator is not None:
            extra_validator(payload)
        return payload

    try:
        return attempt(messages)
    except (SchemaViolationError, NoJsonFoundError, JsonParseError) as exc:
        repair = messages + [
            {
                "role": "user",
                "content": (
                    "Your previous reply failed validation: "
                    f"{exc}. Reply again with JSON that follows the required "
                    "schema exactly, wrapped in ```json fences."
                ),
            }
        ]
        try:
            return attempt(repair)
        except (NoJsonFoundError, JsonParseError) as exc2:
            raise SchemaViolationError(str(exc2)) from exc2


@dataclass
class FilterDecision:
    image_id: str
    confidence: float | None
    kept: bool
    selected: bool
    undetermined: bool = False

    def to_json(self) -> dict:
        return {
            "image_id": self.image_id,
            "confidence": self.confidence,
            "kept": self.kept,
            "selected": self.selected,
            "undetermined": self.undetermined,
        }


def apply_filter_rule(
    confidences: dict[str, float | None],
    threshold: float = FILTER_CONFIDENCE_THRESHOLD,
) -> list[FilterDecision]:
    """Pure keep/select rule: keep strictly above the threshold, select the
    single highest-confidence keeper (ties broken by smallest id)."""
    decisions = []
    for image_id, conf in confidences.items():
        if conf is None:
            decisions.append(FilterDecision(image_id, None, False, False, True))
        else:
            decisions.append(FilterDecision(image_id, conf, conf > threshold, False))
    kept = [d for d in decisions if d.kept]
    if kept:
        best = min(kept, key=lambda d: (-d.confidence, d.image_id))
        best.selected = True
    return decisions


def filter_candidate_images(
    abstract: str,
    images: list[dict],
    handle: AgentHandle,
    threshold: float = FILTER_CONFIDENCE_THRESHOLD,
) -> list[FilterDecision]:
    """Score candidate images and apply the keep/select rule.

    ``images`` entries are ``{"image_id", "caption", "data"}`` with raw
    bytes under ``data``.  Agent failures leave that image undetermined and
    processing continues.
    """
    confidences: dict[str, float | None] = {}
    for image in images:
        try:
            payload = run_agent(
                AgentRole.IMAGE_FILTER,
                {"abstract": abstract, "caption": image.get("caption", "")},
                handle,
                images=[image["data"]],
            )
            confidences[image["image_id"]] = float(payload["confidence"])
        except Exception:
            confidences[image["image_id"]] = None
    return apply_filter_rule(confidences, threshold)


def make_reroute_agent(handle: AgentHandle):
    """Adapter giving the regularizer a graph -> suggestions callable."""
    from ..graph import canonical_serialize

    def agent(graph) -> list[dict]:
        payload = run_agent(
            AgentRole.DESIGNER,
            {"graph": canonical_serialize(graph)},
            handle,
            bundle_name="reroute",
            extra_validator=_validate_reroutes,
        )
        return payload.get("reroute_suggestions", [])

    return agent


def _validate_reroutes(payload) -> None:
    _require(isinstance(payload, dict), "reply must be a JSON object")
    suggestions = payload.get("reroute_suggestions")
    _require(isinstance(suggestions, list), "'reroute_suggestions' must be a list")
    for i, sug in enumerate(suggestions):
        _require(isinstance(sug, dict), f"suggestion[{i}] must be an object")
        for key in ("edge_id", "source", "target"):
            _require(
                isinstance(sug.get(key), str),
                f"suggestion[{i}].{key} must be a string",
            )
