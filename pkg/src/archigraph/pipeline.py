"""Generation pipeline: paper summary, top-level topology, parallel module
drafting, context-aware sequential refinement, and regularization.

Per-module draft failures degrade gracefully (the module stays empty and is
flagged); a failure in the summary or top-design step aborts the run with
whatever artifacts exist already saved.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .agents import (
    AgentHandle,
    AgentRole,
    AgentUnavailableError,
    SchemaViolationError,
    make_reroute_agent,
    run_agent,
)
from .graph import HierGraph, HierNode, NodeKind, canonical_serialize, parse_hier, validate
from .regularize import RegularizationReport, prune_violations, semantic_filter
from .util import write_text_atomic

logger = logging.getLogger("archigraph.pipeline")

DEFAULT_CHAR_BUDGET = 60_000
DEFAULT_DRAFT_CONCURRENCY = 4

__all__ = [
    "PaperSummary",
    "PipelineArtifacts",
    "extract_summary",
    "design_top",
    "draft_modules",
    "refine_sequential",
    "dedup_ids",
    "generate",
    "truncate_section_aware",
]


@dataclass
class PaperSummary:
    system_name: str = ""
    task_goal: str = ""
    modules_and_responsibilities: str = ""
    data_flow: str = ""
    core_algorithms: str = ""
    constraints: str = ""

    @classmethod
    def from_payload(cls, payload: dict) -> "PaperSummary":
        return cls(
            system_name=payload.get("system_name", ""),
            task_goal=payload["task_goal"],
            modules_and_responsibilities=payload["modules_and_responsibilities"],
            data_flow=payload["data_flow"],
            core_algorithms=payload["core_algorithms"],
            constraints=payload["constraints"],
        )

    def to_json(self) -> dict:
        return {
            "system_name": self.system_name,
            "task_goal": self.task_goal,
            "modules_and_responsibilities": self.modules_and_responsibilities,
            "data_flow": self.data_flow,
            "core_algorithms": self.core_algorithms,
            "constraints": self.constraints,
        }

    def as_design_brief(self) -> str:
        return (
            f"System Name: {self.system_name}\n"
            f"Task & Goal: {self.task_goal}\n"
            f"Modules & Responsibilities: {self.modules_and_responsibilities}\n"
            f"Data Flow: {self.data_flow}\n"
            f"Core Algorithms: {self.core_algorithms}\n"
            f"Constraints: {self.constraints}"
        )


@dataclass
class PipelineArtifacts:
    summary: PaperSummary | None = None
    top_graph: HierGraph | None = None
    drafts: dict[str, HierGraph] = field(default_factory=dict)
    refined: HierGraph | None = None
    regularized: HierGraph | None = None
    reports: dict = field(default_factory=dict)
    status: str = "ok"
    error: str = ""


# ---------------------------------------------------------------------------
# Step 1: paper summary
# ---------------------------------------------------------------------------

_HEADING_RE = re.compile(
    r"^\s{0,3}(?:#{1,6}\s+|\d+(?:\.\d+)*[.)]?\s+|\\(?:sub)*section\*?\{)?"
    r"\s*([A-Za-z][A-Za-z /&-]{1,60})\}?\s*$"
)

_SECTION_PRIORITIES = (
    (("abstract",), 0),
    (
        (
            "method",
            "methods",
            "methodology",
            "approach",
            "architecture",
            "system",
            "model",
            "design",
            "implementation",
            "pipeline",
        ),
        1,
    ),
    (("introduction", "overview", "background"), 2),
    (("references", "bibliography", "appendix", "acknowledgments"), 9),
)


def _section_priority(title: str) -> int:
    first = title.lower().split()[0] if title.split() else ""
    for words, priority in _SECTION_PRIORITIES:
        if first in words:
            return priority
    return 3


def truncate_section_aware(text: str, budget: int) -> str:
    """Trim oversized paper text to ``budget`` characters, keeping the
    abstract and method-like sections first and preserving document order."""
    if len(text) <= budget:
        return text

    sections: list[tuple[int, str]] = []  # (priority, chunk)
    current: list[str] = []
    current_priority = 2  # preamble rides with the introduction tier
    for line in text.splitlines(keepends=True):
        match = _HEADING_RE.match(line.rstrip("\n"))
        if match and len(line) < 90:
            if current:
                sections.append((current_priority, "".join(current)))
            current = [line]
            current_priority = _section_priority(match.group(1))
        else:
            current.append(line)
    if current:
        sections.append((current_priority, "".join(current)))

    order = sorted(range(len(sections)), key=lambda i: (sections[i][0], i))
    remaining = budget
    keep: dict[int, str] = {}
    for idx in order:
        if remaining <= 0:
            break
        chunk = sections[idx][1]
        take = chunk[:remaining]
        keep[idx] = take
        remaining -= len(take)
    return "".join(keep[i] for i in sorted(keep))


def extract_summary(
    paper_text: str, handle: AgentHandle, char_budget: int = DEFAULT_CHAR_BUDGET
) -> PaperSummary:
    """Step 1: compress the paper into the five-dimension structured summary."""
    if not paper_text.strip():
        raise ValueError("paper text is empty")
    trimmed = truncate_section_aware(paper_text, char_budget)
    payload = run_agent(AgentRole.ANALYST, {"paper_content": trimmed}, handle)
    return PaperSummary.from_payload(payload)


# ---------------------------------------------------------------------------
# Step 2: top-level topology
# ---------------------------------------------------------------------------


def _validate_top_payload(payload: dict) -> None:
    graph = parse_hier(json.dumps(payload), allow_dangling=True)
    for child in graph.root.children:
        if child.kind is not NodeKind.MODULE:
            raise SchemaViolationError(
                f"level-1 node {child.id!r} has type {child.kind.value!r}; "
                "the top design may contain module nodes only"
            )
        if child.children:
            raise SchemaViolationError(
                f"module {child.id!r} must stay empty in the top-level design"
            )


def design_top(
    summary: PaperSummary, handle: AgentHandle
) -> tuple[HierGraph, list[str]]:
    """Step 2: root plus first-level module nodes and their edges only.

    Returns the graph and a list of warnings (DEGENERATE_TOPOLOGY when the
    root has no modules at all).
    """
    payload = run_agent(
        AgentRole.ARCHITECT,
        {"user_input": summary.as_design_brief()},
        handle,
        extra_validator=_validate_top_payload,
    )
    graph = parse_hier(json.dumps(payload), allow_dangling=True)
    graph, _ = prune_violations(graph)
    warnings = []
    if not graph.root.children:
        warnings.append("DEGENERATE_TOPOLOGY: top design has no modules")
    return graph, warnings


# ---------------------------------------------------------------------------
# Step 3: parallel per-module drafting
# ---------------------------------------------------------------------------


def _draft_one(
    module: HierNode,
    summary: PaperSummary,
    top_json: str,
    handle: AgentHandle,
    other_modules: str = "",
    revision_requirements: str = "",
) -> HierGraph:
    payload = run_agent(
        AgentRole.DESIGNER,
        {
            "module_id": module.id,
            "user_input": summary.as_design_brief(),
            "top_design": top_json,
            "other_modules": other_modules or "(none)",
            "revision_requirements": revision_requirements or "(none)",
        },
        handle,
    )
    fragment = parse_hier(json.dumps(payload), allow_dangling=True)
    if fragment.root.id != module.id:
        raise SchemaViolationError(
            f"fragment root id {fragment.root.id!r} does not match module {module.id!r}"
        )
    return fragment


def draft_modules(
    top: HierGraph,
    summary: PaperSummary,
    handle: AgentHandle,
    concurrency: int = DEFAULT_DRAFT_CONCURRENCY,
) -> tuple[dict[str, HierGraph], dict[str, str]]:
    """Step 3: one designer call per module, fanned out concurrently.

    Results merge in module-id order so output never depends on completion
    order.  A failed module is flagged and left empty.
    """
    modules = list(top.root.children)
    top_json = canonical_serialize(top)
    fragments: dict[str, HierGraph] = {}
    flags: dict[str, str] = {}

    def work(module: HierNode):
        return _draft_one(module, summary, top_json, handle)

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        futures = {module.id: pool.submit(work, module) for module in modules}

    for module in sorted(modules, key=lambda m: m.id):
        try:
            fragments[module.id] = futures[module.id].result()
        except (AgentUnavailableError, SchemaViolationError) as exc:
            flags[module.id] = f"DRAFT_FAILED: {exc}"
            logger.warning("module %s draft failed: %s", module.id, exc)
    return fragments, flags


def merge_fragments(top: HierGraph, fragments: dict[str, HierGraph]) -> HierGraph:
    """Swap each drafted module subtree into the top graph."""
    merged = top.copy()
    by_id = {m.id: i for i, m in enumerate(merged.root.children)}
    for module_id in sorted(fragments):
        if module_id in by_id:
            merged.root.children[by_id[module_id]] = fragments[module_id].root
    return merged


# ---------------------------------------------------------------------------
# Step 4: sequential refinement and mechanical id repair
# ---------------------------------------------------------------------------


def refine_sequential(
    top: HierGraph,
    fragments: dict[str, HierGraph],
    summary: PaperSummary,
    handle: AgentHandle,
) -> tuple[HierGraph, dict[str, str], dict[str, str]]:
    """Step 4: revisit each module in ascending id order against the full
    current graph; failures keep the existing draft.  Duplicate ids are
    repaired mechanically afterwards regardless of agent behavior."""
    graph = merge_fragments(top, fragments)
    flags: dict[str, str] = {}
    top_json = canonical_serialize(top)

    for module_id in sorted(m.id for m in graph.root.children):
        module = next(m for m in graph.root.children if m.id == module_id)
        try:
            fragment = _draft_one(
                module,
                summary,
                top_json,
                handle,
                other_modules=canonical_serialize(graph),
                revision_requirements=(
                    "Review the module against the full graph; keep ids unique "
                    "and align interface names with sibling modules."
                ),
            )
        except (AgentUnavailableError, SchemaViolationError) as exc:
            flags[module_id] = f"REFINE_FAILED: {exc}"
            continue
        index = next(
            i for i, m in enumerate(graph.root.children) if m.id == module_id
        )
        graph.root.children[index] = fragment.root

    graph, renames = dedup_ids(graph)
    return graph, flags, renames


def dedup_ids(g: HierGraph) -> tuple[HierGraph, dict[str, str]]:
    """Suffix duplicate node/edge ids ``_2``, ``_3``, ... in document order.

    The first occurrence keeps its id.  Edge endpoints declared on the
    renamed node's parent or on the node itself are rewritten, so every
    reference still resolves afterwards.
    """
    out = g.copy()
    taken: set[str] = set()
    edge_taken: set[str] = set()
    renames: dict[str, str] = {}

    def fresh(base: str, pool: set[str]) -> str:
        k = 2
        while f"{base}_{k}" in pool:
            k += 1
        return f"{base}_{k}"

    def walk(node: HierNode, parent: HierNode | None):
        if node.id in taken:
            old_id = node.id
            node.id = fresh(old_id, taken)
            renames[old_id] = node.id
            # Sibling edges resolve against the parent's direct children, so
            # rewrite them only when no sibling retains the old id.
            if parent is not None and not any(c.id == old_id for c in parent.children):
                for edge in parent.edges:
                    if edge.source == old_id:
                        edge.source = node.id
                    if edge.target == old_id:
                        edge.target = node.id
        taken.add(node.id)
        for edge in node.edges:
            if edge.id in edge_taken:
                edge.id = fresh(edge.id, edge_taken)
            edge_taken.add(edge.id)
        for child in node.children:
            walk(child, node)

    walk(out.root, None)
    return out, renames


# ---------------------------------------------------------------------------
# Step 5 + orchestration
# ---------------------------------------------------------------------------


def generate(
    paper_text: str,
    handles: dict[AgentRole, AgentHandle],
    artifacts_dir: str | Path,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    draft_concurrency: int = DEFAULT_DRAFT_CONCURRENCY,
) -> PipelineArtifacts:
    """Run Steps 1-5 and persist every intermediate artifact.

    Unrecoverable failures in Steps 1-2 abort the run (status "aborted");
    everything produced up to that point is already on disk.
    """
    out_dir = Path(artifacts_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = PipelineArtifacts()
    warnings: list[str] = []

    def save_report():
        report = {
            "status": artifacts.status,
            "error": artifacts.error,
            "warnings": warnings,
            "flags": artifacts.reports.get("flags", {}),
            "renames": artifacts.reports.get("renames", {}),
            "regularization": artifacts.reports.get("regularization"),
            "validation": artifacts.reports.get("validation"),
        }
        write_text_atomic(
            out_dir / "report.json",
            json.dumps(report, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        )

    # Step 1
    try:
        artifacts.summary = extract_summary(
            paper_text, handles[AgentRole.ANALYST], char_budget
        )
    except Exception as exc:
        artifacts.status, artifacts.error = "aborted", f"summary: {exc}"
        save_report()
        return artifacts
    write_text_atomic(
        out_dir / "01_summary.json",
        json.dumps(artifacts.summary.to_json(), indent=2, ensure_ascii=False) + "\n",
    )

    # Step 2
    try:
        top, top_warnings = design_top(artifacts.summary, handles[AgentRole.ARCHITECT])
        warnings.extend(top_warnings)
        artifacts.top_graph = top
    except Exception as exc:
        artifacts.status, artifacts.error = "aborted", f"top design: {exc}"
        save_report()
        return artifacts
    write_text_atomic(out_dir / "02_top.graph.json", canonical_serialize(top))

    # Step 3
    designer = handles[AgentRole.DESIGNER]
    fragments, flags = draft_modules(top, artifacts.summary, designer, draft_concurrency)
    artifacts.drafts = fragments
    drafts_dir = out_dir / "03_drafts"
    drafts_dir.mkdir(exist_ok=True)
    for module_id in sorted(fragments):
        write_text_atomic(
            drafts_dir / f"{module_id}.graph.json", canonical_serialize(fragments[module_id])
        )

    # Step 4
    refined, refine_flags, renames = refine_sequential(
        top, fragments, artifacts.summary, designer
    )
    flags.update(refine_flags)
    artifacts.refined = refined
    write_text_atomic(out_dir / "04_refined.graph.json", canonical_serialize(refined))

    # Step 5: neuro pass when the designer agent is reachable, symbolic always.
    reroute_agent = make_reroute_agent(designer)
    try:
        final, reg_report = semantic_filter(refined, reroute_agent)
    except AgentUnavailableError as exc:
        warnings.append(f"semantic filter skipped: {exc}")
        final, reg_report = prune_violations(refined)
    except SchemaViolationError as exc:
        warnings.append(f"semantic filter discarded: {exc}")
        final, reg_report = prune_violations(refined)
    artifacts.regularized = final
    write_text_atomic(out_dir / "05_final.graph.json", canonical_serialize(final))

    violations = validate(final)
    artifacts.reports = {
        "flags": flags,
        "renames": renames,
        "regularization": reg_report.to_json(),
        "validation": [v.to_json() for v in violations],
    }
    if flags:
        artifacts.status = "partial"
    save_report()
    return artifacts
