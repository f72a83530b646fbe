"""Topological regularization: edge rehoming, symbolic pruning, and an
optional agent-driven semantic rerouting pass that precedes pruning.

The pipeline order is reroute (neuro) -> rehome -> prune (symbolic); the
symbolic stage always has final authority, so the output of the full pass
validates clean on any input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import HierEdge, HierGraph, validate

__all__ = [
    "RegularizationReport",
    "rehome_edges",
    "prune_violations",
    "semantic_filter",
]


@dataclass
class RegularizationReport:
    rehomed: list[str] = field(default_factory=list)
    deleted: list[dict] = field(default_factory=list)  # {id, code}
    reroute_suggestions: list[dict] = field(default_factory=list)
    discarded_suggestions: list[dict] = field(default_factory=list)

    def deleted_ids(self) -> list[str]:
        return [d["id"] for d in self.deleted]

    def merged_with(self, other: RegularizationReport) -> RegularizationReport:
        return RegularizationReport(
            rehomed=self.rehomed + other.rehomed,
            deleted=self.deleted + other.deleted,
            reroute_suggestions=self.reroute_suggestions + other.reroute_suggestions,
            discarded_suggestions=self.discarded_suggestions + other.discarded_suggestions,
        )

    def to_json(self) -> dict:
        return {
            "rehomed": list(self.rehomed),
            "deleted": [dict(d) for d in self.deleted],
            "reroute_suggestions": [dict(s) for s in self.reroute_suggestions],
            "discarded_suggestions": [dict(s) for s in self.discarded_suggestions],
        }


def rehome_edges(g: HierGraph) -> tuple[HierGraph, RegularizationReport]:
    """Move every edge whose endpoints share a direct parent onto that parent.

    No edges are added or removed; already-conformant graphs come back
    unchanged, so the operation is idempotent.
    """
    out = g.copy()
    report = RegularizationReport()
    parent_of = out.parent_map()
    nodes = out.node_map()

    moves: list[tuple[HierEdge, str, str]] = []  # (edge, declared_on, new_home)
    for node, _, _ in out.iter_nodes():
        for edge in node.edges:
            if edge.source not in nodes or edge.target not in nodes:
                continue
            if edge.source == edge.target:
                continue
            src_parent = parent_of[edge.source]
            tgt_parent = parent_of[edge.target]
            if src_parent is not None and src_parent == tgt_parent and src_parent != node.id:
                moves.append((edge, node.id, src_parent))

    for edge, declared_on, new_home in moves:
        nodes[declared_on].edges.remove(edge)
        nodes[new_home].edges.append(edge)
        report.rehomed.append(edge.id)
    return out, report


def prune_violations(g: HierGraph) -> tuple[HierGraph, RegularizationReport]:
    """Delete every residual protocol-violating edge; nodes are never touched.

    Rehoming runs first internally so repairable edges survive.  Deletion
    order follows document order of the (rehomed) graph.  The result always
    passes validate() with zero violations when the node structure itself is
    sound.
    """
    out, report = rehome_edges(g)
    nodes = out.node_map()
    parent_of = out.parent_map()

    for node, _, _ in out.iter_nodes():
        child_ids = {c.id for c in node.children}
        kept: list[HierEdge] = []
        for edge in node.edges:
            if edge.source not in nodes or edge.target not in nodes:
                report.deleted.append({"id": edge.id, "code": "DANGLING_REF"})
            elif edge.source == edge.target:
                report.deleted.append({"id": edge.id, "code": "SELF_LOOP"})
            elif edge.source in child_ids and edge.target in child_ids:
                kept.append(edge)
            else:
                # Rehoming already rescued misdeclared sibling edges, so
                # anything left crosses levels.
                report.deleted.append({"id": edge.id, "code": "NON_SIBLING_EDGE"})
        node.edges[:] = kept
    return out, report


def semantic_filter(g: HierGraph, agent=None) -> tuple[HierGraph, RegularizationReport]:
    """Agent-proposed edge rerouting followed by symbolic pruning.

    ``agent`` is a callable taking the graph and returning reroute
    suggestions ``[{"edge_id", "source", "target"}, ...]`` (see
    agents.gateway.suggest_reroutes).  Only suggestions whose resulting edge
    is protocol-legal are applied; everything else is discarded and logged.
    The output is always pruned afterwards, so it validates clean even when
    the agent misbehaves or is absent.
    """
    out = g.copy()
    report = RegularizationReport()

    suggestions = []
    if agent is not None:
        suggestions = agent(out) or []

    if suggestions:
        nodes = out.node_map()
        parent_of = out.parent_map()
        edge_index: dict[str, tuple[HierEdge, str]] = {}
        for node, _, _ in out.iter_nodes():
            for edge in node.edges:
                edge_index.setdefault(edge.id, (edge, node.id))

        for sug in suggestions:
            if not isinstance(sug, dict):
                report.discarded_suggestions.append({"reason": "MALFORMED_SUGGESTION"})
                continue
            eid = sug.get("edge_id")
            new_src = sug.get("source")
            new_tgt = sug.get("target")
            entry = edge_index.get(eid) if isinstance(eid, str) else None
            if entry is None or not isinstance(new_src, str) or not isinstance(new_tgt, str):
                report.discarded_suggestions.append(
                    {"edge_id": eid, "reason": "MALFORMED_SUGGESTION"}
                )
                continue
            edge, declared_on = entry
            legal = (
                new_src != new_tgt
                and new_src in nodes
                and new_tgt in nodes
                and parent_of[new_src] is not None
                and parent_of[new_src] == parent_of[new_tgt]
            )
            if not legal:
                report.discarded_suggestions.append(
                    {"edge_id": eid, "reason": "ILLEGAL_REROUTE"}
                )
                continue
            new_home = parent_of[new_src]
            nodes[declared_on].edges.remove(edge)
            edge.source, edge.target = new_src, new_tgt
            nodes[new_home].edges.append(edge)
            edge_index[eid] = (edge, new_home)
            report.reroute_suggestions.append(
                {"edge_id": eid, "source": new_src, "target": new_tgt}
            )

    pruned, prune_report = prune_violations(out)
    final_report = report.merged_with(prune_report)
    assert not validate(pruned) or _only_node_level(validate(pruned)), (
        "pruning must remove every edge-level violation"
    )
    return pruned, final_report


def _only_node_level(violations) -> bool:
    edge_codes = {"NON_SIBLING_EDGE", "MISDECLARED_EDGE", "SELF_LOOP", "DANGLING_REF"}
    return all(v.code not in edge_codes for v in violations)
