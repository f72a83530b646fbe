"""Core graph models: nested hierarchy, flat form, parsing, validation, stats.

Two representations coexist:

* ``HierGraph`` -- the nested three-level form (module / tool / component)
  used by the generation pipeline, with per-parent edge lists.
* ``FlatGraph`` -- an id-indexed node list with child-id lists and a global
  edge list, used on the evaluation side.

All values are immutable by convention after construction; every operation
here is a pure function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum


class NodeKind(str, Enum):
    MODULE = "module"
    TOOL = "tool"
    COMPONENT_TEXT = "component-text"
    COMPONENT_ICON = "component-icon"
    COMPONENT_IMAGE = "component-image"

    @property
    def is_component(self) -> bool:
        return self.value.startswith("component-")


COMPONENT_KINDS = frozenset(
    {NodeKind.COMPONENT_TEXT, NodeKind.COMPONENT_ICON, NodeKind.COMPONENT_IMAGE}
)

# "data" appears in the wild as a synonym for the tool/data entity level;
# it normalizes to tool and the provenance is kept on the node.
KIND_ALIASES = {"data": NodeKind.TOOL}

NODE_FIELDS = ("type", "id", "name", "children", "edges")
EDGE_FIELDS = ("sources", "targets", "id", "name")


@dataclass
class GraphIssue:
    """A single problem found while parsing or validating a graph."""

    code: str
    path: str
    message: str

    def to_json(self) -> dict:
        return {"code": self.code, "path": self.path, "message": self.message}


class GraphParseError(ValueError):
    """Raised when a graph document cannot be parsed; carries all issues."""

    def __init__(self, issues: list[GraphIssue]):
        self.issues = issues
        lines = "; ".join(f"{i.code} at {i.path}: {i.message}" for i in issues)
        super().__init__(lines or "invalid graph document")


class MultipleRootsError(ValueError):
    """Flat graph has zero or more than one root node."""

    code = "MULTIPLE_ROOTS"


@dataclass
class HierEdge:
    """Directed sibling edge declared on a parent node.

    The wire format uses single-element ``sources``/``targets`` lists; in
    memory the endpoints are plain ids.
    """

    id: str
    name: str
    source: str
    target: str
    # Set by flat_to_hier when the imported edge is not protocol-legal;
    # informational only, never serialized.
    violating: bool = field(default=False, compare=False)


@dataclass
class HierNode:
    kind: NodeKind
    id: str
    name: str
    children: list[HierNode] = field(default_factory=list)
    payload: str | None = None
    edges: list[HierEdge] = field(default_factory=list)
    # Provenance of the "data" kind alias; ignored by equality.
    from_data_alias: bool = field(default=False, compare=False)

    @property
    def is_component(self) -> bool:
        return self.kind in COMPONENT_KINDS


@dataclass
class HierGraph:
    root: HierNode

    def iter_nodes(self):
        """Yield (node, parent, json_path) in document (pre-order) order."""

        def walk(node: HierNode, parent: HierNode | None, path: str):
            yield node, parent, path
            for i, child in enumerate(node.children):
                yield from walk(child, node, f"{path}.children[{i}]")

        yield from walk(self.root, None, "$")

    def node_map(self) -> dict[str, HierNode]:
        return {n.id: n for n, _, _ in self.iter_nodes()}

    def parent_map(self) -> dict[str, str | None]:
        return {n.id: (p.id if p else None) for n, p, _ in self.iter_nodes()}

    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    def edge_count(self) -> int:
        return sum(len(n.edges) for n, _, _ in self.iter_nodes())

    def copy(self) -> HierGraph:
        def clone(node: HierNode) -> HierNode:
            return replace(
                node,
                children=[clone(c) for c in node.children],
                edges=[replace(e) for e in node.edges],
            )

        return HierGraph(root=clone(self.root))


@dataclass
class FlatNode:
    id: str
    name: str
    children: list[str] = field(default_factory=list)


@dataclass
class FlatEdge:
    id: str
    source: str
    target: str
    name: str = ""


@dataclass
class FlatGraph:
    nodes: list[FlatNode] = field(default_factory=list)
    edges: list[FlatEdge] = field(default_factory=list)
    explain: str = ""

    def node_map(self) -> dict[str, FlatNode]:
        return {n.id: n for n in self.nodes}

    def parent_map(self) -> dict[str, str | None]:
        parents: dict[str, str | None] = {n.id: None for n in self.nodes}
        for node in self.nodes:
            for child in node.children:
                parents[child] = node.id
        return parents

    def roots(self) -> list[str]:
        parents = self.parent_map()
        return [n.id for n in self.nodes if parents[n.id] is None]

    def depth(self) -> int:
        """Number of nesting levels; a single node counts as depth 1."""
        if not self.nodes:
            return 0
        parents = self.parent_map()
        best = 1
        for node in self.nodes:
            d, cur = 1, parents[node.id]
            while cur is not None:
                d += 1
                cur = parents[cur]
            best = max(best, d)
        return best


@dataclass
class NodeStats:
    out_degree: int
    in_degree: int
    ancestor_chain: list[str]
    neighbors: set[str]


# ---------------------------------------------------------------------------
# Parsing (nested form)
# ---------------------------------------------------------------------------


def parse_hier(text: str, allow_dangling: bool = False) -> HierGraph:
    """Parse a nested graph JSON document into a HierGraph.

    Collects every issue (duplicate ids, unknown kinds, bad edge arity,
    dangling endpoints, unknown fields, ...) and raises a single
    GraphParseError listing them with JSON paths.  Edges that merely sit on
    the wrong parent or cross levels parse fine; those are validation
    violations, not parse errors.

    ``allow_dangling`` accepts edges whose endpoints are not declared in
    this document; pipeline fragments legitimately reference nodes that
    live elsewhere in the full graph (the regularizer deals with them).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(
            [GraphIssue("PARSE_ERROR", "$", f"not valid JSON: {exc}")]
        ) from exc
    if not isinstance(doc, dict):
        raise GraphParseError(
            [GraphIssue("NOT_OBJECT", "$", "document must be a single JSON object")]
        )

    issues: list[GraphIssue] = []
    seen_ids: dict[str, str] = {}
    all_edges: list[tuple[HierEdge, str]] = []

    def bad(code: str, path: str, message: str) -> None:
        issues.append(GraphIssue(code, path, message))

    def parse_edge(raw: object, path: str) -> HierEdge | None:
        if not isinstance(raw, dict):
            bad("BAD_EDGE", path, "edge must be an object")
            return None
        for key in raw:
            if key not in EDGE_FIELDS:
                bad("UNKNOWN_FIELD", f"{path}.{key}", f"unknown edge field {key!r}")
        for key in EDGE_FIELDS:
            if key not in raw:
                bad("MISSING_FIELD", f"{path}.{key}", f"edge missing {key!r}")
        sources = raw.get("sources")
        targets = raw.get("targets")
        for label, val in (("sources", sources), ("targets", targets)):
            if not isinstance(val, list) or len(val) != 1 or not isinstance(val[0], str):
                bad(
                    "EDGE_ARITY",
                    f"{path}.{label}",
                    f"{label} must be a single-element list of ids",
                )
                return None
        if not isinstance(raw.get("id"), str) or not isinstance(raw.get("name"), str):
            return None
        return HierEdge(
            id=raw["id"], name=raw["name"], source=sources[0], target=targets[0]
        )

    def parse_node(raw: object, path: str) -> HierNode | None:
        if not isinstance(raw, dict):
            bad("NOT_OBJECT", path, "node must be a JSON object")
            return None
        for key in raw:
            if key not in NODE_FIELDS:
                bad("UNKNOWN_FIELD", f"{path}.{key}", f"unknown node field {key!r}")
        for key in ("type", "id", "name"):
            if not isinstance(raw.get(key), str):
                bad("MISSING_FIELD", f"{path}.{key}", f"node requires string {key!r}")
                return None

        raw_kind = raw["type"]
        from_alias = False
        if raw_kind in KIND_ALIASES:
            kind = KIND_ALIASES[raw_kind]
            from_alias = True
        else:
            try:
                kind = NodeKind(raw_kind)
            except ValueError:
                bad("UNKNOWN_KIND", f"{path}.type", f"unknown node type {raw_kind!r}")
                return None

        node_id = raw["id"]
        if node_id in seen_ids:
            bad(
                "DUP_ID",
                f"{path}.id",
                f"id {node_id!r} already used at {seen_ids[node_id]}",
            )
        else:
            seen_ids[node_id] = f"{path}.id"

        node = HierNode(
            kind=kind, id=node_id, name=raw["name"], from_data_alias=from_alias
        )

        raw_children = raw.get("children", "" if kind.is_component else [])
        if kind.is_component:
            if isinstance(raw_children, str):
                node.payload = raw_children
            else:
                bad(
                    "COMPONENT_WITH_CHILD_LIST",
                    f"{path}.children",
                    "component children must be a single payload string",
                )
                return None
        else:
            if isinstance(raw_children, list):
                for i, child_raw in enumerate(raw_children):
                    child = parse_node(child_raw, f"{path}.children[{i}]")
                    if child is not None:
                        node.children.append(child)
            else:
                bad(
                    "BAD_CHILDREN",
                    f"{path}.children",
                    "module/tool children must be a list of nodes",
                )
                return None

        raw_edges = raw.get("edges", [])
        if not isinstance(raw_edges, list):
            bad("BAD_EDGES", f"{path}.edges", "edges must be a list")
        else:
            for j, edge_raw in enumerate(raw_edges):
                edge = parse_edge(edge_raw, f"{path}.edges[{j}]")
                if edge is not None:
                    node.edges.append(edge)
                    all_edges.append((edge, f"{path}.edges[{j}]"))
        return node

    root = parse_node(doc, "$")
    if root is not None and root.kind is not NodeKind.MODULE:
        bad("ROOT_KIND", "$.type", "root node must have type 'module'")

    if not allow_dangling:
        for edge, path in all_edges:
            for endpoint in (edge.source, edge.target):
                if endpoint not in seen_ids:
                    bad(
                        "DANGLING_REF",
                        path,
                        f"edge {edge.id!r} references unknown node {endpoint!r}",
                    )

    if issues:
        raise GraphParseError(issues)
    assert root is not None
    return HierGraph(root=root)


def canonical_serialize(g: HierGraph) -> str:
    """Serialize to the canonical byte form.

    Keys follow the schema order (type, id, name, children, edges),
    children keep input order, indentation is 2 spaces, newlines are LF,
    and the output ends with a single trailing newline.  Component nodes
    omit an empty edges list; containers always carry both keys.
    """

    def edge_doc(e: HierEdge) -> dict:
        return {"sources": [e.source], "targets": [e.target], "id": e.id, "name": e.name}

    def node_doc(n: HierNode) -> dict:
        doc: dict = {"type": n.kind.value, "id": n.id, "name": n.name}
        if n.is_component:
            doc["children"] = n.payload if n.payload is not None else ""
            if n.edges:
                doc["edges"] = [edge_doc(e) for e in n.edges]
        else:
            doc["children"] = [node_doc(c) for c in n.children]
            doc["edges"] = [edge_doc(e) for e in n.edges]
        return doc

    return json.dumps(node_doc(g.root), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Validation (nested form)
# ---------------------------------------------------------------------------


def validate(g: HierGraph) -> list[GraphIssue]:
    """Check the topological protocol; violations are data, not failures.

    Codes: DUP_ID, NON_SIBLING_EDGE, MISDECLARED_EDGE, DANGLING_REF,
    LEAF_WITH_CHILDREN, SELF_LOOP.  An edge whose endpoints do share a
    parent but that is declared on a different node is MISDECLARED_EDGE
    (repairable by rehoming); anything else cross-level is NON_SIBLING_EDGE.
    """
    violations: list[GraphIssue] = []
    seen: dict[str, str] = {}
    parent_of: dict[str, str | None] = {}
    nodes: dict[str, HierNode] = {}

    for node, parent, path in g.iter_nodes():
        if node.id in seen:
            violations.append(
                GraphIssue(
                    "DUP_ID",
                    f"{path}.id",
                    f"id {node.id!r} already used at {seen[node.id]}",
                )
            )
        else:
            seen[node.id] = f"{path}.id"
            parent_of[node.id] = parent.id if parent else None
            nodes[node.id] = node
        if node.is_component and node.children:
            violations.append(
                GraphIssue(
                    "LEAF_WITH_CHILDREN",
                    f"{path}.children",
                    f"component {node.id!r} must not have child nodes",
                )
            )

    for node, _, path in g.iter_nodes():
        child_ids = {c.id for c in node.children}
        for j, edge in enumerate(node.edges):
            epath = f"{path}.edges[{j}]"
            missing = [ep for ep in (edge.source, edge.target) if ep not in seen]
            if missing:
                violations.append(
                    GraphIssue(
                        "DANGLING_REF",
                        epath,
                        f"edge {edge.id!r} references unknown node(s) {missing}",
                    )
                )
                continue
            if edge.source == edge.target:
                violations.append(
                    GraphIssue(
                        "SELF_LOOP", epath, f"edge {edge.id!r} connects a node to itself"
                    )
                )
                continue
            if edge.source in child_ids and edge.target in child_ids:
                continue
            src_parent = parent_of[edge.source]
            tgt_parent = parent_of[edge.target]
            if src_parent is not None and src_parent == tgt_parent:
                violations.append(
                    GraphIssue(
                        "MISDECLARED_EDGE",
                        epath,
                        f"edge {edge.id!r} endpoints are children of "
                        f"{src_parent!r}, not of {node.id!r}",
                    )
                )
            else:
                violations.append(
                    GraphIssue(
                        "NON_SIBLING_EDGE",
                        epath,
                        f"edge {edge.id!r} connects nodes that are not siblings",
                    )
                )
    return violations


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------


def hier_to_flat(g: HierGraph) -> FlatGraph:
    """Flatten a nested graph; node and edge counts are preserved exactly.

    Component payload text is folded into the flat name as ``name: payload``
    so it stays available for text matching.
    """
    nodes: list[FlatNode] = []
    for node, _, _ in g.iter_nodes():
        name = node.name
        if node.is_component and node.payload:
            name = f"{node.name}: {node.payload}"
        nodes.append(
            FlatNode(id=node.id, name=name, children=[c.id for c in node.children])
        )

    # Edge order mirrors the serialized document: a node's edges key comes
    # after its children, so descendants' edges precede the parent's own.
    edges: list[FlatEdge] = []

    def collect(node: HierNode) -> None:
        for child in node.children:
            collect(child)
        for edge in node.edges:
            edges.append(
                FlatEdge(id=edge.id, source=edge.source, target=edge.target, name=edge.name)
            )

    collect(g.root)
    return FlatGraph(nodes=nodes, edges=edges)


def flat_to_hier(
    f: FlatGraph, kind_hints: dict[str, NodeKind] | None = None
) -> HierGraph:
    """Nest a flat graph; each edge is re-homed onto its endpoints' parent.

    Nodes without a kind hint default to module when they have children and
    component-text otherwise.  Edges whose endpoints are not siblings are
    attached to the deepest common ancestor (or the root) and tagged
    ``violating`` so the regularizer can deal with them.

    Raises MultipleRootsError unless the parent relation has exactly one root.
    """
    kind_hints = kind_hints or {}
    roots = f.roots()
    if len(roots) != 1:
        raise MultipleRootsError(
            f"expected exactly one root, found {len(roots)}: {sorted(roots)}"
        )

    built: dict[str, HierNode] = {}
    for fn in f.nodes:
        kind = kind_hints.get(fn.id)
        if kind is None or (kind.is_component and fn.children):
            kind = NodeKind.MODULE if fn.children else NodeKind.COMPONENT_TEXT
        built[fn.id] = HierNode(
            kind=kind,
            id=fn.id,
            name=fn.name,
            payload="" if kind.is_component else None,
        )
    for fn in f.nodes:
        built[fn.id].children = [built[c] for c in fn.children]

    root = built[roots[0]]
    # Root must be a module regardless of hints.
    if root.kind is not NodeKind.MODULE:
        root.kind = NodeKind.MODULE
        root.payload = None

    parents = f.parent_map()

    def ancestor_chain(node_id: str) -> list[str]:
        chain, cur = [], parents[node_id]
        while cur is not None:
            chain.append(cur)
            cur = parents[cur]
        return chain

    for fe in f.edges:
        src_chain = ancestor_chain(fe.source)
        tgt_chain = ancestor_chain(fe.target)
        edge = HierEdge(id=fe.id, name=fe.name, source=fe.source, target=fe.target)
        if src_chain and tgt_chain and src_chain[0] == tgt_chain[0]:
            home = built[src_chain[0]]
        else:
            # Deepest proper ancestor shared by both endpoints, else the root.
            common = [a for a in src_chain if a in set(tgt_chain)]
            home = built[common[0]] if common else root
            edge.violating = True
        home.edges.append(edge)

    return HierGraph(root=root)


# ---------------------------------------------------------------------------
# Flat form parsing and stats
# ---------------------------------------------------------------------------


def parse_flat(text: str) -> FlatGraph:
    """Parse the flat extraction JSON (top-level ``graph`` and ``explain``).

    Node fields: id, name, children (list of child ids, empty if leaf).
    Edge fields: id (generated when absent), source, target, name.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(
            [GraphIssue("PARSE_ERROR", "$", f"not valid JSON: {exc}")]
        ) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("graph"), dict):
        raise GraphParseError(
            [GraphIssue("MISSING_FIELD", "$.graph", "top-level 'graph' object required")]
        )
    return flat_from_payload(doc)


def flat_from_payload(doc: dict) -> FlatGraph:
    """Build a FlatGraph from an already-parsed extraction payload."""
    issues: list[GraphIssue] = []
    graph = doc.get("graph") or {}
    raw_nodes = graph.get("nodes")
    raw_edges = graph.get("edges", [])
    if not isinstance(raw_nodes, list):
        raise GraphParseError(
            [GraphIssue("MISSING_FIELD", "$.graph.nodes", "'nodes' list required")]
        )
    if not isinstance(raw_edges, list):
        raise GraphParseError(
            [GraphIssue("BAD_EDGES", "$.graph.edges", "'edges' must be a list")]
        )

    nodes: list[FlatNode] = []
    seen: dict[str, str] = {}
    for i, raw in enumerate(raw_nodes):
        path = f"$.graph.nodes[{i}]"
        if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
            issues.append(GraphIssue("MISSING_FIELD", path, "node requires string 'id'"))
            continue
        nid = raw["id"]
        if nid in seen:
            issues.append(
                GraphIssue("DUP_ID", f"{path}.id", f"id {nid!r} already used at {seen[nid]}")
            )
            continue
        seen[nid] = f"{path}.id"
        children = raw.get("children", [])
        if not isinstance(children, list) or not all(isinstance(c, str) for c in children):
            issues.append(
                GraphIssue("BAD_CHILDREN", f"{path}.children", "children must be a list of ids")
            )
            children = []
        nodes.append(FlatNode(id=nid, name=str(raw.get("name", "")), children=list(children)))

    edges: list[FlatEdge] = []
    used_edge_ids = set()
    auto = 0
    for j, raw in enumerate(raw_edges):
        path = f"$.graph.edges[{j}]"
        if not isinstance(raw, dict):
            issues.append(GraphIssue("BAD_EDGE", path, "edge must be an object"))
            continue
        source, target = raw.get("source"), raw.get("target")
        if not isinstance(source, str) or not isinstance(target, str):
            issues.append(
                GraphIssue("MISSING_FIELD", path, "edge requires string 'source' and 'target'")
            )
            continue
        eid = raw.get("id")
        if not isinstance(eid, str) or eid in used_edge_ids:
            auto += 1
            eid = f"e_auto{auto}"
            while eid in used_edge_ids:
                auto += 1
                eid = f"e_auto{auto}"
        used_edge_ids.add(eid)
        edges.append(FlatEdge(id=eid, source=source, target=target, name=str(raw.get("name", ""))))

    ids = set(seen)
    for i, node in enumerate(nodes):
        for c in node.children:
            if c not in ids:
                issues.append(
                    GraphIssue(
                        "DANGLING_REF",
                        f"$.graph.nodes[{i}].children",
                        f"child id {c!r} does not resolve",
                    )
                )
    for j, edge in enumerate(edges):
        for endpoint in (edge.source, edge.target):
            if endpoint not in ids:
                issues.append(
                    GraphIssue(
                        "DANGLING_REF",
                        f"$.graph.edges[{j}]",
                        f"edge endpoint {endpoint!r} does not resolve",
                    )
                )

    # Parent relation must be a forest: no node with two parents, no cycles.
    parent_count: dict[str, int] = {}
    for node in nodes:
        for c in node.children:
            parent_count[c] = parent_count.get(c, 0) + 1
    for cid, count in sorted(parent_count.items()):
        if count > 1:
            issues.append(
                GraphIssue("MULTIPLE_PARENTS", "$.graph.nodes", f"node {cid!r} has {count} parents")
            )
    if not issues:
        flat = FlatGraph(nodes=nodes, edges=edges, explain=str(doc.get("explain", "")))
        parents = flat.parent_map()
        for node in nodes:
            seen_ids = {node.id}
            cur = parents[node.id]
            while cur is not None:
                if cur in seen_ids:
                    issues.append(
                        GraphIssue(
                            "PARENT_CYCLE", "$.graph.nodes", f"containment cycle through {cur!r}"
                        )
                    )
                    break
                seen_ids.add(cur)
                cur = parents[cur]
            if issues:
                break

    if issues:
        raise GraphParseError(issues)
    return FlatGraph(nodes=nodes, edges=edges, explain=str(doc.get("explain", "")))


def flat_to_json(f: FlatGraph) -> str:
    """Serialize a FlatGraph back to the extraction JSON layout."""
    doc = {
        "graph": {
            "nodes": [
                {"id": n.id, "name": n.name, "children": list(n.children)} for n in f.nodes
            ],
            "edges": [
                {"id": e.id, "source": e.source, "target": e.target, "name": e.name}
                for e in f.edges
            ],
        },
        "explain": f.explain,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def node_stats(f: FlatGraph) -> dict[str, NodeStats]:
    """Per-node degrees over the edge list, root-ward ancestor chain, and
    the set of edge-adjacent neighbor ids."""
    parents = f.parent_map()
    stats = {
        n.id: NodeStats(out_degree=0, in_degree=0, ancestor_chain=[], neighbors=set())
        for n in f.nodes
    }
    for edge in f.edges:
        if edge.source in stats:
            stats[edge.source].out_degree += 1
            stats[edge.source].neighbors.add(edge.target)
        if edge.target in stats:
            stats[edge.target].in_degree += 1
            stats[edge.target].neighbors.add(edge.source)
    for node in f.nodes:
        chain, cur = [], parents[node.id]
        while cur is not None:
            chain.append(cur)
            cur = parents[cur]
        stats[node.id].ancestor_chain = chain
    return stats
