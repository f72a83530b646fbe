"""Shared test helpers: random graph builders and brute-force oracles.

The oracles here deliberately re-derive results by enumeration or direct
recomputation so they stay independent of the library code paths they
check.
"""

from __future__ import annotations

import random
from itertools import permutations

from archigraph.graph import FlatGraph, HierEdge, HierGraph, HierNode, NodeKind

WORDS = (
    "encoder decoder parser planner sampler ranker indexer cache buffer queue "
    "tokenizer embedder retriever scorer merger splitter filter router gateway "
    "monitor logger trainer optimizer scheduler allocator compressor extractor "
    "aligner segmenter classifier detector generator renderer packer tracer "
    "validator annotator resolver adapter bridge collector dispatcher emitter "
    "formatter grouper handler importer joiner loader mapper normalizer"
).split()


def random_hier_graph(
    rng: random.Random,
    max_nodes: int = 15,
    invalid: bool = False,
    edge_rate: float = 0.5,
) -> HierGraph:
    """Random three-level graph with unique ids and distinct names.

    With ``invalid=True`` edges are declared between arbitrary node pairs on
    arbitrary holders (plus occasional self-loops), which produces a mix of
    conformant, misdeclared, and cross-level edges.  Node structure is
    always sound (unique ids, components as leaves).
    """
    n_total = rng.randint(1, max_nodes)
    names = rng.sample(WORDS, min(n_total, len(WORDS)))
    counter = 0

    def next_node(kind: NodeKind) -> HierNode:
        nonlocal counter
        counter += 1
        name = names[(counter - 1) % len(names)] + (
            f" {counter}" if counter > len(names) else ""
        )
        payload = "content" if kind.is_component else None
        return HierNode(kind=kind, id=f"n{counter}", name=name, payload=payload)

    root = next_node(NodeKind.MODULE)
    containers = [root]
    all_nodes = [root]
    while counter < n_total:
        parent = rng.choice(containers)
        depth = 1 if parent is root else 2 if parent.kind is NodeKind.MODULE else 3
        if depth == 1:
            kind = NodeKind.MODULE
        elif depth == 2:
            kind = rng.choice([NodeKind.TOOL, NodeKind.COMPONENT_TEXT, NodeKind.COMPONENT_ICON])
        else:
            kind = rng.choice(
                [NodeKind.COMPONENT_TEXT, NodeKind.COMPONENT_ICON, NodeKind.COMPONENT_IMAGE]
            )
        node = next_node(kind)
        parent.children.append(node)
        all_nodes.append(node)
        if not node.is_component:
            containers.append(node)

    edge_counter = 0

    def add_edge(holder: HierNode, src: str, tgt: str):
        nonlocal edge_counter
        edge_counter += 1
        holder.edges.append(
            HierEdge(id=f"e{edge_counter}", name=f"flow {edge_counter}", source=src, target=tgt)
        )

    if invalid:
        n_edges = rng.randint(0, max(1, n_total))
        for _ in range(n_edges):
            holder = rng.choice([n for n in all_nodes if not n.is_component])
            src = rng.choice(all_nodes).id
            tgt = src if rng.random() < 0.15 else rng.choice(all_nodes).id
            add_edge(holder, src, tgt)
    else:
        for parent in containers:
            kids = parent.children
            for i in range(len(kids)):
                for j in range(len(kids)):
                    if i != j and rng.random() < edge_rate / max(1, len(kids)):
                        add_edge(parent, kids[i].id, kids[j].id)

    return HierGraph(root=root)


def brute_force_violating_edges(g: HierGraph) -> set[str]:
    """Edge ids that no legal placement can save: self-loops, dangling
    endpoints, and endpoint pairs that do not share a direct parent."""
    ids = {n.id for n, _, _ in g.iter_nodes()}
    parent_of = g.parent_map()
    bad = set()
    for node, _, _ in g.iter_nodes():
        for edge in node.edges:
            if edge.source not in ids or edge.target not in ids:
                bad.add(edge.id)
            elif edge.source == edge.target:
                bad.add(edge.id)
            else:
                sp, tp = parent_of[edge.source], parent_of[edge.target]
                if sp is None or sp != tp:
                    bad.add(edge.id)
    return bad


def brute_force_degrees(f: FlatGraph) -> dict[str, tuple[int, int]]:
    out = {n.id: [0, 0] for n in f.nodes}
    for e in f.edges:
        out[e.source][0] += 1
        out[e.target][1] += 1
    return {k: (v[0], v[1]) for k, v in out.items()}


class RuleTransport:
    """Transport that matches requests by content substrings.

    ``rules`` is an ordered list of (substrings, response); the first rule
    whose substrings all appear in the flattened request text wins.  Safe
    under concurrent use; optionally records digest -> response pairs so a
    strict digest-keyed mock file can be generated from a run.
    """

    kind = "mock"

    def __init__(self, rules):
        import threading

        self.rules = list(rules)
        self.recorded: dict[str, str] = {}
        self._lock = threading.Lock()

    @staticmethod
    def _flatten(request) -> str:
        parts = []
        for message in request["messages"]:
            content = message.get("content", "")
            if isinstance(content, list):
                parts.extend(p.get("text", "") for p in content if isinstance(p, dict))
            else:
                parts.append(content)
        return "\n".join(parts)

    def send(self, request):
        from archigraph.agents import AgentUnavailableError, request_digest

        text = self._flatten(request)
        for substrings, response in self.rules:
            if all(s in text for s in substrings):
                with self._lock:
                    self.recorded[request_digest(request["model"], request["messages"])] = response
                return response
        raise AgentUnavailableError(f"no rule matches request: {text[:200]!r}")


def optimal_assignment_total(score: dict[tuple[str, str], float], gen_ids, gt_ids) -> float:
    """Exhaustive best injective-assignment total; fine for <= 7 nodes."""
    gen_ids, gt_ids = list(gen_ids), list(gt_ids)
    if len(gen_ids) <= len(gt_ids):
        small, large, flip = gen_ids, gt_ids, False
    else:
        small, large, flip = gt_ids, gen_ids, True
    best = 0.0
    for perm in permutations(large, len(small)):
        total = sum(
            score[(s, l)] if not flip else score[(l, s)]
            for s, l in zip(small, perm)
        )
        best = max(best, total)
    return best
