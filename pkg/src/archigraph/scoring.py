"""Three-tier score report: semantic consistency, layout penalties, visual
sub-scores, and the weighted overall.

All scores live in [0, 1] internally; reports surface them on a 0-100 scale
with one decimal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import FlatGraph
from .matching import MatchResult
from .similarity import SimilarityProvider, text_similarity

__all__ = [
    "DefectCounts",
    "ScoreReport",
    "EmptyReferenceError",
    "pair_text_scores",
    "node_consistency",
    "edge_consistency",
    "hierarchy_consistency",
    "semantic_combined",
    "layout_score",
    "icon_relevance",
    "understanding_similarity",
    "text_legibility_score",
    "overall",
    "as_display",
]

OVERALL_WEIGHTS = (0.3, 0.3, 0.4)  # semantic, layout, visual
DEFAULT_DEFECT_PENALTY = 0.1
NEUTRAL_ICON_SCORE = 0.5


class EmptyReferenceError(ValueError):
    """The ground-truth graph has no nodes; nothing can be scored."""

    code = "EMPTY_REFERENCE"


@dataclass
class DefectCounts:
    crossings: int = 0
    overlaps: int = 0
    overflows: int = 0

    def __post_init__(self):
        if min(self.crossings, self.overlaps, self.overflows) < 0:
            raise ValueError("defect counts must be non-negative")

    @property
    def total(self) -> int:
        return self.crossings + self.overlaps + self.overflows


@dataclass
class ScoreReport:
    sample_id: str = ""
    semantic: dict = field(default_factory=dict)  # node, edge, hierarchy, combined
    layout: dict = field(default_factory=dict)  # crossings, overlaps, overflows, score
    visual: dict = field(default_factory=dict)  # icon, understanding, legibility, combined
    overall: float | None = None
    provider_id: str = ""
    config_hash: str = ""
    partial: bool = False

    def to_json(self) -> dict:
        doc = {
            "sample_id": self.sample_id,
            "semantic": dict(self.semantic),
            "layout": dict(self.layout),
            "visual": dict(self.visual),
            "overall": self.overall,
            "provider_id": self.provider_id,
            "config_hash": self.config_hash,
        }
        if self.partial:
            doc["partial"] = True
        return doc


def as_display(score: float | None) -> float | None:
    """Raw [0, 1] score on the reporting scale: 0-100, one decimal."""
    if score is None:
        return None
    return round(score * 100.0, 1)


def pair_text_scores(
    m: MatchResult, f_gen: FlatGraph, f_gt: FlatGraph, provider: SimilarityProvider
) -> dict[tuple[str, str], float]:
    """Text similarity for each matched pair, keyed by (gen_id, gt_id).

    Matching already computed these; recomputing from the graphs keeps the
    scorer usable with externally supplied matchings.
    """
    gen_names = {n.id: n.name for n in f_gen.nodes}
    gt_names = {n.id: n.name for n in f_gt.nodes}
    return {
        (p.gen_id, p.gt_id): text_similarity(
            gen_names[p.gen_id], gt_names[p.gt_id], provider
        )
        for p in m.pairs
    }


def node_consistency(
    m: MatchResult, f_gt: FlatGraph, text_scores: dict[tuple[str, str], float]
) -> float:
    """Sum of matched-pair text similarities divided by |GT nodes|; GT nodes
    left unmatched contribute zero."""
    if not f_gt.nodes:
        raise EmptyReferenceError("ground-truth graph has no nodes")
    total = sum(text_scores.get((p.gen_id, p.gt_id), 0.0) for p in m.pairs)
    return total / len(f_gt.nodes)


def edge_consistency(m: MatchResult, f_gen: FlatGraph, f_gt: FlatGraph) -> float:
    """F1 of directed edges preserved under the matching.

    A GT edge (u, v) counts as preserved when both endpoints are matched and
    the generated graph has the corresponding edge in the same direction.
    Two edgeless graphs score 1.0.  Edge labels are ignored.
    """
    gen_pairs = {(e.source, e.target) for e in f_gen.edges}
    gt_pairs = {(e.source, e.target) for e in f_gt.edges}
    if not gen_pairs and not gt_pairs:
        return 1.0
    gt_to_gen = m.gt_to_gen()
    preserved = sum(
        1
        for (u, v) in gt_pairs
        if u in gt_to_gen and v in gt_to_gen and (gt_to_gen[u], gt_to_gen[v]) in gen_pairs
    )
    if preserved == 0:
        return 0.0
    precision = preserved / len(gen_pairs)
    recall = preserved / len(gt_pairs)
    return 2 * precision * recall / (precision + recall)


def hierarchy_consistency(m: MatchResult, f_gen: FlatGraph, f_gt: FlatGraph) -> float:
    """F1 over direct parent-child containment pairs preserved under the
    matching; two containment-free graphs score 1.0."""
    gen_pairs = {(n.id, c) for n in f_gen.nodes for c in n.children}
    gt_pairs = {(n.id, c) for n in f_gt.nodes for c in n.children}
    if not gen_pairs and not gt_pairs:
        return 1.0
    gt_to_gen = m.gt_to_gen()
    preserved = sum(
        1
        for (p, c) in gt_pairs
        if p in gt_to_gen and c in gt_to_gen and (gt_to_gen[p], gt_to_gen[c]) in gen_pairs
    )
    if preserved == 0:
        return 0.0
    precision = preserved / len(gen_pairs)
    recall = preserved / len(gt_pairs)
    return 2 * precision * recall / (precision + recall)


def semantic_combined(
    node: float, edge: float, hier: float, weights: tuple[float, float, float] = (1, 1, 1)
) -> float:
    """Weighted mean of the three semantic sub-scores (unweighted by default)."""
    total = sum(weights)
    return (weights[0] * node + weights[1] * edge + weights[2] * hier) / total


def layout_score(counts: DefectCounts, penalty: float = DEFAULT_DEFECT_PENALTY) -> float:
    """Start from 1.0 and deduct ``penalty`` per defect, floored at zero."""
    if not 0 < penalty <= 1:
        raise ValueError("penalty must be in (0, 1]")
    return max(0.0, 1.0 - penalty * counts.total)


def icon_relevance(
    icon_descriptions: dict[str, str],
    module_text_by_id: dict[str, str],
    provider: SimilarityProvider,
) -> float:
    """Mean similarity between each icon's visual description and its parent
    module's name/description.

    An empty description means "no icon there"; with no icons anywhere the
    score is a neutral 0.5 (absence is neither a defect nor a success).
    """
    sims = [
        text_similarity(desc, module_text_by_id.get(node_id, ""), provider)
        for node_id, desc in sorted(icon_descriptions.items())
        if desc
    ]
    if not sims:
        return NEUTRAL_ICON_SCORE
    return sum(sims) / len(sims)


def understanding_similarity(
    summary_gen: str, summary_gt: str, provider: SimilarityProvider
) -> float:
    """Similarity of the two whole-system summaries."""
    return text_similarity(summary_gen, summary_gt, provider)


def text_legibility_score(
    issue_counts: dict[str, int], penalty: float = DEFAULT_DEFECT_PENALTY
) -> float:
    """Per-instance deduction over the Blurry/Incomplete/Ambiguous counts,
    floored at zero."""
    total = sum(issue_counts.values())
    if total < 0:
        raise ValueError("issue counts must be non-negative")
    return max(0.0, 1.0 - penalty * total)


def overall(
    semantic: float,
    layout: float,
    visual: float,
    weights: tuple[float, float, float] = OVERALL_WEIGHTS,
) -> float:
    """Weighted sum of the three tier scores (inputs on a common scale)."""
    return weights[0] * semantic + weights[1] * layout + weights[2] * visual
