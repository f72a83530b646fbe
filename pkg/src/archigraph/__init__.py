"""archigraph: constrained hierarchical diagram graphs with a multi-agent
generation pipeline, packing-based layout, SVG rendering, and a three-tier
(semantic / layout / visual) evaluation framework."""

__version__ = "0.1.0"

from .graph import (
    FlatEdge,
    FlatGraph,
    FlatNode,
    GraphIssue,
    GraphParseError,
    HierEdge,
    HierGraph,
    HierNode,
    MultipleRootsError,
    NodeKind,
    NodeStats,
    canonical_serialize,
    flat_to_hier,
    flat_to_json,
    hier_to_flat,
    node_stats,
    parse_flat,
    parse_hier,
    validate,
)
from .matching import (
    MatchConfig,
    MatchResult,
    RoundConfig,
    SimWeights,
    match_two_rounds,
)
from .regularize import RegularizationReport, prune_violations, rehome_edges, semantic_filter
from .scoring import DefectCounts, ScoreReport, layout_score, overall
from .similarity import EmbeddingProvider, TokenCosineProvider

__all__ = [
    "__version__",
    "FlatEdge",
    "FlatGraph",
    "FlatNode",
    "GraphIssue",
    "GraphParseError",
    "HierEdge",
    "HierGraph",
    "HierNode",
    "MultipleRootsError",
    "NodeKind",
    "NodeStats",
    "canonical_serialize",
    "flat_to_hier",
    "flat_to_json",
    "hier_to_flat",
    "node_stats",
    "parse_flat",
    "parse_hier",
    "validate",
    "MatchConfig",
    "MatchResult",
    "RoundConfig",
    "SimWeights",
    "match_two_rounds",
    "RegularizationReport",
    "prune_violations",
    "rehome_edges",
    "semantic_filter",
    "DefectCounts",
    "ScoreReport",
    "layout_score",
    "overall",
    "TokenCosineProvider",
    "EmbeddingProvider",
]
