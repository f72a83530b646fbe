"""Sample scoring orchestration: input loading, matching, three-tier
scoring, stability repeats, and dataset statistics.

Graph-only scoring runs fully offline with the token-cosine fallback; image
inputs bring the vision agents into play (mock transport in tests).  Agent
failures degrade the affected sub-scores to ``undetermined`` instead of
failing the sample; the report is then marked partial.
"""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .agents import (
    AgentHandle,
    AgentRole,
    defect_counts_from_payload,
    legibility_counts_from_payload,
    run_agent,
)
from .config import RunConfig
from .graph import (
    FlatGraph,
    GraphParseError,
    flat_from_payload,
    hier_to_flat,
    parse_flat,
    parse_hier,
)
from .matching import MatchResult, match_two_rounds
from .scoring import (
    DefectCounts,
    ScoreReport,
    icon_relevance,
    edge_consistency,
    hierarchy_consistency,
    node_consistency,
    layout_score,
    overall,
    pair_text_scores,
    semantic_combined,
    text_legibility_score,
    understanding_similarity,
)
from .similarity import EmbeddingProvider, SimilarityProvider, TokenCosineProvider

logger = logging.getLogger("archigraph.evaluate")

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".webp", ".gif")

__all__ = [
    "InputTypeError",
    "provider_from_config",
    "load_graph_file",
    "graph_summary_text",
    "score_sample",
    "stability_report",
    "dataset_stats",
    "stats_table",
    "collect_candidates",
]


def collect_candidates(paper_dir: str | Path) -> tuple[str, list[dict]]:
    """Load a per-paper candidates directory: ``abstract.txt`` plus PNG
    images, with an optional ``<image>.txt`` sidecar caption each."""
    paper_dir = Path(paper_dir)
    abstract_path = paper_dir / "abstract.txt"
    abstract = (
        abstract_path.read_text(encoding="utf-8") if abstract_path.exists() else ""
    )
    images = []
    for img in sorted(paper_dir.glob("*.png")):
        caption_path = img.with_suffix(".txt")
        images.append(
            {
                "image_id": img.stem,
                "caption": caption_path.read_text(encoding="utf-8")
                if caption_path.exists()
                else "",
                "data": img.read_bytes(),
            }
        )
    return abstract, images


class InputTypeError(ValueError):
    """Input file is neither a known graph document nor an image."""


def provider_from_config(cfg: RunConfig) -> SimilarityProvider:
    if cfg.provider.kind == "embedding" and cfg.provider.endpoint:
        return EmbeddingProvider(cfg.provider.endpoint, cfg.provider.model)
    return TokenCosineProvider()


def load_graph_file(path: str | Path) -> FlatGraph:
    """Load a graph file in either representation, returned flat.

    Nested documents (with a ``type`` field) are flattened; extraction
    documents (top-level ``graph``) load directly.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputTypeError(f"{path}: not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "graph" in doc:
        return parse_flat(text)
    if isinstance(doc, dict) and "type" in doc:
        return hier_to_flat(parse_hier(text))
    raise InputTypeError(f"{path}: expected a nested or flat graph document")


def is_image_path(path: str | Path) -> bool:
    return str(path).lower().endswith(IMAGE_SUFFIXES)


def graph_summary_text(f: FlatGraph) -> str:
    """Deterministic textual description of a graph, used as the system
    summary in offline (graph-only) scoring."""
    parents = f.parent_map()
    top = [n for n in f.nodes if parents[n.id] is None]
    inner = [n for n in f.nodes if parents[n.id] is not None]
    lines = [
        f"system of {len(f.nodes)} elements arranged in {f.depth()} levels",
        "top level: " + "; ".join(n.name for n in top),
    ]
    if inner:
        lines.append("contains: " + "; ".join(n.name for n in inner))
    name_by_id = {n.id: n.name for n in f.nodes}
    for edge in f.edges:
        label = edge.name or "flows into"
        lines.append(
            f"{name_by_id.get(edge.source, edge.source)} {label} "
            f"{name_by_id.get(edge.target, edge.target)}"
        )
    return "\n".join(lines)


def _extract_graph_from_image(
    image_path: Path, handles: dict[AgentRole, AgentHandle], desc: str
) -> FlatGraph:
    payload = run_agent(
        AgentRole.GRAPH_EXTRACT,
        {"paper_text": desc or "(none provided)"},
        handles[AgentRole.GRAPH_EXTRACT],
        images=[image_path.read_bytes()],
    )
    return flat_from_payload(payload)


def _flat_json(f: FlatGraph) -> str:
    return json.dumps(
        {
            "nodes": [{"id": n.id, "name": n.name, "children": n.children} for n in f.nodes],
            "edges": [
                {"id": e.id, "source": e.source, "target": e.target, "name": e.name}
                for e in f.edges
            ],
        },
        ensure_ascii=False,
    )


def score_sample(
    gen: str | Path,
    gt: str | Path,
    cfg: RunConfig,
    handles: dict[AgentRole, AgentHandle] | None = None,
    sample_id: str = "",
    desc: str = "",
) -> ScoreReport:
    """Score one generated sample against its ground truth.

    Both inputs may be graph files or diagram images; image inputs require
    agent handles (graph extraction plus the visual agents).
    """
    gen, gt = Path(gen), Path(gt)
    gen_is_image, gt_is_image = is_image_path(gen), is_image_path(gt)
    if (gen_is_image or gt_is_image) and not handles:
        raise InputTypeError("image inputs require agent handles")

    provider = provider_from_config(cfg)
    partial = False

    f_gen = (
        _extract_graph_from_image(gen, handles, desc)
        if gen_is_image
        else load_graph_file(gen)
    )
    f_gt = (
        _extract_graph_from_image(gt, handles, desc)
        if gt_is_image
        else load_graph_file(gt)
    )

    match = match_two_rounds(f_gen, f_gt, provider, cfg.match_config())
    text_scores = pair_text_scores(match, f_gen, f_gt, provider)
    node = node_consistency(match, f_gt, text_scores)
    edge = edge_consistency(match, f_gen, f_gt)
    hier = hierarchy_consistency(match, f_gen, f_gt)
    combined = semantic_combined(node, edge, hier, cfg.semantic_weights)

    # Layout and visual tiers.
    counts: DefectCounts | None
    icon: float | None
    understanding: float | None
    legibility: float | None

    if gen_is_image:
        counts = _try_layout_counts(gen, handles)
        icon = _try_icon_relevance(gen, f_gen, handles, provider, desc)
        legibility = _try_legibility(gen, handles)
        summary_gen = _try_understanding(gen, f_gen, handles, desc)
        summary_gt = (
            _try_understanding(gt, f_gt, handles, desc)
            if gt_is_image
            else graph_summary_text(f_gt)
        )
        understanding = (
            understanding_similarity(summary_gen, summary_gt, provider)
            if summary_gen is not None and summary_gt is not None
            else None
        )
    else:
        # Offline policy: no image to audit, so zero defects, neutral icon
        # score, perfect legibility, and template summaries for both sides.
        counts = DefectCounts(0, 0, 0)
        icon = 0.5
        legibility = 1.0
        understanding = understanding_similarity(
            graph_summary_text(f_gen), graph_summary_text(f_gt), provider
        )

    lay = layout_score(counts, cfg.layout_defect_penalty) if counts is not None else None
    visual_parts = {"icon": icon, "understanding": understanding, "legibility": legibility}
    determined = [
        (v, w)
        for v, w in zip(visual_parts.values(), cfg.visual_weights)
        if v is not None
    ]
    if None in visual_parts.values() or lay is None:
        partial = True
    visual_combined = (
        sum(v * w for v, w in determined) / sum(w for _, w in determined)
        if determined
        else None
    )

    total = (
        overall(combined, lay, visual_combined, cfg.overall_weights)
        if lay is not None and visual_combined is not None
        else None
    )

    return ScoreReport(
        sample_id=sample_id or gen.stem,
        semantic={"node": node, "edge": edge, "hierarchy": hier, "combined": combined},
        layout={
            "crossings": counts.crossings if counts else None,
            "overlaps": counts.overlaps if counts else None,
            "overflows": counts.overflows if counts else None,
            "score": lay,
        },
        visual={
            "icon": icon,
            "understanding": understanding,
            "legibility": legibility,
            "combined": visual_combined,
        },
        overall=total,
        provider_id=provider.identifier + ("(degraded)" if provider.degraded else ""),
        config_hash=cfg.config_hash(),
        partial=partial,
    )


def _try_layout_counts(image: Path, handles) -> DefectCounts | None:
    try:
        payload = run_agent(
            AgentRole.LAYOUT_EXAMINE, {}, handles[AgentRole.LAYOUT_EXAMINE],
            images=[image.read_bytes()],
        )
        counts = defect_counts_from_payload(payload)
        return DefectCounts(
            crossings=counts["line_crossing"],
            overlaps=counts["image_overlap"],
            overflows=counts["text_overflow"],
        )
    except Exception as exc:
        logger.warning("layout agent undetermined: %s", exc)
        return None


def _try_icon_relevance(image: Path, f_gen: FlatGraph, handles, provider, desc) -> float | None:
    try:
        payload = run_agent(
            AgentRole.ICON_EXAMINE,
            {"desc": desc or "(none provided)", "graph": _flat_json(f_gen)},
            handles[AgentRole.ICON_EXAMINE],
            images=[image.read_bytes()],
            context={"node_ids": {n.id for n in f_gen.nodes}},
        )
        module_text = {n.id: n.name for n in f_gen.nodes}
        return icon_relevance(payload, module_text, provider)
    except Exception as exc:
        logger.warning("icon agent undetermined: %s", exc)
        return None


def _try_understanding(image: Path, graph: FlatGraph, handles, desc) -> str | None:
    try:
        payload = run_agent(
            AgentRole.SYSTEM_UNDERSTAND,
            {"desc": desc or "(none provided)", "graph": _flat_json(graph)},
            handles[AgentRole.SYSTEM_UNDERSTAND],
            images=[image.read_bytes()],
        )
        return payload["system_understanding"]
    except Exception as exc:
        logger.warning("understand agent undetermined: %s", exc)
        return None


def _try_legibility(image: Path, handles) -> float | None:
    try:
        payload = run_agent(
            AgentRole.TEXT_LEGIBILITY, {}, handles[AgentRole.TEXT_LEGIBILITY],
            images=[image.read_bytes()],
        )
        return text_legibility_score(legibility_counts_from_payload(payload))
    except Exception as exc:
        logger.warning("legibility agent undetermined: %s", exc)
        return None


# ---------------------------------------------------------------------------
# Stability and dataset statistics
# ---------------------------------------------------------------------------

_METRIC_PATHS = (
    ("semantic", "node"),
    ("semantic", "edge"),
    ("semantic", "hierarchy"),
    ("semantic", "combined"),
    ("layout", "score"),
    ("visual", "icon"),
    ("visual", "understanding"),
    ("visual", "legibility"),
    ("visual", "combined"),
    ("overall",),
)


def _metric_value(report: ScoreReport, path: tuple[str, ...]) -> float | None:
    doc = report.to_json()
    for key in path:
        doc = doc[key] if isinstance(doc, dict) else None
        if doc is None:
            return None
    return doc


def stability_report(
    samples: list[dict],
    repeats: int,
    cfg: RunConfig,
    handles: dict[AgentRole, AgentHandle] | None = None,
) -> dict:
    """Score every sample ``repeats`` times and report min/mean/max per
    metric; with the mock transport every range is exactly zero.

    Samples are processed concurrently up to the configured cap; the report
    keeps input order regardless of completion order.
    """
    if repeats < 2:
        raise ValueError("repeats must be >= 2")

    def run_sample(sample: dict) -> dict:
        runs = [
            score_sample(
                sample["gen"],
                sample["gt"],
                cfg,
                handles,
                sample_id=str(sample.get("id", "")),
                desc=sample.get("desc", ""),
            )
            for _ in range(repeats)
        ]
        metrics = {}
        for path in _METRIC_PATHS:
            values = [_metric_value(r, path) for r in runs]
            name = ".".join(path)
            if any(v is None for v in values):
                metrics[name] = {"min": None, "mean": None, "max": None, "range": None}
            else:
                metrics[name] = {
                    "min": min(values),
                    "mean": statistics.fmean(values),
                    "max": max(values),
                    "range": max(values) - min(values),
                }
        return {"id": str(sample.get("id", "")), "repeats": repeats, "metrics": metrics}

    with ThreadPoolExecutor(max_workers=max(1, cfg.sample_concurrency)) as pool:
        rows = list(pool.map(run_sample, samples))
    return {"repeats": repeats, "config_hash": cfg.config_hash(), "samples": rows}


def dataset_stats(dataset_dir: str | Path) -> dict:
    """Per-domain node/edge/depth statistics over a directory of samples.

    Each sample is a subdirectory holding ``graph.json`` and a sidecar
    ``meta.json`` with a ``domain`` tag.  Unreadable samples are skipped
    with a warning entry.
    """
    root = Path(dataset_dir)
    warnings: list[str] = []
    per_domain: dict[str, dict[str, list[float]]] = {}
    for sample_dir in sorted(p for p in root.iterdir() if p.is_dir()) if root.is_dir() else []:
        graph_path = sample_dir / "graph.json"
        meta_path = sample_dir / "meta.json"
        try:
            flat = load_graph_file(graph_path)
            meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.exists() else {}
        except (OSError, InputTypeError, GraphParseError, json.JSONDecodeError) as exc:
            warnings.append(f"{sample_dir.name}: skipped ({exc})")
            continue
        domain = str(meta.get("domain", "unknown"))
        bucket = per_domain.setdefault(domain, {"nodes": [], "edges": [], "depth": []})
        bucket["nodes"].append(len(flat.nodes))
        bucket["edges"].append(len(flat.edges))
        bucket["depth"].append(flat.depth())

    domains = {}
    for domain in sorted(per_domain):
        bucket = per_domain[domain]
        domains[domain] = {
            "count": len(bucket["nodes"]),
            **{
                key: {
                    "mean": statistics.fmean(vals),
                    "min": min(vals),
                    "max": max(vals),
                }
                for key, vals in bucket.items()
            },
        }
    return {"domains": domains, "warnings": warnings}


def stats_table(report: dict) -> str:
    """Aligned text rendering of a dataset_stats report."""
    header = f"{'domain':<16}{'count':>6}{'nodes':>16}{'edges':>16}{'depth':>16}"
    lines = [header, "-" * len(header)]
    for domain, row in report["domains"].items():
        cells = [f"{domain:<16}", f"{row['count']:>6}"]
        for key in ("nodes", "edges", "depth"):
            m = row[key]
            cells.append(f"{m['mean']:.1f} ({m['min']}-{m['max']})".rjust(16))
        lines.append("".join(cells))
    return "\n".join(lines)
