"""Command-line surface for the whole toolkit.

Exit codes are a stable CI contract: 0 success, 1 partial (agent-degraded
or pipeline aborted), 2 usage/input error.  The global ``--mock`` flag
swaps every agent onto the canned-response transport, which makes all
agent-backed commands bit-reproducible.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .agents import AgentHandle, AgentRole, HttpTransport, MockTransport, filter_candidate_images
from .config import RunConfig
from .evaluate import (
    InputTypeError,
    collect_candidates,
    dataset_stats,
    is_image_path,
    provider_from_config,
    score_sample,
    stability_report,
    stats_table,
)
from .graph import (
    GraphParseError,
    MultipleRootsError,
    canonical_serialize,
    hier_to_flat,
    parse_hier,
    validate as validate_graph,
)
from .layout import SizingStyle, pack, route_edges, size_weights
from .matching import match_two_rounds
from .pipeline import generate as run_generate
from .regularize import prune_violations
from .render import emit_svg, export_layout_json
from .scoring import as_display
from .evaluate import load_graph_file, _extract_graph_from_image
from .util import write_json_atomic, write_text_atomic

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


def _load_config(path: str | None) -> RunConfig:
    if not path:
        return RunConfig()
    try:
        return RunConfig.from_file(path)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise click.exceptions.Exit(_usage_error(f"bad config {path}: {exc}"))


def _usage_error(message: str) -> int:
    click.echo(f"error: {message}", err=True)
    return EXIT_USAGE


def _make_handles(cfg: RunConfig, mock_path: str | None) -> dict[AgentRole, AgentHandle]:
    if mock_path:
        transport = MockTransport.from_file(mock_path)
    else:
        transport = HttpTransport(cfg.agents.endpoint, cfg.agents.api_key_env)
    handles = {}
    for role in AgentRole:
        temperature = (
            cfg.agents.temperature_generation
            if role.is_generation
            else cfg.agents.temperature_evaluation
        )
        handles[role] = AgentHandle(
            role=role,
            transport=transport,
            model=cfg.agents.model,
            endpoint=cfg.agents.endpoint,
            temperature=temperature,
            max_retries=cfg.agents.max_retries,
            retry_delay=cfg.agents.retry_delay,
        )
    return handles


def _read_hier(path: str):
    try:
        return parse_hier(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise click.exceptions.Exit(_usage_error(str(exc)))
    except GraphParseError as exc:
        raise click.exceptions.Exit(_usage_error(f"{path}: {exc}"))


@click.group()
@click.version_option(version=__version__, prog_name="archigraph")
@click.option("--config", "config_path", type=click.Path(), default=None, help="Run config JSON.")
@click.option("--mock", "mock_path", type=click.Path(), default=None, help="Canned agent responses.")
@click.pass_context
def main(ctx, config_path, mock_path):
    """Architecture-diagram graphs: generate, regularize, lay out, render,
    and score."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _load_config(config_path)
    ctx.obj["mock_path"] = mock_path


@main.command("validate")
@click.argument("graph_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), default=None, help="Violation report JSON.")
def cmd_validate(graph_path, out):
    """Check a nested graph against the topological protocol."""
    graph = _read_hier(graph_path)
    violations = [v.to_json() for v in validate_graph(graph)]
    text = json.dumps(violations, indent=2, ensure_ascii=False) + "\n"
    if out:
        write_text_atomic(out, text)
    click.echo(text, nl=False)
    sys.exit(EXIT_OK)


@main.command("regularize")
@click.argument("graph_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def cmd_regularize(graph_path, out, report_path):
    """Rehome misdeclared edges and prune residual violations."""
    graph = _read_hier(graph_path)
    fixed, report = prune_violations(graph)
    write_text_atomic(out, canonical_serialize(fixed))
    if report_path:
        write_json_atomic(report_path, report.to_json())
    click.echo(f"rehomed={len(report.rehomed)} deleted={len(report.deleted)}")
    sys.exit(EXIT_OK)


@main.command("match")
@click.argument("gen_path", type=click.Path())
@click.argument("gt_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), default=None)
@click.pass_context
def cmd_match(ctx, gen_path, gt_path, out):
    """Two-round node matching between two graph files."""
    cfg: RunConfig = ctx.obj["config"]
    try:
        f_gen, f_gt = load_graph_file(gen_path), load_graph_file(gt_path)
    except (OSError, InputTypeError, GraphParseError, MultipleRootsError) as exc:
        sys.exit(_usage_error(str(exc)))
    result = match_two_rounds(f_gen, f_gt, provider_from_config(cfg), cfg.match_config())
    doc = result.to_json()
    if out:
        write_json_atomic(out, doc)
    click.echo(json.dumps(doc, indent=2, ensure_ascii=False))
    sys.exit(EXIT_OK)


@main.command("score")
@click.argument("gen_path", type=click.Path())
@click.argument("gt_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), default=None, help="ScoreReport JSON.")
@click.option("--sample-id", default="", help="Identifier recorded in the report.")
@click.option("--desc", default="", help="Paper text/abstract given to vision agents.")
@click.pass_context
def cmd_score(ctx, gen_path, gt_path, out, sample_id, desc):
    """Score a generated diagram (graph or image) against ground truth."""
    cfg: RunConfig = ctx.obj["config"]
    for path in (gen_path, gt_path):
        if not Path(path).exists():
            sys.exit(_usage_error(f"input file not found: {path}"))
    needs_agents = is_image_path(gen_path) or is_image_path(gt_path)
    handles = _make_handles(cfg, ctx.obj["mock_path"]) if needs_agents else None
    try:
        report = score_sample(gen_path, gt_path, cfg, handles, sample_id, desc)
    except (InputTypeError, GraphParseError, MultipleRootsError) as exc:
        sys.exit(_usage_error(str(exc)))
    doc = report.to_json()
    doc["tool_version"] = __version__
    if out:
        write_json_atomic(out, doc)
    click.echo(json.dumps(doc, indent=2, ensure_ascii=False))
    click.echo(
        "semantic={} layout={} visual={} overall={}".format(
            as_display(report.semantic.get("combined")),
            as_display(report.layout.get("score")),
            as_display(report.visual.get("combined")),
            as_display(report.overall),
        )
    )
    sys.exit(EXIT_PARTIAL if report.partial else EXIT_OK)


@main.command("generate")
@click.argument("paper_path", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), required=True, help="Artifacts directory.")
@click.pass_context
def cmd_generate(ctx, paper_path, out_dir):
    """Run the generation pipeline on pre-extracted paper text."""
    cfg: RunConfig = ctx.obj["config"]
    try:
        paper_text = Path(paper_path).read_text(encoding="utf-8")
    except OSError as exc:
        sys.exit(_usage_error(str(exc)))
    handles = _make_handles(cfg, ctx.obj["mock_path"])
    artifacts = run_generate(
        paper_text,
        handles,
        out_dir,
        char_budget=cfg.char_budget,
        draft_concurrency=cfg.draft_concurrency,
    )
    click.echo(f"status={artifacts.status} artifacts={out_dir}")
    if artifacts.status == "aborted":
        click.echo(f"error: {artifacts.error}", err=True)
    sys.exit(EXIT_OK if artifacts.status == "ok" else EXIT_PARTIAL)


def _layout_doc(graph, cfg: RunConfig) -> tuple[str, str]:
    style = SizingStyle()
    geom = route_edges(graph, pack(graph, size_weights(graph, style), style), style)
    return (
        export_layout_json(graph, geom, cfg.units_per_inch),
        emit_svg(graph, geom, style),
    )


@main.command("layout")
@click.argument("graph_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), required=True, help="Layout JSON.")
@click.pass_context
def cmd_layout(ctx, graph_path, out):
    """Pack and route a nested graph; write the layout-JSON contract."""
    layout_json, _ = _layout_doc(_read_hier(graph_path), ctx.obj["config"])
    write_text_atomic(out, layout_json)
    click.echo(out)
    sys.exit(EXIT_OK)


@main.command("export-layout")
@click.argument("graph_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), required=True, help="Layout JSON.")
@click.pass_context
def cmd_export_layout(ctx, graph_path, out):
    """Alias of `layout`: emit the versioned layout document for the slide
    exporter."""
    layout_json, _ = _layout_doc(_read_hier(graph_path), ctx.obj["config"])
    write_text_atomic(out, layout_json)
    click.echo(out)
    sys.exit(EXIT_OK)


@main.command("render")
@click.argument("graph_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), required=True, help="SVG file.")
@click.pass_context
def cmd_render(ctx, graph_path, out):
    """Render a nested graph to SVG."""
    _, svg = _layout_doc(_read_hier(graph_path), ctx.obj["config"])
    write_text_atomic(out, svg)
    click.echo(out)
    sys.exit(EXIT_OK)


@main.command("extract")
@click.argument("image_path", type=click.Path())
@click.option("--paper-text", "paper_text_path", type=click.Path(), default=None)
@click.option("-o", "--out", type=click.Path(), required=True, help="Flat graph JSON.")
@click.pass_context
def cmd_extract(ctx, image_path, paper_text_path, out):
    """Extract a flat graph from a diagram image via the extraction agent."""
    cfg: RunConfig = ctx.obj["config"]
    if not Path(image_path).exists():
        sys.exit(_usage_error(f"input file not found: {image_path}"))
    desc = Path(paper_text_path).read_text(encoding="utf-8") if paper_text_path else ""
    handles = _make_handles(cfg, ctx.obj["mock_path"])
    flat = _extract_graph_from_image(Path(image_path), handles, desc)
    from .graph import flat_to_json

    write_text_atomic(out, flat_to_json(flat))
    click.echo(out)
    sys.exit(EXIT_OK)


@main.command("filter")
@click.argument("candidates_dir", type=click.Path())
@click.option("-o", "--out", type=click.Path(), required=True, help="Manifest JSON.")
@click.pass_context
def cmd_filter(ctx, candidates_dir, out):
    """Keep/select architecture-diagram candidates per paper directory."""
    cfg: RunConfig = ctx.obj["config"]
    root = Path(candidates_dir)
    if not root.is_dir():
        sys.exit(_usage_error(f"not a directory: {candidates_dir}"))
    handles = _make_handles(ctx.obj["config"], ctx.obj["mock_path"])
    manifest = []
    degraded = False
    for paper_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        abstract, images = collect_candidates(paper_dir)
        decisions = filter_candidate_images(
            abstract, images, handles[AgentRole.IMAGE_FILTER], cfg.filter_threshold
        )
        for decision in decisions:
            row = {"paper_id": paper_dir.name, **decision.to_json()}
            degraded = degraded or decision.undetermined
            manifest.append(row)
    write_json_atomic(out, manifest)
    click.echo(f"papers={len(set(r['paper_id'] for r in manifest))} rows={len(manifest)}")
    sys.exit(EXIT_PARTIAL if degraded else EXIT_OK)


@main.command("stats")
@click.argument("dataset_dir", type=click.Path())
@click.option("-o", "--out", type=click.Path(), default=None)
@click.pass_context
def cmd_stats(ctx, dataset_dir, out):
    """Per-domain node/edge/depth statistics for a dataset directory."""
    report = dataset_stats(dataset_dir)
    report["tool_version"] = __version__
    report["config_hash"] = ctx.obj["config"].config_hash()
    if out:
        write_json_atomic(out, report)
    click.echo(stats_table(report))
    for warning in report["warnings"]:
        click.echo(f"warning: {warning}", err=True)
    sys.exit(EXIT_OK)


@main.command("stability")
@click.argument("samples_path", type=click.Path())
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("-o", "--out", type=click.Path(), default=None)
@click.pass_context
def cmd_stability(ctx, samples_path, repeats, out):
    """Repeat-run score stability over a JSON sample list."""
    cfg: RunConfig = ctx.obj["config"]
    if repeats < 2:
        sys.exit(_usage_error("repeats must be >= 2"))
    try:
        samples = json.loads(Path(samples_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        sys.exit(_usage_error(str(exc)))
    needs_agents = any(
        is_image_path(s.get("gen", "")) or is_image_path(s.get("gt", "")) for s in samples
    )
    handles = _make_handles(cfg, ctx.obj["mock_path"]) if needs_agents else None
    report = stability_report(samples, repeats, cfg, handles)
    report["tool_version"] = __version__
    if out:
        write_json_atomic(out, report)
    worst = max(
        (
            m["range"]
            for row in report["samples"]
            for m in row["metrics"].values()
            if m["range"] is not None
        ),
        default=0.0,
    )
    click.echo(f"samples={len(report['samples'])} repeats={repeats} worst_range={worst}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
