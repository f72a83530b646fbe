"""Regenerate the canned agent-response fixtures and golden outputs.

Run from the repository root:

    python3 tests/fixtures/build_fixtures.py

The digest-keyed mock files produced here drive the CLI ``--mock`` flag in
tests; the golden graph/layout/SVG files freeze the end-to-end pipeline
output.  Regenerating is only needed when prompts, the pipeline, or the
renderer change intentionally.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

FIXTURES = Path(__file__).parent
sys.path.insert(0, str(FIXTURES.parent))  # tests/ for util

from util import RuleTransport  # noqa: E402

from archigraph.agents import AgentHandle, AgentRole  # noqa: E402
from archigraph.config import RunConfig  # noqa: E402
from archigraph.evaluate import score_sample  # noqa: E402
from archigraph.graph import parse_hier  # noqa: E402
from archigraph.layout import SizingStyle, pack, route_edges, size_weights  # noqa: E402
from archigraph.pipeline import generate  # noqa: E402
from archigraph.render import emit_svg, export_layout_json  # noqa: E402

PAPER_TEXT = """FlowSys: structured diagrams from documents

Abstract
FlowSys converts long technical documents into layered flow diagrams. It
splits the work into ingestion, planning, and rendering stages connected by
typed token streams.

3 Method
The ingest stage tokenizes documents and extracts entities. The planner
assembles entities into a layered plan. The renderer turns plans into
editable diagrams. A shared vocabulary keeps module interfaces aligned.
"""

SUMMARY_REPLY = json.dumps(
    {
        "system_name": "FlowSys",
        "task_goal": "convert technical documents into layered flow diagrams",
        "modules_and_responsibilities": (
            "ingest tokenizes documents; planner assembles layered plans; "
            "renderer produces editable diagrams"
        ),
        "data_flow": "document to tokens to plan to diagram",
        "core_algorithms": "entity extraction, layer assignment, box rendering",
        "constraints": "single pass over the document; bounded vocabulary",
    }
)

TOP_REPLY = json.dumps(
    {
        "type": "module",
        "id": "root",
        "name": "FlowSys",
        "children": [
            {"type": "module", "id": "m_ingest", "name": "Ingest Stage", "children": [], "edges": []},
            {"type": "module", "id": "m_plan", "name": "Planning Stage", "children": [], "edges": []},
            {"type": "module", "id": "m_render", "name": "Rendering Stage", "children": [], "edges": []},
        ],
        "edges": [
            {"sources": ["m_ingest"], "targets": ["m_plan"], "id": "e_t1", "name": "token stream"},
            {"sources": ["m_plan"], "targets": ["m_render"], "id": "e_t2", "name": "layered plan"},
        ],
    }
)

# Both the ingest and plan drafts use the id "shared_buf": the refinement
# dedup must rename the second one. The ingest draft also wires an illegal
# cross-module edge to the renderer's canvas tool, which the reroute agent
# lifts to module level.
INGEST_DRAFT = json.dumps(
    {
        "type": "module",
        "id": "m_ingest",
        "name": "Ingest Stage",
        "children": [
            {
                "type": "tool",
                "id": "t_tok",
                "name": "Tokenizer",
                "children": [
                    {"type": "component-text", "id": "c_tok", "name": "method", "children": "byte pair scan"},
                    {"type": "component-icon", "id": "i_tok", "name": "token icon", "children": "a stream of squares"},
                ],
                "edges": [],
            },
            {"type": "tool", "id": "shared_buf", "name": "Token Buffer", "children": [], "edges": []},
        ],
        "edges": [
            {"sources": ["t_tok"], "targets": ["shared_buf"], "id": "e_i1", "name": "tokens"},
            {"sources": ["t_tok"], "targets": ["t_canvas"], "id": "e_bad", "name": "shortcut"},
        ],
    }
)

PLAN_DRAFT = json.dumps(
    {
        "type": "module",
        "id": "m_plan",
        "name": "Planning Stage",
        "children": [
            {
                "type": "tool",
                "id": "t_layer",
                "name": "Layer Assigner",
                "children": [
                    {"type": "component-text", "id": "c_layer", "name": "rule", "children": "longest path layering"}
                ],
                "edges": [],
            },
            {"type": "tool", "id": "shared_buf", "name": "Plan Buffer", "children": [], "edges": []},
        ],
        "edges": [
            {"sources": ["t_layer"], "targets": ["shared_buf"], "id": "e_p1", "name": "plan rows"}
        ],
    }
)

RENDER_DRAFT = json.dumps(
    {
        "type": "module",
        "id": "m_render",
        "name": "Rendering Stage",
        "children": [
            {
                "type": "tool",
                "id": "t_canvas",
                "name": "Canvas Writer",
                "children": [
                    {"type": "component-icon", "id": "i_canvas", "name": "canvas icon", "children": "a framed easel"}
                ],
                "edges": [],
            }
        ],
        "edges": [],
    }
)

REROUTE_REPLY = json.dumps(
    {"reroute_suggestions": [{"edge_id": "e_bad", "source": "m_ingest", "target": "m_render"}]}
)

GEN_RULES = [
    (("Paper Text:", "FlowSys"), SUMMARY_REPLY),
    (("Design only the top-level",), TOP_REPLY),
    (("Target Module: m_ingest",), INGEST_DRAFT),
    (("Target Module: m_plan",), PLAN_DRAFT),
    (("Target Module: m_render",), RENDER_DRAFT),
    (("Review the connections",), REROUTE_REPLY),
]

EXTRACTED_GRAPH = {
    "graph": {
        "nodes": [
            {"id": "r", "name": "FlowSys", "children": ["a", "b"]},
            {"id": "a", "name": "Ingest Stage", "children": []},
            {"id": "b", "name": "Rendering Stage", "children": []},
        ],
        "edges": [{"id": "e1", "source": "a", "target": "b", "name": "tokens"}],
    },
    "explain": "two visible stages",
}

SCORE_RULES = [
    (("extract the graph structure",), "```json\n" + json.dumps(EXTRACTED_GRAPH) + "\n```"),
    (
        ("layout anomalies",),
        json.dumps(
            {
                "layout_issues": [
                    {"type": "line_crossing", "count": 2, "details": ["d1", "d2"]},
                    {"type": "image_overlap", "count": 1, "details": ["d3"]},
                    {"type": "text_overflow", "count": 1, "details": ["d4"]},
                ]
            }
        ),
    ),
    (("inspect the icons",), json.dumps({"r": "", "a": "a paper funnel", "b": "a framed easel"})),
    (
        ("operating principles",),
        json.dumps({"system_understanding": "tokens flow from ingest into rendering"}),
    ),
    (
        ("blurriness, incompleteness",),
        json.dumps({"text_legibility_issues": [{"type": "Blurry", "count": 1, "details": ["d5"]}]}),
    ),
]

PNG_BYTES = {
    "fig1": b"\x89PNG\r\n\x1a\nfixture-fig1",
    "fig2": b"\x89PNG\r\n\x1a\nfixture-fig2",
    "fig3": b"\x89PNG\r\n\x1a\nfixture-fig3",
}

FILTER_RULES = [
    (("judge the attached figure", "paper one", "pipeline overview"), '{"confidence": 0.9}'),
    (("judge the attached figure", "paper one", "ablation bars"), '{"confidence": 0.8}'),
    (("judge the attached figure", "paper one", "sample outputs"), '{"confidence": 0.4}'),
]


def build_generation_fixture() -> None:
    transport = RuleTransport(GEN_RULES)
    handles = {
        role: AgentHandle(role=role, transport=transport, retry_delay=0.001)
        for role in (AgentRole.ANALYST, AgentRole.ARCHITECT, AgentRole.DESIGNER)
    }
    with tempfile.TemporaryDirectory() as tmp:
        artifacts = generate(PAPER_TEXT, handles, Path(tmp) / "run")
        assert artifacts.status == "ok", artifacts.error
        final_text = (Path(tmp) / "run" / "05_final.graph.json").read_text(encoding="utf-8")

    (FIXTURES / "e2e_paper.txt").write_text(PAPER_TEXT, encoding="utf-8")
    (FIXTURES / "e2e_mock.json").write_text(
        json.dumps(transport.recorded, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    golden = FIXTURES / "golden"
    golden.mkdir(exist_ok=True)
    (golden / "05_final.graph.json").write_text(final_text, encoding="utf-8")

    graph = parse_hier(final_text)
    style = SizingStyle()
    geom = route_edges(graph, pack(graph, size_weights(graph, style), style), style)
    (golden / "layout.json").write_text(
        export_layout_json(graph, geom, RunConfig().units_per_inch), encoding="utf-8"
    )
    (golden / "diagram.svg").write_text(emit_svg(graph, geom, style), encoding="utf-8")


def build_score_fixture() -> None:
    transport = RuleTransport(SCORE_RULES)
    handles = {
        role: AgentHandle(role=role, transport=transport, retry_delay=0.001)
        for role in AgentRole
    }
    case = FIXTURES / "score_case"
    case.mkdir(exist_ok=True)
    (case / "gen.png").write_bytes(PNG_BYTES["fig1"])
    (case / "gt.json").write_text(json.dumps(EXTRACTED_GRAPH), encoding="utf-8")
    report = score_sample(
        case / "gen.png", case / "gt.json", RunConfig(), handles, sample_id="case", desc="FlowSys"
    )
    assert not report.partial
    (FIXTURES / "score_mock.json").write_text(
        json.dumps(transport.recorded, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (FIXTURES / "golden" / "score_report.json").write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def build_filter_fixture() -> None:
    from archigraph.agents import filter_candidate_images

    transport = RuleTransport(FILTER_RULES)
    handle = AgentHandle(role=AgentRole.IMAGE_FILTER, transport=transport, retry_delay=0.001)
    candidates = FIXTURES / "filter_candidates"
    if candidates.exists():
        shutil.rmtree(candidates)
    paper1 = candidates / "paper1"
    paper1.mkdir(parents=True)
    (paper1 / "abstract.txt").write_text("paper one abstract text", encoding="utf-8")
    captions = {"fig1": "pipeline overview", "fig2": "ablation bars", "fig3": "sample outputs"}
    for name, blob in PNG_BYTES.items():
        (paper1 / f"{name}.png").write_bytes(blob)
        (paper1 / f"{name}.txt").write_text(captions[name], encoding="utf-8")
    paper2 = candidates / "paper2"
    paper2.mkdir()
    (paper2 / "abstract.txt").write_text("paper two abstract text", encoding="utf-8")
    (paper2 / "fig1.png").write_bytes(b"\x89PNG\r\n\x1a\nfixture-p2")

    # Drive the same code path the CLI uses so recorded digests line up.
    from archigraph.evaluate import collect_candidates

    abstract, images = collect_candidates(paper1)
    filter_candidate_images(abstract, images, handle)
    (FIXTURES / "filter_mock.json").write_text(
        json.dumps(transport.recorded, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


if __name__ == "__main__":
    build_generation_fixture()
    build_score_fixture()
    build_filter_fixture()
    print("fixtures written to", FIXTURES)
