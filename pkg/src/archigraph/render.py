"""SVG emission and the layout-JSON export contract.

Both outputs are deterministic byte-for-byte for identical inputs: floats
are formatted with two decimals, attributes appear in fixed order, and
newlines are LF.
"""

from __future__ import annotations

import json
import math
from xml.sax.saxutils import escape, quoteattr

from .graph import HierGraph, HierNode, NodeKind
from .layout import LayoutGeometry, Rect, SizingStyle

__all__ = ["emit_svg", "export_layout_json", "wrap_text"]

LAYOUT_SCHEMA_VERSION = 1
DEFAULT_UNITS_PER_INCH = 96.0

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".gif", ".svg", ".webp")

_FILL_BY_KIND = {
    NodeKind.MODULE: "#eef2f8",
    NodeKind.TOOL: "#f9f4e8",
    NodeKind.COMPONENT_TEXT: "#ffffff",
    NodeKind.COMPONENT_ICON: "#ffffff",
    NodeKind.COMPONENT_IMAGE: "#ffffff",
}
_STROKE = "#51607a"
_TEXT_COLOR = "#1f2a40"


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def wrap_text(text: str, chars_per_line: int) -> list[str]:
    """Greedy word wrap; words longer than a line are hard-split."""
    lines: list[str] = []
    current = ""
    for word in text.split():
        while len(word) > chars_per_line:
            if current:
                lines.append(current)
                current = ""
            lines.append(word[:chars_per_line])
            word = word[chars_per_line:]
        if not current:
            current = word
        elif len(current) + 1 + len(word) <= chars_per_line:
            current = f"{current} {word}"
        else:
            lines.append(current)
            current = word
    if current:
        lines.append(current)
    return lines or [""]


def _looks_like_image_path(payload: str | None) -> bool:
    return bool(payload) and payload.lower().endswith(IMAGE_SUFFIXES)


def _glyph_for(node: HierNode) -> str:
    for ch in node.name:
        if ch.isalnum():
            return ch.upper()
    return "?"


def _node_svg(node: HierNode, rect: Rect, geom: LayoutGeometry, style: SizingStyle) -> list[str]:
    parts = [f"<g id={quoteattr('node-' + node.id)}>"]
    fill = _FILL_BY_KIND[node.kind]
    parts.append(
        f'<rect x="{_fmt(rect.x)}" y="{_fmt(rect.y)}" width="{_fmt(rect.w)}" '
        f'height="{_fmt(rect.h)}" rx="6" fill="{fill}" stroke="{_STROKE}" stroke-width="1"/>'
    )
    if node.children:
        # Container: name in the title band.
        tx = rect.x + style.container_pad + 2
        ty = rect.y + style.title_height
        parts.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(ty)}" font-family="sans-serif" '
            f'font-size="12" font-weight="bold" fill="{_TEXT_COLOR}">'
            f"{escape(node.name)}</text>"
        )
    else:
        slot = geom.icon_slots.get(node.id)
        text = node.name
        if node.is_component and node.payload:
            text = f"{node.name}: {node.payload}"
        text_x = rect.x + style.leaf_pad
        text_y = rect.y + style.leaf_pad + style.line_height * 0.7
        if node.kind is NodeKind.COMPONENT_IMAGE and _looks_like_image_path(node.payload):
            parts.append(
                f'<image x="{_fmt(rect.x + style.leaf_pad)}" y="{_fmt(rect.y + style.leaf_pad)}" '
                f'width="{_fmt(rect.w - 2 * style.leaf_pad)}" '
                f'height="{_fmt(rect.h - 2 * style.leaf_pad)}" '
                f"href={quoteattr(node.payload)}/>"
            )
            text = node.name
        elif node.kind is NodeKind.COMPONENT_ICON:
            if _looks_like_image_path(node.payload) and slot is not None:
                parts.append(
                    f'<image x="{_fmt(slot.x)}" y="{_fmt(slot.y)}" width="{_fmt(slot.w)}" '
                    f'height="{_fmt(slot.h)}" href={quoteattr(node.payload)}/>'
                )
            elif slot is not None:
                # Placeholder glyph: initial letter in a circle.
                cx, cy = slot.center
                r = slot.w / 2
                parts.append(
                    f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" '
                    f'fill="#d7e0ee" stroke="{_STROKE}" stroke-width="1"/>'
                )
                parts.append(
                    f'<text x="{_fmt(cx)}" y="{_fmt(cy + 4)}" font-family="sans-serif" '
                    f'font-size="12" text-anchor="middle" fill="{_TEXT_COLOR}">'
                    f"{escape(_glyph_for(node))}</text>"
                )
            if slot is not None:
                text_x = slot.right + style.leaf_pad / 2
            text = node.name
        lines = wrap_text(text, style.chars_per_line)
        spans = "".join(
            f'<tspan x="{_fmt(text_x)}" dy="{_fmt(0 if i == 0 else style.line_height)}">'
            f"{escape(line)}</tspan>"
            for i, line in enumerate(lines)
        )
        parts.append(
            f'<text x="{_fmt(text_x)}" y="{_fmt(text_y)}" font-family="sans-serif" '
            f'font-size="11" fill="{_TEXT_COLOR}">{spans}</text>'
        )
    parts.append("</g>")
    return parts


def emit_svg(g: HierGraph, geom: LayoutGeometry, style: SizingStyle | None = None) -> str:
    """Render routed geometry to an SVG 1.1 document (one group per node,
    one marker-terminated path per edge)."""
    style = style or SizingStyle()
    canvas = geom.canvas
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(canvas.w)}" height="{_fmt(canvas.h)}" '
        f'viewBox="0 0 {_fmt(canvas.w)} {_fmt(canvas.h)}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
        f'<path d="M 0 0 L 10 5 L 0 10 z" fill="{_STROKE}"/></marker>',
        "</defs>",
        f'<rect x="0" y="0" width="{_fmt(canvas.w)}" height="{_fmt(canvas.h)}" fill="#ffffff"/>',
    ]

    for node, _, _ in g.iter_nodes():
        rect = geom.node_rects.get(node.id)
        if rect is not None:
            out.extend(_node_svg(node, rect, geom, style))

    for node, _, _ in g.iter_nodes():
        for edge in node.edges:
            points = geom.edge_paths.get(edge.id)
            if not points:
                continue
            d = "M " + " L ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in points)
            out.append(
                f'<path id={quoteattr("edge-" + edge.id)} d="{d}" fill="none" '
                f'stroke="{_STROKE}" stroke-width="1.5" marker-end="url(#arrow)"/>'
            )
            if edge.name:
                mx, my = _path_midpoint(points)
                out.append(
                    f'<text x="{_fmt(mx)}" y="{_fmt(my - 4)}" font-family="sans-serif" '
                    f'font-size="10" text-anchor="middle" fill="{_TEXT_COLOR}">'
                    f"{escape(edge.name)}</text>"
                )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _path_midpoint(points: list[tuple[float, float]]) -> tuple[float, float]:
    """Point halfway along the polyline by arc length."""
    lengths = [
        math.dist(points[i], points[i + 1]) for i in range(len(points) - 1)
    ]
    total = sum(lengths)
    if total == 0:
        return points[0]
    half = total / 2
    for (p, q), seg in zip(zip(points, points[1:]), lengths):
        if half <= seg:
            t = half / seg if seg else 0.0
            return (p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)
        half -= seg
    return points[-1]


def export_layout_json(
    g: HierGraph,
    geom: LayoutGeometry,
    units_per_inch: float = DEFAULT_UNITS_PER_INCH,
) -> str:
    """Serialize routed geometry to the versioned layout-JSON contract that
    the slide exporter consumes (schema shipped in ``schemas/``)."""
    parents = g.parent_map()
    nodes = []
    for node, _, _ in g.iter_nodes():
        rect = geom.node_rects.get(node.id)
        if rect is None:
            continue
        icon = None
        if node.kind is NodeKind.COMPONENT_ICON:
            if _looks_like_image_path(node.payload):
                icon = {"type": "image", "path": node.payload}
            else:
                icon = {"type": "placeholder", "glyph": _glyph_for(node)}
        elif node.kind is NodeKind.COMPONENT_IMAGE and _looks_like_image_path(node.payload):
            icon = {"type": "image", "path": node.payload}
        nodes.append(
            {
                "id": node.id,
                "kind": node.kind.value,
                "name": node.name,
                "text": node.payload or "",
                "rect": rect.to_json(),
                "parent": parents[node.id],
                "icon": icon,
            }
        )
    edges = []
    for node, _, _ in g.iter_nodes():
        for edge in node.edges:
            points = geom.edge_paths.get(edge.id)
            if not points:
                continue
            edges.append(
                {
                    "id": edge.id,
                    "name": edge.name,
                    "points": [{"x": x, "y": y} for x, y in points],
                    "source": edge.source,
                    "target": edge.target,
                }
            )
    doc = {
        "version": LAYOUT_SCHEMA_VERSION,
        "units_per_inch": units_per_inch,
        "canvas": {"w": geom.canvas.w, "h": geom.canvas.h},
        "nodes": nodes,
        "edges": edges,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
