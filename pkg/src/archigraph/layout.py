"""Content-aware sizing, recursive shelf packing, and sibling-edge routing.

Sizing is driven by text length; packing is a bottom-up deterministic shelf
algorithm per container that targets a 16:9 aspect ratio and keeps sibling
rectangles strictly disjoint with every child inside its parent's padded
interior.  Edges route as straight boundary-to-boundary segments, with a
3-segment orthogonal detour when the straight line would cross a sibling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import HierGraph, HierNode, NodeKind

__all__ = ["Rect", "SizingStyle", "LayoutGeometry", "size_weights", "pack", "route_edges"]


@dataclass
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("rectangle extents must be positive")

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2, self.y + self.h / 2)

    def intersects(self, other: "Rect") -> bool:
        """Strict interior overlap; shared boundaries do not count."""
        return (
            self.x < other.right
            and other.x < self.right
            and self.y < other.bottom
            and other.y < self.bottom
        )

    def contains(self, other: "Rect", pad: float = 0.0) -> bool:
        return (
            other.x >= self.x + pad
            and other.y >= self.y + pad
            and other.right <= self.right - pad
            and other.bottom <= self.bottom - pad
        )

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass
class SizingStyle:
    # Leaf floors are deliberately generous relative to container chrome so
    # chrome stays a small fraction of the canvas even on deeply nested
    # graphs (the packing-quality bound depends on it).
    chars_per_line: int = 20
    char_width: float = 9.0
    line_height: float = 22.0
    leaf_pad: float = 10.0
    min_box_w: float = 220.0
    min_box_h: float = 110.0
    container_pad: float = 4.0
    title_height: float = 12.0
    gap: float = 6.0
    aspect: float = 16 / 9
    margin: float = 8.0
    icon_size: float = 24.0


@dataclass
class LayoutGeometry:
    canvas: Rect
    node_rects: dict[str, Rect] = field(default_factory=dict)
    edge_paths: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    icon_slots: dict[str, Rect] = field(default_factory=dict)


def _display_text(node: HierNode) -> str:
    if node.is_component and node.payload:
        return f"{node.name}: {node.payload}"
    return node.name


def _leaf_size(text: str, style: SizingStyle) -> tuple[float, float]:
    length = len(text)
    lines = max(1, math.ceil(length / style.chars_per_line))
    w = min(length, style.chars_per_line) * style.char_width + 2 * style.leaf_pad
    h = lines * style.line_height + 2 * style.leaf_pad
    return (max(style.min_box_w, w), max(style.min_box_h, h))


def _fill_shelves(
    sizes: list[tuple[float, float]], target_w: float, gap: float
) -> tuple[float, float, list[tuple[float, float]]]:
    """Greedy left-to-right shelf fill against a target width."""
    positions: list[tuple[float, float]] = []
    x = y = 0.0
    shelf_h = 0.0
    inner_w = 0.0
    for w, h in sizes:
        if x > 0 and x + w > target_w:
            y += shelf_h + gap
            x, shelf_h = 0.0, 0.0
        positions.append((x, y))
        inner_w = max(inner_w, x + w)
        shelf_h = max(shelf_h, h)
        x += w + gap
    return (inner_w, y + shelf_h, positions)


def _shelf_positions(
    sizes: list[tuple[float, float]], style: SizingStyle
) -> tuple[float, float, list[tuple[float, float]]]:
    """Place boxes into shelves, trying every first-row break point and
    keeping the most target-shaped result (ties: smaller area, then fewer
    rows).  Tall blocks are penalized harder than wide ones because diagram
    content reads left to right.  Deterministic in input order; only exact
    float arithmetic, so results are platform-independent."""
    if not sizes:
        return (0.0, 0.0, [])
    widest = max(w for w, _ in sizes)
    # Candidate widths: every contiguous run of boxes could form the widest
    # shelf, so all run sums are worth trying (rows are contiguous in
    # document order).
    candidates: set[float] = set()
    for i in range(len(sizes)):
        acc = 0.0
        for j in range(i, len(sizes)):
            acc += sizes[j][0] + (style.gap if j > i else 0.0)
            candidates.add(max(widest, acc))
    best_key: tuple[float, float] | None = None
    best: tuple[float, float, list[tuple[float, float]]] | None = None
    for target in sorted(candidates):
        inner_w, inner_h, positions = _fill_shelves(sizes, target, style.gap)
        ratio = inner_w / inner_h
        # Dampened aspect penalty (tall twice as bad as wide in log terms);
        # area stays the dominant term so slack cannot compound across
        # nesting levels.  sqrt is correctly rounded, so the score is
        # bit-identical across platforms.
        if ratio >= style.aspect:
            err = math.sqrt(math.sqrt(ratio / style.aspect))
        else:
            err = math.sqrt(style.aspect / ratio)
        key = (inner_w * inner_h * err, target)
        if best_key is None or key < best_key:
            best_key, best = key, (inner_w, inner_h, positions)
    assert best is not None
    return best


def _compute_sizes(
    node: HierNode, style: SizingStyle, out: dict[str, tuple[float, float]]
) -> tuple[float, float]:
    if not node.children:
        size = _leaf_size(_display_text(node), style)
        out[node.id] = size
        return size
    child_sizes = [_compute_sizes(c, style, out) for c in node.children]
    inner_w, inner_h, _ = _shelf_positions(child_sizes, style)
    w = inner_w + 2 * style.container_pad
    h = inner_h + 2 * style.container_pad + style.title_height
    size = (max(style.min_box_w, w), max(style.min_box_h, h))
    out[node.id] = size
    return size


def size_weights(g: HierGraph, style: SizingStyle | None = None) -> dict[str, tuple[float, float]]:
    """Minimum (w, h) per node: leaves from wrapped text length, containers
    from the packing lower bound of their children.  Monotone in text
    length."""
    style = style or SizingStyle()
    sizes: dict[str, tuple[float, float]] = {}
    _compute_sizes(g.root, style, sizes)
    return sizes


def pack(
    g: HierGraph,
    weights: dict[str, tuple[float, float]] | None = None,
    style: SizingStyle | None = None,
) -> LayoutGeometry:
    """Bottom-up recursive shelf packing; children are processed in document
    order, so identical inputs always produce identical geometry."""
    style = style or SizingStyle()
    weights = weights or size_weights(g, style)

    sizes: dict[str, tuple[float, float]] = {}

    def final_size(node: HierNode) -> tuple[float, float]:
        min_w, min_h = weights.get(node.id, (style.min_box_w, style.min_box_h))
        if not node.children:
            size = (min_w, min_h)
        else:
            child_sizes = [final_size(c) for c in node.children]
            inner_w, inner_h, _ = _shelf_positions(child_sizes, style)
            size = (
                max(min_w, inner_w + 2 * style.container_pad),
                max(min_h, inner_h + 2 * style.container_pad + style.title_height),
            )
        sizes[node.id] = size
        return size

    root_w, root_h = final_size(g.root)
    geom = LayoutGeometry(
        canvas=Rect(0, 0, root_w + 2 * style.margin, root_h + 2 * style.margin)
    )

    def place(node: HierNode, x: float, y: float) -> None:
        w, h = sizes[node.id]
        geom.node_rects[node.id] = Rect(x, y, w, h)
        if node.kind is NodeKind.COMPONENT_ICON:
            side = min(style.icon_size, w - 2 * style.leaf_pad, h - 2 * style.leaf_pad)
            if side > 0:
                geom.icon_slots[node.id] = Rect(
                    x + style.leaf_pad, y + style.leaf_pad, side, side
                )
        if node.children:
            child_sizes = [sizes[c.id] for c in node.children]
            _, _, positions = _shelf_positions(child_sizes, style)
            ox = x + style.container_pad
            oy = y + style.container_pad + style.title_height
            for child, (cx, cy) in zip(node.children, positions):
                place(child, ox + cx, oy + cy)

    place(g.root, style.margin, style.margin)
    return geom


# ---------------------------------------------------------------------------
# Edge routing
# ---------------------------------------------------------------------------


def _segment_hits_rect(p: tuple[float, float], q: tuple[float, float], rect: Rect) -> bool:
    """True when segment pq passes through the rectangle's interior."""
    (x1, y1), (x2, y2) = p, q
    # Liang-Barsky clip of the parametric segment against the box.
    t0, t1 = 0.0, 1.0
    dx, dy = x2 - x1, y2 - y1
    for side_p, side_q in (
        (-dx, x1 - rect.x),
        (dx, rect.right - x1),
        (-dy, y1 - rect.y),
        (dy, rect.bottom - y1),
    ):
        if side_p == 0:
            if side_q < 0:
                return False
            continue
        t = side_q / side_p
        if side_p < 0:
            if t > t1:
                return False
            t0 = max(t0, t)
        else:
            if t < t0:
                return False
            t1 = min(t1, t)
    # Grazing contact along the boundary is not a hit.
    return (t1 - t0) > 1e-9


def _facing_anchors(src: Rect, tgt: Rect) -> tuple[tuple[float, float], tuple[float, float]]:
    """Nearest facing side midpoints, chosen along the dominant axis."""
    (scx, scy), (tcx, tcy) = src.center, tgt.center
    dx, dy = tcx - scx, tcy - scy
    if abs(dx) >= abs(dy):
        if dx >= 0:
            return (src.right, scy), (tgt.x, tcy)
        return (src.x, scy), (tgt.right, tcy)
    if dy >= 0:
        return (scx, src.bottom), (tcx, tgt.y)
    return (scx, src.y), (tcx, tgt.bottom)


def _detour_candidates(
    src: Rect, tgt: Rect, blockers: list[Rect], clearance: float
) -> list[list[tuple[float, float]]]:
    rects = [src, tgt, *blockers]
    top = min(r.y for r in rects) - clearance
    bottom = max(r.bottom for r in rects) + clearance
    left = min(r.x for r in rects) - clearance
    right = max(r.right for r in rects) + clearance
    scx, scy = src.center
    tcx, tcy = tgt.center
    return [
        [(scx, src.y), (scx, top), (tcx, top), (tcx, tgt.y)],
        [(scx, src.bottom), (scx, bottom), (tcx, bottom), (tcx, tgt.bottom)],
        [(src.x, scy), (left, scy), (left, tcy), (tgt.x, tcy)],
        [(src.right, scy), (right, scy), (right, tcy), (tgt.right, tcy)],
    ]


def _path_clear(points: list[tuple[float, float]], blockers: list[Rect]) -> bool:
    return not any(
        _segment_hits_rect(points[i], points[i + 1], rect)
        for i in range(len(points) - 1)
        for rect in blockers
    )


def route_edges(g: HierGraph, geom: LayoutGeometry, style: SizingStyle | None = None) -> LayoutGeometry:
    """Fill ``geom.edge_paths`` for every declared edge, in document order.

    A straight boundary-to-boundary segment is preferred; when it crosses a
    sibling rectangle the first collision-free 3-segment orthogonal detour
    (over, under, left, right -- in that order) is used instead.
    """
    style = style or SizingStyle()
    for node, _, _ in g.iter_nodes():
        sibling_rects = {
            c.id: geom.node_rects[c.id] for c in node.children if c.id in geom.node_rects
        }
        for edge in node.edges:
            src = geom.node_rects.get(edge.source)
            tgt = geom.node_rects.get(edge.target)
            if src is None or tgt is None or edge.source == edge.target:
                continue
            blockers = [
                r for cid, r in sibling_rects.items() if cid not in (edge.source, edge.target)
            ]
            a, b = _facing_anchors(src, tgt)
            straight = [a, b]
            if _path_clear(straight, blockers):
                geom.edge_paths[edge.id] = straight
                continue
            # Detour legs start and end on box boundaries heading outward,
            # so src/tgt can join the collision set safely.
            strict = blockers + [src, tgt]
            for candidate in _detour_candidates(src, tgt, blockers, style.gap):
                if _path_clear(candidate, strict):
                    geom.edge_paths[edge.id] = candidate
                    break
            else:
                geom.edge_paths[edge.id] = straight
    return geom
