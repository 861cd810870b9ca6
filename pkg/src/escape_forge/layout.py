"""Deterministic 2D side-view layout synthesis, linting and SVG emission.

Coordinates are normalized to the unit square with the origin at the
bottom-left and y pointing up (side view). Every non-room node becomes
one labeled icon box. Placement is constraint-driven:

  * contains / contains_locked / embedded_in: child strictly inside;
  * supports / leans_on: child bottom edge on the parent's top edge
    (on the floor line when the parent is the room);
  * attached_to: touching the parent (side or underside); room-mounted
    fixtures sit in a wall band, which the side view cannot distinguish
    from the back wall;
  * hangs_from: child below the parent anchor; hanging from the room
    means hanging from the ceiling line;
  * adjacent_to: disjoint neighbor, on the floor beneath an overhead
    parent;
  * unreachable_high objects live in the top third, the exit touches a
    room edge.

Residual freedom is resolved by seeded jitter and left-to-right packing,
so (graph, seed) -> layout is a pure function.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .errors import DigestMismatch, OverconstrainedLayout
from .scene import ObjectNode, SceneGraph, graph_digest, tokens_of, validate

EPS = 1e-6
HIGH_BAND = 2.0 / 3.0

# Icon footprints (width, height) by name token; first match wins.
_SIZES = (
    ("seesaw", (0.30, 0.10)),
    ("pool", (0.30, 0.08)),
    ("bed", (0.24, 0.10)),
    ("chalkboard", (0.20, 0.14)),
    ("workbench", (0.20, 0.12)),
    ("table", (0.20, 0.12)),
    ("desk", (0.18, 0.12)),
    ("bench", (0.20, 0.12)),
    ("wall", (0.12, 0.48)),
    ("ladder", (0.10, 0.34)),
    ("door", (0.12, 0.30)),
    ("trapdoor", (0.16, 0.06)),
    ("locker", (0.14, 0.24)),
    ("cabinet", (0.14, 0.20)),
    ("cage", (0.14, 0.14)),
    ("dome", (0.14, 0.12)),
    ("shelf", (0.16, 0.05)),
    ("window", (0.12, 0.16)),
    ("lifebuoy", (0.10, 0.10)),
    ("balloon", (0.08, 0.10)),
    ("pole", (0.05, 0.22)),
    ("net", (0.06, 0.24)),
    ("crowbar", (0.05, 0.18)),
    ("bomb", (0.08, 0.10)),
    ("candle", (0.05, 0.10)),
    ("bottle", (0.04, 0.08)),
    ("sign", (0.10, 0.08)),
    ("dartboard", (0.10, 0.10)),
    ("plate", (0.10, 0.04)),
    ("blanket", (0.10, 0.06)),
    ("bucket", (0.08, 0.08)),
    ("faucet", (0.06, 0.06)),
    ("lamp", (0.08, 0.08)),
    ("padlock", (0.04, 0.05)),
    ("lock", (0.04, 0.05)),
    ("key", (0.05, 0.04)),
    ("handle", (0.04, 0.04)),
    ("water", (0.04, 0.03)),
)
_DEFAULT_SIZE = (0.08, 0.08)
_MIN_WIDTH = 0.02


@dataclass(frozen=True)
class IconPlacement:
    object_id: str
    bbox: tuple[float, float, float, float]  # x0, y0, x1, y1
    label: str
    condition_text: str

    @property
    def width(self) -> float:
        return self.bbox[2] - self.bbox[0]

    @property
    def height(self) -> float:
        return self.bbox[3] - self.bbox[1]


@dataclass(frozen=True)
class Layout:
    icons: tuple[IconPlacement, ...]
    room_bbox: tuple[float, float, float, float]
    source_graph_digest: str

    def icon(self, object_id: str) -> IconPlacement | None:
        for icon in self.icons:
            if icon.object_id == object_id:
                return icon
        return None


@dataclass(frozen=True)
class LayoutViolation:
    rule: str
    object_id: str
    message: str

    def __str__(self):
        return f"{self.rule}({self.object_id}): {self.message}"


def _size_for(node: ObjectNode) -> tuple[float, float]:
    toks = tokens_of(node)
    for token, size in _SIZES:
        if token in toks:
            return size
    return _DEFAULT_SIZE


def _condition_text(node: ObjectNode) -> str:
    parts = [s for s in sorted(node.states)]
    if node.cue:
        parts.append(node.cue)
    return ", ".join(parts)


def _round(value: float) -> float:
    return round(value, 6)


def synthesize_layout(graph: SceneGraph, seed: int = 0) -> Layout:
    """Place one icon per non-room node; pure function of (graph, seed)."""
    problems = validate(graph)
    if problems:
        raise ValueError(f"graph invalid: {problems[0]}")
    rng = random.Random(f"{graph_digest(graph)}:{seed}")
    boxes: dict[str, tuple[float, float, float, float]] = {}
    nodes = graph.nodes()
    parent_of = {c.id: p.id for p in graph.root.walk() for c in p.children}

    root_kids = sorted(graph.root.children, key=lambda n: n.id)
    floor, wall, top = [], [], []
    for child in root_kids:
        if "unreachable_high" in child.states or child.relation == "hangs_from":
            top.append(child)
        elif child.relation == "attached_to":
            wall.append(child)
        else:
            floor.append(child)

    def pack_band(items: list[ObjectNode], y_for, exit_first: bool) -> None:
        if not items:
            return
        ordered = sorted(items, key=lambda n: (n.id != graph.exit_id, n.id) if exit_first else (False, n.id))
        widths = [_size_for(n)[0] for n in ordered]
        gaps = [0.03 + rng.uniform(0.0, 0.02) for _ in ordered]
        total = sum(widths) + sum(gaps[1:])
        scale = min(1.0, 0.96 / total) if total > 0.96 else 1.0
        x = 0.02 * scale
        if exit_first and ordered and ordered[0].id == graph.exit_id:
            x = 0.0
        for i, node in enumerate(ordered):
            w, h = _size_for(node)
            w *= scale
            if i > 0:
                x += gaps[i] * scale
            y0 = y_for(node, h)
            boxes[node.id] = (_round(x), _round(y0), _round(x + w), _round(y0 + h))
            x += w

    def floor_y(node, h):
        return 0.0

    def wall_y(node, h):
        return 0.42

    def top_y(node, h):
        if node.relation == "hangs_from":
            return 0.95 - h  # top edge at the ceiling line band
        return max(HIGH_BAND + 0.02, 0.95 - h)

    pack_band(floor, floor_y, exit_first=True)
    pack_band(wall, wall_y, exit_first=False)
    pack_band(top, top_y, exit_first=False)

    # The exit must touch a room edge; wall-type exits snap to the right.
    if graph.exit_id in boxes:
        x0, y0, x1, y1 = boxes[graph.exit_id]
        exit_node = nodes[graph.exit_id]
        if "wall" in tokens_of(exit_node):
            boxes[graph.exit_id] = (_round(1.0 - (x1 - x0)), y0, 1.0, y1)
        elif x0 > EPS and y0 > EPS:
            boxes[graph.exit_id] = (0.0, y0, _round(x1 - x0), y1)

    def place_children(parent: ObjectNode) -> None:
        if parent.id not in boxes and parent is not graph.root:
            return
        kids = sorted(parent.children, key=lambda n: n.id)
        inside = [c for c in kids if c.relation in ("contains", "contains_locked", "embedded_in")]
        on_top = [c for c in kids if c.relation in ("supports", "leans_on")]
        attached = [c for c in kids if c.relation == "attached_to"]
        hanging = [c for c in kids if c.relation == "hangs_from"]
        beside = [c for c in kids if c.relation == "adjacent_to"]
        px0, py0, px1, py1 = boxes[parent.id]
        pw = px1 - px0

        if inside:
            avail = pw * 0.8
            widths = [_size_for(c)[0] for c in inside]
            scale = min(1.0, avail / (sum(widths) + 0.015 * (len(inside) - 1))) if widths else 1.0
            if widths and min(w * scale for w in widths) < _MIN_WIDTH:
                raise OverconstrainedLayout(
                    f"children of {parent.id} cannot fit inside its icon: "
                    + ", ".join(c.id for c in inside)
                )
            x = px0 + pw * 0.1
            for c, w in zip(inside, widths):
                w *= scale
                h = min(_size_for(c)[1] * scale, (py1 - py0) * 0.6)
                if h <= 0:
                    raise OverconstrainedLayout(f"{parent.id} has no interior room for {c.id}")
                y0 = py0 + (py1 - py0) * 0.15
                boxes[c.id] = (_round(x), _round(y0), _round(x + w), _round(y0 + h))
                x += w + 0.015 * scale

        x = px0
        for c in on_top:
            w, h = _size_for(c)
            boxes[c.id] = (_round(x), _round(py1), _round(min(x + w, px1 if pw > w else x + w)), _round(py1 + h))
            # Keep the x-overlap with the parent that the predicate needs.
            bx0, by0, bx1, by1 = boxes[c.id]
            if bx0 >= px1 - EPS:
                boxes[c.id] = (_round(px1 - w), by0, _round(px1), by1)
            x += w + 0.02

        for i, c in enumerate(attached):
            w, h = _size_for(c)
            toks = tokens_of(c)
            if py0 >= 0.3 and "left" not in toks and "right" not in toks:
                # Hang off the underside (taped pouch, fuse under bomb).
                cx = min(max(px0 + pw / 2 - w / 2, 0.0), 1.0 - w)
                boxes[c.id] = (_round(cx), _round(py0 - h), _round(cx + w), _round(py0))
                continue
            # Side mounts; named sides win, others alternate and stagger.
            side_right = "right" in toks or ("left" not in toks and i % 2 == 1)
            cy = py0 + (py1 - py0) * 0.3 + 0.02 * (i // 2)
            if side_right and px1 + w <= 1.0:
                boxes[c.id] = (_round(px1), _round(cy), _round(px1 + w), _round(cy + h))
            else:
                cx = max(px0 - w, 0.0)
                boxes[c.id] = (_round(cx), _round(cy), _round(cx + w), _round(cy + h))

        for c in hanging:
            w, h = _size_for(c)
            cx = min(max(px0 + pw / 2 - w / 2, 0.0), 1.0 - w)
            boxes[c.id] = (_round(cx), _round(py0 - h), _round(cx + w), _round(py0))

        bx = px1 + 0.03
        for c in beside:
            w, h = _size_for(c)
            if py0 >= HIGH_BAND:
                # Neighbor of an overhead object stands on the floor below it.
                cx = min(max(px0 + pw / 2 - w / 2, 0.0), 1.0 - w)
                boxes[c.id] = (_round(cx), 0.0, _round(cx + w), _round(h))
            else:
                boxes[c.id] = (_round(bx), _round(py0), _round(bx + w), _round(py0 + h))
                bx += w + 0.03

        for c in kids:
            place_children(c)

    for child in root_kids:
        place_children(child)

    icons = tuple(
        IconPlacement(
            object_id=nid,
            bbox=boxes[nid],
            label=nodes[nid].name,
            condition_text=_condition_text(nodes[nid]),
        )
        for nid in sorted(boxes)
    )
    return Layout(icons=icons, room_bbox=(0.0, 0.0, 1.0, 1.0), source_graph_digest=graph_digest(graph))


# ----------------------------------------------------------------------
# Linting
# ----------------------------------------------------------------------

def _inside(c, p) -> bool:
    return (
        c[0] >= p[0] - EPS and c[1] >= p[1] - EPS
        and c[2] <= p[2] + EPS and c[3] <= p[3] + EPS
        and (c[2] - c[0]) * (c[3] - c[1]) < (p[2] - p[0]) * (p[3] - p[1])
    )


def _overlap_1d(a0, a1, b0, b1) -> bool:
    return a0 < b1 - EPS and b0 < a1 - EPS


def _disjoint(a, b) -> bool:
    return not (_overlap_1d(a[0], a[2], b[0], b[2]) and _overlap_1d(a[1], a[3], b[1], b[3]))


def _touching(a, b) -> bool:
    gap_x = max(b[0] - a[2], a[0] - b[2])
    gap_y = max(b[1] - a[3], a[1] - b[3])
    return gap_x <= EPS and gap_y <= EPS


def lint_layout(layout: Layout, graph: SceneGraph) -> list[LayoutViolation]:
    """Geometric predicate for every relation; empty means aligned."""
    if layout.source_graph_digest != graph_digest(graph):
        raise DigestMismatch(
            f"layout was built for {layout.source_graph_digest[:12]}, "
            f"graph is {graph_digest(graph)[:12]}"
        )
    return _lint(layout, graph)


def _lint(layout: Layout, graph: SceneGraph) -> list[LayoutViolation]:
    out: list[LayoutViolation] = []
    nodes = graph.nodes()
    boxes = {icon.object_id: icon.bbox for icon in layout.icons}

    for nid in nodes:
        if nid == graph.root.id:
            continue
        if nid not in boxes:
            out.append(LayoutViolation("MissingIcon", nid, "no icon for node"))
    for icon in layout.icons:
        if icon.object_id not in nodes or icon.object_id == graph.root.id:
            out.append(LayoutViolation("ExtraIcon", icon.object_id, "icon without node"))
        x0, y0, x1, y1 = icon.bbox
        if not (0.0 - EPS <= x0 < x1 <= 1.0 + EPS and 0.0 - EPS <= y0 < y1 <= 1.0 + EPS):
            out.append(LayoutViolation("OutOfRoom", icon.object_id, f"bbox {icon.bbox}"))

    def check(parent: ObjectNode):
        pbox = layout.room_bbox if parent is graph.root else boxes.get(parent.id)
        for child in parent.children:
            cbox = boxes.get(child.id)
            if cbox is None or pbox is None:
                continue
            rel = child.relation
            ok = True
            if rel in ("contains", "contains_locked", "embedded_in"):
                ok = _inside(cbox, pbox)
            elif rel in ("supports", "leans_on"):
                if parent is graph.root:
                    ok = abs(cbox[1]) <= EPS
                else:
                    ok = abs(cbox[1] - pbox[3]) <= EPS and _overlap_1d(cbox[0], cbox[2], pbox[0], pbox[2])
            elif rel == "attached_to":
                ok = True if parent is graph.root else _touching(cbox, pbox)
            elif rel == "hangs_from":
                if parent is graph.root:
                    ok = cbox[3] >= 0.9 - EPS
                else:
                    ok = cbox[3] <= pbox[1] + EPS and _overlap_1d(cbox[0], cbox[2], pbox[0], pbox[2])
            elif rel == "adjacent_to":
                if parent is not graph.root:
                    ok = _disjoint(cbox, pbox) and (
                        _overlap_1d(cbox[0], cbox[2], pbox[0], pbox[2])
                        or _overlap_1d(cbox[1], cbox[3], pbox[1], pbox[3])
                    )
            if not ok:
                out.append(LayoutViolation(
                    "RelationViolated", child.id,
                    f"{rel} vs {parent.id}: child {cbox} parent {pbox}"))
            check(child)

    check(graph.root)

    # Top-third rule applies to objects the room itself carries; things
    # out of reach because of what they sit on keep their parent's anchor.
    parent_ids = {c.id: p.id for p in graph.root.walk() for c in p.children}
    for nid, node in nodes.items():
        if "unreachable_high" not in node.states or nid not in boxes:
            continue
        if parent_ids.get(nid) != graph.root.id and node.relation != "hangs_from":
            continue
        if boxes[nid][1] < HIGH_BAND - 0.05:
            out.append(LayoutViolation(
                "HighBandViolated", nid,
                f"y0={boxes[nid][1]:.3f} below the top third"))

    exit_box = boxes.get(graph.exit_id)
    if exit_box is not None:
        x0, y0, x1, y1 = exit_box
        touches = x0 <= EPS or y0 <= EPS or x1 >= 1.0 - EPS or y1 >= 1.0 - EPS
        if not touches:
            out.append(LayoutViolation("ExitNotOnEdge", graph.exit_id, f"bbox {exit_box}"))

    def siblings(parent: ObjectNode):
        kids = [c for c in parent.children if c.id in boxes]
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                a, b = boxes[kids[i].id], boxes[kids[j].id]
                if not _disjoint(a, b):
                    out.append(LayoutViolation(
                        "SiblingOverlap", kids[i].id,
                        f"overlaps sibling {kids[j].id}"))
        for c in parent.children:
            siblings(c)

    siblings(graph.root)
    return out


# ----------------------------------------------------------------------
# Serialization and SVG
# ----------------------------------------------------------------------

def layout_to_json(layout: Layout) -> str:
    data = {
        "source_graph_digest": layout.source_graph_digest,
        "icons": [
            {
                "object_id": icon.object_id,
                "bbox": list(icon.bbox),
                "label": icon.label,
                "condition_text": icon.condition_text,
            }
            for icon in layout.icons
        ],
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def layout_from_json(text: str) -> Layout:
    data = json.loads(text)
    icons = tuple(
        IconPlacement(
            object_id=item["object_id"],
            bbox=tuple(item["bbox"]),
            label=item["label"],
            condition_text=item.get("condition_text", ""),
        )
        for item in data["icons"]
    )
    return Layout(icons=icons, room_bbox=(0.0, 0.0, 1.0, 1.0),
                  source_graph_digest=data["source_graph_digest"])


SVG_SIZE = 800


def emit_svg(layout: Layout) -> str:
    """Monochrome icon sketch; byte-stable for a fixed layout."""
    s = SVG_SIZE

    def px(x: float) -> str:
        return f"{x * s:.1f}"

    def py(y: float) -> str:
        return f"{(1.0 - y) * s:.1f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" '
        f'viewBox="0 0 {s} {s}" font-family="monospace" font-size="12">',
        f'<rect x="0.5" y="0.5" width="{s - 1}" height="{s - 1}" '
        'fill="white" stroke="black" stroke-width="1"/>',
    ]
    for icon in layout.icons:
        x0, y0, x1, y1 = icon.bbox
        lines.append(
            f'<rect x="{px(x0)}" y="{py(y1)}" width="{px(x1 - x0)}" '
            f'height="{px(y1 - y0)}" fill="none" stroke="black" stroke-width="1.5"/>'
        )
        lines.append(
            f'<text x="{px(x0)}" y="{py(y1)}" dy="-3">{_esc(icon.label)}</text>'
        )
        if icon.condition_text:
            lines.append(
                f'<text x="{px(x1)}" y="{py(y0)}" dx="3" font-style="italic">'
                f'{_esc(icon.condition_text)}</text>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
