"""SVG drawings of a trace on the floor plan, one drawing per layer.

Markers sit on the cell (layer 0), room (layer 1) or floor (layer 2) of each
abstract state.  Projected states are filled; abstract states that are not
projected are hollow.  The first marker is light gray, the last dark gray.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

from ..layering import ProjectionBundle

CELL = 24
GAP = 2 * CELL
MARGIN = CELL


def _layout(cb):
    """Pixel offset of every floor panel and panel sizes."""
    offsets, x = {}, MARGIN
    sizes = {}
    for f in cb.scenario.floors:
        cols = max(c[1] for r in f.rooms for c in r.cells)
        rows = max(c[2] for r in f.rooms for c in r.cells)
        offsets[f.id] = x
        sizes[f.id] = (cols, rows)
        x += cols * CELL + GAP
    height = max(r for _, r in sizes.values()) * CELL + 2 * MARGIN + CELL
    return offsets, sizes, x - GAP + MARGIN, height


def _cell_xy(cb, offsets, label):
    fid, col, row = cb.cells[label]
    return offsets[fid] + (col - 0.5) * CELL, MARGIN + CELL + (row - 0.5) * CELL


def _centroid(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def render_trace(cb, trace, layer: int, bundle: ProjectionBundle | None = None) -> str:
    bundle = bundle or ProjectionBundle(cb.lay, [tuple(p) for p in trace])
    if not 0 <= layer <= cb.lay.L:
        raise ValueError(f"layer {layer} out of range")
    offsets, sizes, width, height = _layout(cb)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<title>{escape(cb.scenario.name)} layer {layer}</title>',
    ]
    for f in cb.scenario.floors:
        parts.append(f'<text x="{offsets[f.id]}" y="{MARGIN + CELL * 0.6}" font-size="14">{escape(f.id)}</text>')
        for r in f.rooms:
            for c in r.cells:
                x0 = offsets[f.id] + (c[1] - 1) * CELL
                y0 = MARGIN + CELL + (c[2] - 1) * CELL
                parts.append(f'<rect class="cell" x="{x0}" y="{y0}" width="{CELL}" height="{CELL}" '
                             f'fill="white" stroke="#ddd"/>')
            lab_xy = _centroid([_cell_xy(cb, offsets, cb.labels[c]) for c in r.cells])
            parts.append(f'<text class="room" x="{lab_xy[0]:.1f}" y="{lab_xy[1]:.1f}" font-size="9" '
                         f'fill="#999" text-anchor="middle">{escape(r.id)}</text>')
    for e in cb.elements:
        for lab in e.cells:
            x, y = _cell_xy(cb, offsets, lab)
            parts.append(f'<rect class="{e.kind}" x="{x - CELL / 2 + 3:.1f}" y="{y - CELL / 2 + 3:.1f}" '
                         f'width="{CELL - 6}" height="{CELL - 6}" fill="none" stroke="#c33" stroke-dasharray="2"/>')

    def where(state):
        if layer == 0:
            return _cell_xy(cb, offsets, state)
        if layer == 1:
            labs = [lab for lab, rid in cb.room_of.items() if rid == state]
        else:
            labs = [lab for lab, rid in cb.room_of.items() if cb.floor_of[rid] == state]
        return _centroid([_cell_xy(cb, offsets, lab) for lab in labs])

    path = [_cell_xy(cb, offsets, y) for _, y in bundle.play]
    if len(path) > 1:
        pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in path)
        parts.append(f'<polyline class="path" points="{pts}" fill="none" stroke="#88a" stroke-width="1"/>')
    projected = set(bundle.kappa[layer])
    abstract = bundle.abstract[layer]
    drawn_hollow = set()
    for k, (_, y) in enumerate(abstract):
        if k not in projected and y not in drawn_hollow:
            drawn_hollow.add(y)
            x, yy = where(y)
            parts.append(f'<circle class="abstract" cx="{x:.1f}" cy="{yy:.1f}" r="5" fill="none" stroke="black"/>')
    last = len(bundle.kappa[layer]) - 1
    for m, k in enumerate(bundle.kappa[layer]):
        x, yy = where(abstract[k][1])
        fill = "#ccc" if m == 0 else ("#333" if m == last else "black")
        parts.append(f'<circle class="projected" cx="{x:.1f}" cy="{yy:.1f}" r="5" fill="{fill}" stroke="black">'
                     f'<title>k={k} {escape(str(abstract[k][1]))}</title></circle>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
