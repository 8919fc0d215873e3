"""Byte-stable SVG drawings of placements."""
from __future__ import annotations

from pathlib import Path

from ..core.model import Instance, Placement

PALETTE = ("#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
           "#f032e6", "#bfef45", "#469990", "#9a6324")
PLAIN = "#c8c8c8"
CANVAS_PX = 800.0
MARGIN_PX = 20.0


def _f(v: float) -> str:
    return f"{v:.3f}"


def render_svg_text(instance: Instance, placement: Placement, nets: bool = False) -> str:
    W, H = max(placement.W, 1e-9), max(placement.H, 1e-9)
    scale = CANVAS_PX / max(W, H)
    width = W * scale + 2 * MARGIN_PX
    height = H * scale + 2 * MARGIN_PX

    def sx(x):
        return MARGIN_PX + x * scale

    def sy(y):
        # SVG y grows downwards
        return MARGIN_PX + (H - y) * scale

    w, h = placement.sizes(instance)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
        "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" "
        "stroke=\"#444\" stroke-width=\"2\"/></pattern></defs>",
        f'<title>{instance.name}</title>',
        f'<rect x="{_f(sx(0))}" y="{_f(sy(H))}" width="{_f(W * scale)}" height="{_f(H * scale)}" '
        'fill="none" stroke="#000" stroke-width="1.5"/>',
    ]
    for blk in instance.blockages:
        out.append(
            f'<rect class="blockage" x="{_f(sx(blk.x))}" y="{_f(sy(blk.y + blk.height))}" '
            f'width="{_f(blk.width * scale)}" height="{_f(blk.height * scale)}" '
            'fill="url(#hatch)" stroke="#444"/>'
        )
    group_of = instance.group_of
    for i in instance.movable:
        g = group_of.get(i)
        color = PLAIN if g is None else PALETTE[g % len(PALETTE)]
        out.append(
            f'<rect id="r{i}" x="{_f(sx(placement.x[i]))}" y="{_f(sy(placement.y[i] + h[i]))}" '
            f'width="{_f(w[i] * scale)}" height="{_f(h[i] * scale)}" fill="{color}" '
            'fill-opacity="0.8" stroke="#222" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{_f(sx(placement.x[i] + w[i] / 2))}" y="{_f(sy(placement.y[i] + h[i] / 2))}" '
            f'font-size="{_f(max(6.0, min(w[i], h[i]) * scale / 3))}" text-anchor="middle" '
            f'dominant-baseline="middle">{i}</text>'
        )
    for g, axis in enumerate(placement.axes):
        color = PALETTE[g % len(PALETTE)]
        out.append(
            f'<line class="axis" x1="{_f(sx(axis))}" y1="{_f(sy(H))}" x2="{_f(sx(axis))}" '
            f'y2="{_f(sy(0))}" stroke="{color}" stroke-dasharray="6 4" stroke-width="1.5"/>'
        )
    if nets:
        cx, cy = placement.centroids(instance)
        for e, net in enumerate(instance.nets):
            mem = list(net.members)
            x0, x1 = cx[mem].min(), cx[mem].max()
            y0, y1 = cy[mem].min(), cy[mem].max()
            out.append(
                f'<rect class="net" id="n{e}" x="{_f(sx(x0))}" y="{_f(sy(y1))}" '
                f'width="{_f((x1 - x0) * scale)}" height="{_f((y1 - y0) * scale)}" '
                'fill="none" stroke="#0a0" stroke-opacity="0.5" stroke-width="0.7"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(instance: Instance, placement: Placement, out_path, nets: bool = False) -> None:
    Path(out_path).write_text(render_svg_text(instance, placement, nets), encoding="utf-8")
