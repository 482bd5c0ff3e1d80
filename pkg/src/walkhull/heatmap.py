"""Self-contained SVG heatmaps for p-value grids (no plotting deps).

Cells are colored on two palettes split at -log(p) = 2: a cool ramp for
values consistent with normality (<= 2) and a warm ramp for rejections
(> 2).  Row index follows sigma1 (top row = smallest), column index
follows sigma2.  Output is deterministic: no timestamps, no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

CELL = 52
LEFT = 88
TOP = 72
RIGHT = 180
BOTTOM = 28

_COOL_LO = (0xDE, 0xEB, 0xF7)
_COOL_HI = (0x08, 0x51, 0x9C)
_WARM_LO = (0xFE, 0xE0, 0x8B)
_WARM_HI = (0xA5, 0x00, 0x26)
_INVALID = "#bdbdbd"
THRESHOLD = 2.0


def _lerp(lo: tuple[int, int, int], hi: tuple[int, int, int], t: float) -> str:
    t = min(1.0, max(0.0, t))
    r = round(lo[0] + (hi[0] - lo[0]) * t)
    g = round(lo[1] + (hi[1] - lo[1]) * t)
    b = round(lo[2] + (hi[2] - lo[2]) * t)
    return f"#{r:02x}{g:02x}{b:02x}"


def cell_color(neglog: float, warm_span: float) -> str:
    """Color for one cell; strict > 2 switches to the warm palette."""
    if math.isnan(neglog):
        return _INVALID
    if neglog <= THRESHOLD:
        return _lerp(_COOL_LO, _COOL_HI, neglog / THRESHOLD)
    return _lerp(_WARM_LO, _WARM_HI, (neglog - THRESHOLD) / warm_span)


def _fmt(v: float) -> str:
    return f"{v:g}"


@dataclass(frozen=True)
class HeatmapData:
    sigma_values: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]  # [row sigma1][col sigma2], NaN = invalid
    functional: str


def render_heatmap(data: HeatmapData) -> str:
    m = len(data.sigma_values)
    width = LEFT + m * CELL + RIGHT
    height = TOP + m * CELL + BOTTOM
    finite = [v for row in data.values for v in row if not math.isnan(v)]
    warm_span = max(1.0, max((v - THRESHOLD for v in finite), default=1.0))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{LEFT}" y="22" font-size="14">-log(avg p), {data.functional} samples</text>',
        f'<text x="{LEFT + m * CELL / 2:.0f}" y="44" font-size="12" text-anchor="middle">sigma2</text>',
        f'<text x="20" y="{TOP + m * CELL / 2:.0f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 20 {TOP + m * CELL / 2:.0f})">sigma1</text>',
    ]
    for j, s2 in enumerate(data.sigma_values):
        cx = LEFT + j * CELL + CELL / 2
        parts.append(
            f'<text x="{cx:.0f}" y="{TOP - 8}" font-size="11" text-anchor="middle">{_fmt(s2)}</text>'
        )
    for i, s1 in enumerate(data.sigma_values):
        cy = TOP + i * CELL + CELL / 2 + 4
        parts.append(
            f'<text x="{LEFT - 8}" y="{cy:.0f}" font-size="11" text-anchor="end">{_fmt(s1)}</text>'
        )
    for i in range(m):
        for j in range(m):
            v = data.values[i][j]
            color = cell_color(v, warm_span)
            x = LEFT + j * CELL
            y = TOP + i * CELL
            parts.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{color}" '
                'stroke="#ffffff" stroke-width="1"/>'
            )
            if math.isnan(v):
                label, fill = "n/a", "#333333"
            else:
                label = f"{v:.2f}" if v < 100 else f"{v:.0f}"
                dark = (v <= THRESHOLD and v / THRESHOLD > 0.55) or (
                    v > THRESHOLD and (v - THRESHOLD) / warm_span > 0.55
                )
                fill = "#ffffff" if dark else "#1a1a1a"
            parts.append(
                f'<text x="{x + CELL / 2:.0f}" y="{y + CELL / 2 + 4:.0f}" font-size="10" '
                f'text-anchor="middle" fill="{fill}">{label}</text>'
            )

    # legend: the two ramps with the split annotated
    lx = LEFT + m * CELL + 24
    parts.append(f'<text x="{lx}" y="{TOP}" font-size="11">-log(avg p)</text>')
    steps = 6
    for s in range(steps):
        v = THRESHOLD * s / (steps - 1)
        parts.append(
            f'<rect x="{lx}" y="{TOP + 10 + s * 16}" width="16" height="16" '
            f'fill="{cell_color(v, warm_span)}"/>'
        )
        parts.append(
            f'<text x="{lx + 22}" y="{TOP + 22 + s * 16}" font-size="10">{v:.1f}</text>'
        )
    base = TOP + 10 + steps * 16 + 12
    parts.append(f'<text x="{lx}" y="{base - 2}" font-size="10">&gt; 2 rejects:</text>')
    for s in range(steps):
        v = THRESHOLD + warm_span * (s + 1) / steps
        parts.append(
            f'<rect x="{lx}" y="{base + 4 + s * 16}" width="16" height="16" '
            f'fill="{cell_color(v, warm_span)}"/>'
        )
        parts.append(
            f'<text x="{lx + 22}" y="{base + 16 + s * 16}" font-size="10">{v:.1f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
