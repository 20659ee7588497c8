"""Self-contained SVG heatmaps and line plots.

Numbers written into the markup are rounded to 6 significant digits so
that files diff cleanly between platforms.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

# nine-stop perceptual ramp (dark blue -> yellow)
RAMP = (
    (68, 1, 84), (72, 40, 120), (62, 74, 137), (49, 104, 142), (38, 130, 142),
    (31, 158, 137), (53, 183, 121), (109, 205, 89), (253, 231, 37),
)
MISSING = "#bdbdbd"


def _g(v) -> str:
    return f"{float(v):.6g}"


def color(u: float) -> str:
    """Hex colour for ``u`` in [0, 1] by linear interpolation along the ramp."""
    if not math.isfinite(u):
        return MISSING
    u = min(max(u, 0.0), 1.0) * (len(RAMP) - 1)
    i = min(int(u), len(RAMP) - 2)
    f = u - i
    rgb = [round(a + (b - a) * f) for a, b in zip(RAMP[i], RAMP[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _header(w, h):
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_g(w)}" height="{_g(h)}" '
            f'viewBox="0 0 {_g(w)} {_g(h)}" font-family="sans-serif" font-size="11">',
            f'<rect width="{_g(w)}" height="{_g(h)}" fill="white"/>']


def heatmap(matrix, xs, ys, title="", log_scale=False, cell=18, colorbar_label="") -> str:
    """Heatmap of ``matrix[i_x, j_y]`` with x to the right and y upwards.

    Non-finite cells (and non-positive ones on a log scale) are grey.
    """
    mat = np.asarray(matrix, dtype=float)
    vals = mat.copy()
    if log_scale:
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(mat > 0, np.log10(mat), np.nan)
    finite = vals[np.isfinite(vals)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo if hi > lo else 1.0
    nx, ny = mat.shape
    left, top = 60, 30
    w = left + nx * cell + 110
    h = top + ny * cell + 50
    out = _header(w, h)
    out.append(f'<text x="{_g(left)}" y="18">{escape(title)}</text>')
    for i in range(nx):
        for j in range(ny):
            v = vals[i, j]
            fill = color((v - lo) / span) if math.isfinite(v) else MISSING
            x = left + i * cell
            y = top + (ny - 1 - j) * cell
            out.append(f'<rect x="{_g(x)}" y="{_g(y)}" width="{cell}" height="{cell}" fill="{fill}"/>')
    base = top + ny * cell
    for i in (0, nx - 1):
        out.append(f'<text x="{_g(left + i * cell)}" y="{_g(base + 14)}">{_g(xs[i])}</text>')
    for j in (0, ny - 1):
        out.append(f'<text x="4" y="{_g(top + (ny - 1 - j) * cell + cell * 0.7)}">{_g(ys[j])}</text>')
    out.append(f'<text x="{_g(left + nx * cell / 2)}" y="{_g(base + 32)}">x</text>')
    # colour bar
    bx = left + nx * cell + 20
    steps = 40
    bh = ny * cell
    for k in range(steps):
        y = top + bh * (1 - (k + 1) / steps)
        out.append(f'<rect x="{_g(bx)}" y="{_g(y)}" width="14" height="{_g(bh / steps + 0.5)}" '
                   f'fill="{color(k / (steps - 1))}"/>')
    tick = (lambda v: _g(10**v)) if log_scale else _g
    out.append(f'<text x="{_g(bx + 18)}" y="{_g(top + 8)}">{tick(hi)}</text>')
    out.append(f'<text x="{_g(bx + 18)}" y="{_g(top + bh)}">{tick(lo)}</text>')
    if colorbar_label:
        out.append(f'<text x="{_g(bx)}" y="{_g(top + bh + 18)}">{escape(colorbar_label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def line_plot(panels, width=640, panel_height=160) -> str:
    """Stacked panels sharing nothing but the width.

    ``panels`` is a list of ``(title, x, {label: y})``. Non-finite points
    break the line.
    """
    left, right, gap = 60, 20, 40
    h = gap + len(panels) * (panel_height + gap)
    out = _header(width, h)
    pw = width - left - right
    for p, (title, x, series) in enumerate(panels):
        top = gap + p * (panel_height + gap)
        x = np.asarray(x, dtype=float)
        ally = np.concatenate([np.asarray(y, float) for y in series.values()]) if series else np.zeros(1)
        ally = ally[np.isfinite(ally)]
        ylo, yhi = (float(ally.min()), float(ally.max())) if ally.size else (0.0, 1.0)
        if yhi == ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5
        xlo, xhi = (float(x.min()), float(x.max())) if x.size else (0.0, 1.0)
        if xhi == xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5

        def px(v):
            return left + (v - xlo) / (xhi - xlo) * pw

        def py(v):
            return top + panel_height - (v - ylo) / (yhi - ylo) * panel_height

        out.append(f'<text x="{left}" y="{_g(top - 8)}">{escape(title)}</text>')
        out.append(f'<rect x="{left}" y="{_g(top)}" width="{_g(pw)}" height="{panel_height}" '
                   f'fill="none" stroke="#444"/>')
        out.append(f'<text x="4" y="{_g(top + 10)}">{_g(yhi)}</text>')
        out.append(f'<text x="4" y="{_g(top + panel_height)}">{_g(ylo)}</text>')
        out.append(f'<text x="{left}" y="{_g(top + panel_height + 14)}">{_g(xlo)}</text>')
        out.append(f'<text x="{_g(left + pw - 30)}" y="{_g(top + panel_height + 14)}">{_g(xhi)}</text>')
        for k, (label, y) in enumerate(series.items()):
            y = np.asarray(y, dtype=float)
            col = PALETTE[k % len(PALETTE)]
            segs, cur = [], []
            for xv, yv in zip(x, y):
                if math.isfinite(yv):
                    cur.append(f"{_g(px(xv))},{_g(py(yv))}")
                elif cur:
                    segs.append(cur)
                    cur = []
            if cur:
                segs.append(cur)
            for seg in segs:
                if len(seg) == 1:
                    cx, cy = seg[0].split(",")
                    out.append(f'<circle cx="{cx}" cy="{cy}" r="2" fill="{col}"/>')
                else:
                    out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.2" points="{" ".join(seg)}"/>')
            out.append(f'<text x="{_g(left + pw - 120)}" y="{_g(top + 14 + 13 * k)}" fill="{col}">'
                       f'{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def scatter_plot(x, y, title="", xlabel="", ylabel="", width=480, height=360) -> str:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    left, top, pw, ph = 60, 30, width - 90, height - 80
    xlo, xhi = (x.min(), x.max()) if x.size else (0.0, 1.0)
    ylo, yhi = (y.min(), y.max()) if y.size else (0.0, 1.0)
    xhi = xhi if xhi > xlo else xlo + 1
    yhi = yhi if yhi > ylo else ylo + 1
    out = _header(width, height)
    out.append(f'<text x="{left}" y="18">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>')
    for xv, yv in zip(x, y):
        cx = left + (xv - xlo) / (xhi - xlo) * pw
        cy = top + ph - (yv - ylo) / (yhi - ylo) * ph
        out.append(f'<circle cx="{_g(cx)}" cy="{_g(cy)}" r="2.5" fill="{PALETTE[0]}"/>')
    out.append(f'<text x="{_g(left + pw / 2)}" y="{_g(top + ph + 30)}">{escape(xlabel)}</text>')
    out.append(f'<text x="4" y="{_g(top - 8)}">{escape(ylabel)}</text>')
    out.append(f'<text x="{left}" y="{_g(top + ph + 14)}">{_g(xlo)}</text>')
    out.append(f'<text x="{_g(left + pw - 30)}" y="{_g(top + ph + 14)}">{_g(xhi)}</text>')
    out.append(f'<text x="4" y="{_g(top + 10)}">{_g(yhi)}</text>')
    out.append(f'<text x="4" y="{_g(top + ph)}">{_g(ylo)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
