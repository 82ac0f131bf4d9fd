"""Self-contained SVG emission for convergence plots; no plotting dependency.

The figure maps x = log10(N) and y = scaled speed correction linearly into
pixel space, draws one point (plus an error bar when the error is nonzero)
per row, and one horizontal reference line at the predicted constant.  The
affine transform parameters are embedded as data-* attributes on the root
element so the coordinates are machine-checkable from the file alone.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH = 640.0
HEIGHT = 420.0
PAD_L = 70.0
PAD_R = 20.0
PAD_T = 30.0
PAD_B = 50.0


def _fmt(x: float) -> str:
    return repr(float(x))


class _Transform:
    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo, y_hi

    def px(self, x):
        return PAD_L + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - PAD_L - PAD_R)

    def py(self, y):
        return HEIGHT - PAD_B - (y - self.y_lo) / (self.y_hi - self.y_lo) * (
            HEIGHT - PAD_T - PAD_B)


def convergence_svg(rows, target: float, family: str, alpha: float) -> str:
    """SVG for ConvergenceRow-like records (attributes n, scaled_correction,
    stderr_scaled); horizontal reference at the target constant."""
    if len(rows) < 2:
        raise ValueError("convergence plot needs at least 2 rows")
    xs = [math.log10(r.n) for r in rows]
    ys = [r.scaled_correction for r in rows]
    errs = [r.stderr_scaled for r in rows]
    y_all = ys + [y + e for y, e in zip(ys, errs)] + [y - e for y, e in zip(ys, errs)]
    y_all.append(target)
    span = max(y_all) - min(y_all) or abs(target) or 1.0
    tr = _Transform(min(xs), max(xs), min(y_all) - 0.08 * span, max(y_all) + 0.08 * span)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:g}" '
        f'height="{HEIGHT:g}" viewBox="0 0 {WIDTH:g} {HEIGHT:g}" '
        f'data-x-lo="{_fmt(tr.x_lo)}" data-x-hi="{_fmt(tr.x_hi)}" '
        f'data-y-lo="{_fmt(tr.y_lo)}" data-y-hi="{_fmt(tr.y_hi)}" '
        f'data-pad-l="{_fmt(PAD_L)}" data-pad-r="{_fmt(PAD_R)}" '
        f'data-pad-t="{_fmt(PAD_T)}" data-pad-b="{_fmt(PAD_B)}">',
        f'<rect x="0" y="0" width="{WIDTH:g}" height="{HEIGHT:g}" fill="white"/>',
        f'<rect x="{PAD_L:g}" y="{PAD_T:g}" width="{WIDTH - PAD_L - PAD_R:g}" '
        f'height="{HEIGHT - PAD_T - PAD_B:g}" fill="none" stroke="#888"/>',
    ]
    y_ref = tr.py(target)
    parts.append(
        f'<line class="refline" x1="{_fmt(PAD_L)}" x2="{_fmt(WIDTH - PAD_R)}" '
        f'y1="{_fmt(y_ref)}" y2="{_fmt(y_ref)}" data-value="{_fmt(target)}" '
        f'stroke="#c00" stroke-dasharray="6,3"/>'
    )
    for x, y, e in zip(xs, ys, errs):
        cx, cy = tr.px(x), tr.py(y)
        if e > 0.0:
            parts.append(
                f'<line class="errbar" x1="{_fmt(cx)}" x2="{_fmt(cx)}" '
                f'y1="{_fmt(tr.py(y - e))}" y2="{_fmt(tr.py(y + e))}" '
                f'stroke="#333"/>'
            )
        parts.append(
            f'<circle class="point" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3.5" '
            f'fill="#06c"/>'
        )
    title = escape(f"scaled speed correction, {family} (alpha={alpha:g})")
    parts.append(
        f'<text x="{WIDTH / 2:g}" y="{PAD_T - 10:g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>'
    )
    parts.append(
        f'<text x="{WIDTH / 2:g}" y="{HEIGHT - 12:g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">log10 N</text>'
    )
    parts.append(
        f'<text x="16" y="{HEIGHT / 2:g}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {HEIGHT / 2:g})">(speed - endpoint) / a_N</text>'
    )
    for x, n in sorted({(math.log10(r.n), r.n) for r in rows}):
        parts.append(
            f'<text x="{_fmt(tr.px(x))}" y="{HEIGHT - PAD_B + 18:g}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f'{n}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
