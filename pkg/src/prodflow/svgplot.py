"""Dependency-free SVG line charts for step-response curves.

Output is deterministic: the same curves produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .model import TimeSeries

_WIDTH, _HEIGHT = 840, 520
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 180, 24, 48
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_step_plot(curves: Sequence[tuple[str, TimeSeries]], path: str | Path) -> None:
    """Write one polyline per named curve with auto-scaled linear axes."""
    if not curves:
        raise ValueError("no curves to plot")
    x_min = min(float(ts.t[0]) for _, ts in curves)
    x_max = max(float(ts.t[-1]) for _, ts in curves)
    y_min = min(float(ts.values.min()) for _, ts in curves)
    y_max = max(float(ts.values.max()) for _, ts in curves)
    if y_min == y_max:
        y_min, y_max = y_min - 0.5, y_max + 0.5

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (y_max - y) / (y_max - y_min) * plot_h

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
    ]
    # frame and tick labels
    left, right = _MARGIN_L, _MARGIN_L + plot_w
    top, bottom = _MARGIN_T, _MARGIN_T + plot_h
    lines.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="#000" stroke-width="1"/>')
    lines.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="#000" stroke-width="1"/>')
    for i in range(5):
        fx = x_min + (x_max - x_min) * i / 4
        fy = y_min + (y_max - y_min) * i / 4
        lines.append(
            f'<text x="{px(fx):.2f}" y="{bottom + 16}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{fx:.6g}</text>'
        )
        lines.append(
            f'<text x="{left - 6}" y="{py(fy) + 4:.2f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{fy:.6g}</text>'
        )
    lines.append(
        f'<text x="{(left + right) / 2:.2f}" y="{_HEIGHT - 8}" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">t</text>'
    )
    lines.append(
        f'<text x="14" y="{(top + bottom) / 2:.2f}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 14 {(top + bottom) / 2:.2f})">output</text>'
    )
    for idx, (name, ts) in enumerate(curves):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}" for x, y in zip(ts.t, ts.values))
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + idx * 18
        lines.append(f'<line x1="{right + 12}" y1="{ly}" x2="{right + 34}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        lines.append(
            f'<text x="{right + 40}" y="{ly + 4}" text-anchor="start" font-size="12" '
            f'font-family="sans-serif">{_escape(name)}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
