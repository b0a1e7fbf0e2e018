"""Self-contained SVG plots of boundary step functions."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Optional
from xml.sax.saxutils import escape

import numpy as np

from .partitions import StepFunction

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 56, 20, 36, 44
REFERENCE_POINTS = 512


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    text = f"{v:.3f}".rstrip("0").rstrip(".")
    return text or "0"


def step_outline(step: StepFunction, x_max: float) -> list[tuple[float, float]]:
    """Corner points of the graph: horizontal runs joined by verticals."""
    pts: list[tuple[float, float]] = []
    bp = step.breakpoints.astype(float)
    vals = step.values.astype(float)
    ends = step.segment_ends.astype(float)
    for x0, x1, v in zip(bp, ends, vals):
        pts.append((x0, v))
        pts.append((x1, v))
    end = float(step.end)
    pts.append((end, 0.0))
    if x_max > end:
        pts.append((x_max, 0.0))
    return pts


def render_svg(
    step: StepFunction,
    reference: Optional[Callable] = None,
    title: str = "",
) -> str:
    x_max = max(float(step.end), 6.0)
    y_max = max(1.1, step.peak)
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x):
        return MARGIN_LEFT + pw * x / x_max

    def sy(y):
        return MARGIN_TOP + ph * (1 - y / y_max)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-family="sans-serif" '
            f'font-size="14">{escape(title)}</text>'
        )
    x0, y0 = sx(0), sy(0)
    out.append('<g stroke="black" stroke-width="1" fill="none">')
    out.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(sx(x_max))}" y2="{_fmt(y0)}"/>')
    out.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x0)}" y2="{_fmt(sy(y_max))}"/>')
    out.append("</g>")

    out.append('<g font-family="sans-serif" font-size="11" fill="black">')
    xs = _nice_step(x_max)
    for i in range(int(math.floor(x_max / xs + 1e-9)) + 1):
        x = i * xs
        out.append(f'<line x1="{_fmt(sx(x))}" y1="{_fmt(y0)}" x2="{_fmt(sx(x))}" y2="{_fmt(y0 + 5)}" stroke="black"/>')
        out.append(f'<text x="{_fmt(sx(x))}" y="{_fmt(y0 + 18)}" text-anchor="middle">{_tick_label(x)}</text>')
    ys = _nice_step(y_max, 5)
    for i in range(int(math.floor(y_max / ys + 1e-9)) + 1):
        y = i * ys
        out.append(f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(sy(y))}" x2="{_fmt(x0)}" y2="{_fmt(sy(y))}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x0 - 8)}" y="{_fmt(sy(y) + 4)}" text-anchor="end">{_tick_label(y)}</text>')
    out.append("</g>")

    pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in step_outline(step, x_max))
    out.append(f'<polyline class="step" fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{pts}"/>')
    if reference is not None:
        grid = np.linspace(0.0, x_max, REFERENCE_POINTS)
        ys_ref = np.clip(np.asarray(reference(grid), dtype=float), 0.0, y_max)
        rpts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(grid, ys_ref))
        out.append(f'<polyline class="reference" fill="none" stroke="#c0392b" stroke-width="1.5" points="{rpts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_plot(
    step: StepFunction,
    path,
    reference: Optional[Callable] = None,
    title: str = "",
) -> None:
    text = render_svg(step, reference, title)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc.strerror}") from exc
