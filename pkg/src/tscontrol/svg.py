"""Minimal self-contained SVG emitters (no external renderer)."""

from __future__ import annotations

from pathlib import Path

_WIDTH = 640
_HEIGHT = 400
_MARGIN = 48


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo
    if span == 0:
        span = 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_WIDTH}" height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]


def trajectory_chart(path, series, vline_x=None, title=""):
    """Line chart of trajectories; ``series`` is (label, color, dash, xs, ys).

    A dashed vertical rule marks ``vline_x`` (the treatment time).
    """
    xs_all = [x for _, _, _, xs, _ in series for x in xs]
    ys_all = [y for _, _, _, _, ys in series for y in ys]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    parts = _header(title)
    if vline_x is not None:
        (px,) = _scale([vline_x], x_lo, x_hi, _MARGIN, _WIDTH - _MARGIN)
        parts.append(
            f'<line x1="{px:.2f}" y1="{_MARGIN}" x2="{px:.2f}" y2="{_HEIGHT - _MARGIN}" '
            f'stroke="black" stroke-dasharray="6,4" stroke-width="1"/>'
        )
    legend_y = 36
    for label, color, dash, xs, ys in series:
        sx = _scale(xs, x_lo, x_hi, _MARGIN, _WIDTH - _MARGIN)
        sy = _scale(ys, y_lo, y_hi, _HEIGHT - _MARGIN, _MARGIN)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(sx, sy))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} '
            f'points="{points}"/>'
        )
        if label:
            parts.append(
                f'<text x="{_WIDTH - _MARGIN + 4}" y="{legend_y}" font-family="sans-serif" '
                f'font-size="10" fill="{color}" text-anchor="end">{label}</text>'
            )
            legend_y += 12
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")


def grouped_bar_chart(path, categories, first, second, title=""):
    """Two grouped bar series; ``first``/``second`` are (label, color, values)."""
    label_a, color_a, values_a = first
    label_b, color_b, values_b = second
    top = max(list(values_a) + list(values_b) + [1e-12])
    n = len(categories)
    slot = (_WIDTH - 2 * _MARGIN) / max(n, 1)
    bar = slot * 0.35
    base = _HEIGHT - _MARGIN
    parts = _header(title)
    for i, category in enumerate(categories):
        x0 = _MARGIN + i * slot + slot * 0.1
        for offset, color, value in ((0.0, color_a, values_a[i]), (bar, color_b, values_b[i])):
            height = (base - _MARGIN) * (value / top)
            parts.append(
                f'<rect x="{x0 + offset:.2f}" y="{base - height:.2f}" width="{bar:.2f}" '
                f'height="{height:.2f}" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{x0 + bar:.2f}" y="{base + 14}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{category}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN}" y="32" font-family="sans-serif" font-size="10" fill="{color_a}">'
        f"{label_a}</text>"
    )
    parts.append(
        f'<text x="{_MARGIN}" y="44" font-family="sans-serif" font-size="10" fill="{color_b}">'
        f"{label_b}</text>"
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")
