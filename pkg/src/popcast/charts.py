"""Deterministic SVG line charts: actual vs predicted persons per series."""

from __future__ import annotations

from typing import Mapping, Sequence

__all__ = ["svg_chart", "PALETTE"]

# model color by registration order; actual is always black
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")

_WIDTH, _HEIGHT = 800, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 90, 620, 50, 420


def _scale(value: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    if hi == lo:
        return (out_lo + out_hi) / 2.0
    return out_lo + (value - lo) * (out_hi - out_lo) / (hi - lo)


def _polyline(years, values, y_lo, y_hi, x_lo, x_hi, color, width):
    pts = " ".join(
        f"{_scale(year, x_lo, x_hi, _LEFT, _RIGHT):.2f},"
        f"{_scale(v, y_lo, y_hi, _BOTTOM, _TOP):.2f}"
        for year, v in zip(years, values)
    )
    return (
        f'  <polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>'
    )


def svg_chart(
    title: str,
    years: Sequence[int],
    actual: Sequence[float],
    predictions: Mapping[str, Sequence[float]],
) -> str:
    """Fixed 800x480 chart: year on x, persons on y, one line per model plus actual."""
    all_values = list(actual)
    for vals in predictions.values():
        all_values.extend(vals)
    v_lo, v_hi = min(all_values), max(all_values)
    pad = (v_hi - v_lo) * 0.05 or max(abs(v_hi), 1.0) * 0.05
    v_lo, v_hi = v_lo - pad, v_hi + pad
    x_lo, x_hi = min(years), max(years)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'  <rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'  <text x="{(_LEFT + _RIGHT) / 2:.0f}" y="28" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    # horizontal gridlines and y labels
    for i in range(5):
        v = v_lo + (v_hi - v_lo) * i / 4
        y = _scale(v, v_lo, v_hi, _BOTTOM, _TOP)
        parts.append(
            f'  <line x1="{_LEFT}" y1="{y:.2f}" x2="{_RIGHT}" y2="{y:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'  <text x="{_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v:,.0f}</text>'
        )
    # x ticks per year
    for year in years:
        x = _scale(year, x_lo, x_hi, _LEFT, _RIGHT)
        parts.append(
            f'  <line x1="{x:.2f}" y1="{_BOTTOM}" x2="{x:.2f}" y2="{_BOTTOM + 5}" '
            f'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'  <text x="{x:.2f}" y="{_BOTTOM + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{year}</text>'
        )
    parts.append(
        f'  <line x1="{_LEFT}" y1="{_BOTTOM}" x2="{_RIGHT}" y2="{_BOTTOM}" '
        f'stroke="#333333" stroke-width="1.5"/>'
    )
    parts.append(
        f'  <line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_BOTTOM}" '
        f'stroke="#333333" stroke-width="1.5"/>'
    )
    parts.append(
        f'  <text x="{(_LEFT + _RIGHT) / 2:.0f}" y="{_HEIGHT - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">year</text>'
    )
    parts.append(
        f'  <text x="22" y="{(_TOP + _BOTTOM) / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 22 {(_TOP + _BOTTOM) / 2:.0f})">persons</text>'
    )

    parts.append(_polyline(years, actual, v_lo, v_hi, x_lo, x_hi, "#000000", 2.5))
    for i, (model, values) in enumerate(predictions.items()):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline(years, values, v_lo, v_hi, x_lo, x_hi, color, 1.8))

    # legend
    legend_x = _RIGHT + 16
    entries = [("actual", "#000000")] + [
        (model, PALETTE[i % len(PALETTE)]) for i, model in enumerate(predictions)
    ]
    for i, (label, color) in enumerate(entries):
        y = _TOP + 10 + i * 22
        parts.append(
            f'  <line x1="{legend_x}" y1="{y}" x2="{legend_x + 26}" y2="{y}" '
            f'stroke="{color}" stroke-width="2.5"/>'
        )
        parts.append(
            f'  <text x="{legend_x + 32}" y="{y + 4}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
