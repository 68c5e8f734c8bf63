"""Plot rendering: deterministic SVG line charts and matplotlib figures.

The SVG path is hand-rolled (header, axes, one polyline per scheme, an
optional dashed envelope curve) so that identical inputs produce identical
bytes; every coordinate is formatted with a fixed precision and nothing
depends on library versions or wall-clock state. The matplotlib path renders
richer PNG figures for human consumption and strips volatile metadata.
"""

import math
from xml.sax.saxutils import escape

from .experiments import envelope_value

WIDTH, HEIGHT = 720, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 28, 56

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf")
ENVELOPE_COLOR = "#555555"

SVG_ENVELOPES = ("lnK", "lnK-over-lnlnK", "const", "none")

_ENVELOPE_KEY = {"lnK": "lnK", "lnK-over-lnlnK": "lnK_over_lnlnK", "const": "const"}


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _x_map(k, k_lo, k_hi):
    span = math.log(k_hi) - math.log(k_lo)
    frac = 0.5 if span == 0 else (math.log(k) - math.log(k_lo)) / span
    return MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R)


def _y_map(v, v_hi):
    frac = 0.0 if v_hi == 0 else v / v_hi
    return HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)


def _nice_ticks(v_hi, count=5):
    if v_hi <= 0:
        return [0.0]
    raw = v_hi / count
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    n = int(v_hi / step) + 1
    return [i * step for i in range(n + 1) if i * step <= v_hi * 1.001]


def render_svg(aggregates, envelope: str = "none") -> str:
    """SVG 1.1 chart of mean sum rate (nats) against K on a log axis, one
    polyline per scheme plus an optional dashed envelope polyline."""
    if envelope not in SVG_ENVELOPES:
        raise ValueError(f"envelope must be one of {SVG_ENVELOPES}")
    if len(aggregates) == 0:
        raise ValueError("no aggregate rows to plot")
    schemes = sorted({a.scheme for a in aggregates})
    by_scheme = {s: sorted(((a.k, a.mean_sum_rate) for a in aggregates
                            if a.scheme == s)) for s in schemes}
    ks = sorted({a.k for a in aggregates})
    k_lo, k_hi = ks[0], ks[-1]

    env_points = []
    if envelope != "none":
        env_key = _ENVELOPE_KEY[envelope]
        env_ks = [k for k in ks if env_key != "lnK_over_lnlnK" or k >= 3]
        if len(env_ks) >= 2 and k_lo != k_hi:
            lo, hi = math.log(env_ks[0]), math.log(env_ks[-1])
            grid = [math.exp(lo + (hi - lo) * i / 100.0) for i in range(101)]
        else:
            grid = [float(k) for k in env_ks]
        env_points = [(g, envelope_value(env_key, g)) for g in grid]

    v_hi = max(m for pts in by_scheme.values() for _, m in pts)
    if env_points:
        v_hi = max(v_hi, max(v for _, v in env_points))
    v_hi = v_hi * 1.05 if v_hi > 0 else 1.0

    parts = ['<?xml version="1.0" encoding="UTF-8"?>']
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                 f'width="{WIDTH}" height="{HEIGHT}" '
                 f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    parts.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')

    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" '
                 f'stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" '
                 f'stroke="black" stroke-width="1"/>')

    tick_ks = ks if len(ks) <= 9 else ks[::2]
    for k in tick_ks:
        x = _x_map(k, k_lo, k_hi)
        parts.append(f'<line x1="{_fmt(x)}" y1="{y0}" x2="{_fmt(x)}" y2="{y0 + 5}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{y0 + 20}" font-size="11" '
                     f'text-anchor="middle">{k}</text>')
    for v in _nice_ticks(v_hi):
        y = _y_map(v, v_hi)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(y)}" x2="{x0}" y2="{_fmt(y)}" '
                     f'stroke="black" stroke-width="1"/>')
        label = f"{v:g}"
        parts.append(f'<text x="{x0 - 8}" y="{_fmt(y + 4)}" font-size="11" '
                     f'text-anchor="end">{escape(label)}</text>')

    parts.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 14}" font-size="13" '
                 f'text-anchor="middle">users K (log scale)</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) // 2}" font-size="13" '
                 f'text-anchor="middle" '
                 f'transform="rotate(-90 18 {(y0 + y1) // 2})">'
                 f'mean sum rate (nats)</text>')

    if env_points:
        coords = " ".join(f"{_fmt(_x_map(k, k_lo, k_hi))},{_fmt(_y_map(v, v_hi))}"
                          for k, v in env_points)
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{ENVELOPE_COLOR}" stroke-width="1.5" '
                     f'stroke-dasharray="6,4"/>')

    for i, scheme in enumerate(schemes):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_fmt(_x_map(k, k_lo, k_hi))},{_fmt(_y_map(m, v_hi))}"
                          for k, m in by_scheme[scheme])
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')

    legend_y = MARGIN_T + 6
    for i, scheme in enumerate(schemes):
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<text x="{x1 - 8}" y="{legend_y + 16 * i}" font-size="12" '
                     f'text-anchor="end" fill="{color}">{escape(scheme)}</text>')
    if env_points:
        parts.append(f'<text x="{x1 - 8}" y="{legend_y + 16 * len(schemes)}" '
                     f'font-size="12" text-anchor="end" '
                     f'fill="{ENVELOPE_COLOR}">{escape(envelope)} envelope</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, aggregates, envelope: str = "none"):
    svg = render_svg(aggregates, envelope)
    with open(path, "w", newline="") as fh:
        fh.write(svg)


def render_figures(aggregates, out_dir):
    """Render PNG figures (sum-rate scaling and achievability ratio) into
    out_dir; returns the written paths. Imports matplotlib lazily so the
    deterministic SVG path has no heavyweight dependency."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import os

    os.makedirs(out_dir, exist_ok=True)
    schemes = sorted({a.scheme for a in aggregates})
    written = []

    fig, ax = plt.subplots(figsize=(7.2, 4.8))
    for scheme in schemes:
        pts = sorted((a.k, a.mean_sum_rate, a.p05, a.p95)
                     for a in aggregates if a.scheme == scheme)
        ks = [p[0] for p in pts]
        ax.plot(ks, [p[1] for p in pts], marker="o", label=scheme)
        if any(p[2] != p[3] for p in pts):
            ax.fill_between(ks, [p[2] for p in pts], [p[3] for p in pts], alpha=0.2)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("users K")
    ax.set_ylabel("mean sum rate (nats)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    path = os.path.join(out_dir, "scaling_sum_rate.png")
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    written.append(path)

    ratio_schemes = [s for s in schemes
                     if len([a for a in aggregates if a.scheme == s]) >= 2]
    if ratio_schemes:
        fig, ax = plt.subplots(figsize=(7.2, 4.8))
        for scheme in ratio_schemes:
            pts = sorted((a.k, a.mean_sum_rate) for a in aggregates
                         if a.scheme == scheme and a.k >= 3)
            if len(pts) < 2:
                continue
            ks = [p[0] for p in pts]
            ratios = [m / envelope_value("lnK_over_lnlnK", k) for k, m in pts]
            ax.plot(ks, ratios, marker="o", label=scheme)
        ax.set_xscale("log", base=2)
        ax.set_xlabel("users K")
        ax.set_ylabel("mean sum rate / (ln K / ln ln K)")
        ax.legend()
        ax.grid(True, alpha=0.3)
        path = os.path.join(out_dir, "scaling_ratio.png")
        fig.savefig(path, dpi=120, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written
