"""Minimal self-contained SVG line plots (800x500, polyline based)."""

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=80, right=20, top=40, bottom=60)
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def nice_ticks(lo, hi, target=6):
    """Ticks at round multiples of 1, 2 or 5 times a power of ten."""
    if not math.isfinite(lo) or not math.isfinite(hi):
        raise ValueError("non-finite axis range")
    if hi <= lo:
        pad = abs(lo) * 0.5 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    count = int(round((stop - start) / step))
    return [start + i * step for i in range(count + 1)]


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:.6g}"


def line_plot(series, title="", xlabel="", ylabel="", logy=False):
    """Render ``[(xs, ys, label), ...]`` as an SVG document string.

    With ``logy`` the y axis is log10; nonpositive values are clipped to the
    smallest positive value present.
    """
    xs_all = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    if logy:
        pos = ys_all[ys_all > 0]
        floor = pos.min() if pos.size else 1e-300
        tf = lambda y: np.log10(np.maximum(np.asarray(y, dtype=float), floor))
        ylo, yhi = math.floor(float(tf(ys_all).min())), math.ceil(float(tf(ys_all).max()))
        if yhi == ylo:
            yhi += 1
        every = max(1, math.ceil((yhi - ylo) / 8))
        yticks = list(range(ylo, yhi + 1, every))
        ylabels = [f"1e{t}" for t in yticks]
    else:
        tf = lambda y: np.asarray(y, dtype=float)
        yticks = nice_ticks(float(ys_all.min()), float(ys_all.max()))
        ylabels = [_fmt(t) for t in yticks]
    xticks = nice_ticks(float(xs_all.min()), float(xs_all.max()))
    x0, x1 = xticks[0], xticks[-1]
    y0, y1 = yticks[0], yticks[-1]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    px = lambda x: MARGIN["left"] + (np.asarray(x) - x0) / (x1 - x0) * pw
    py = lambda y: MARGIN["top"] + ph - (np.asarray(y) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]
    for t in xticks:
        x = float(px(t))
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN["top"]}" x2="{x:.2f}" '
                   f'y2="{MARGIN["top"] + ph}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle" '
                   f'font-size="12">{_fmt(t)}</text>')
    for t, lab in zip(yticks, ylabels):
        y = float(py(t))
        out.append(f'<line x1="{MARGIN["left"]}" y1="{y:.2f}" x2="{MARGIN["left"] + pw}" '
                   f'y2="{y:.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" text-anchor="end" '
                   f'font-size="12">{lab}</text>')
    out.append(f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="black"/>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-size="14">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" font-size="14" '
               f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (xs, ys, label) in enumerate(series):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(xs), py(tf(ys))))
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}">'
                   f'<title>{escape(str(label))}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trajectory_plots(traj, logy=True):
    """SVG strings for agent states vs k and for the error e(k) vs k."""
    k = traj.steps
    states = line_plot(
        [(k, traj.states[:, i], f"x_{i}") for i in range(traj.states.shape[1])],
        title="Agent states", xlabel="k", ylabel="x_i(k)",
    )
    errors = line_plot(
        [(k, traj.errors, "e")], title="Consensus error", xlabel="k", ylabel="e(k)", logy=logy,
    )
    return states, errors
