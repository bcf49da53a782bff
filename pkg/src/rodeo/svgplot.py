"""Minimal two-panel SVG line plots (no plotting dependency)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, PANEL_H, MARGIN = 720, 260, 50
COLORS = {"x": "#1f4e9c", "y": "#2e8b57", "z": "#b22222"}
LIGHT = {"x": "#8fb0e8", "y": "#96d5b0", "z": "#f09a9a"}
CLASS_COLORS = ["#333333", "#d2691e", "#6a5acd", "#20b2aa", "#c71585", "#808000"]


def _polyline(t, v, x0, y0, w, h, tlim, vlim, color, dash=None, width=1.5):
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    ok = np.isfinite(v)
    if ok.sum() < 2:
        return ""
    span_t = (tlim[1] - tlim[0]) or 1.0
    span_v = (vlim[1] - vlim[0]) or 1.0
    px = x0 + (t[ok] - tlim[0]) / span_t * w
    py = y0 + h - (v[ok] - vlim[0]) / span_v * h
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}"{extra} '
            f'points="{pts}"/>\n')


def _axes(x0, y0, w, h, tlim, vlim, title):
    out = [f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#000"/>\n']
    for frac in (0.0, 0.5, 1.0):
        v = vlim[0] + frac * (vlim[1] - vlim[0])
        y = y0 + h - frac * h
        out.append(f'<text x="{x0 - 6}" y="{y + 4:.1f}" font-size="11" text-anchor="end">{v:.2g}</text>\n')
        t = tlim[0] + frac * (tlim[1] - tlim[0])
        x = x0 + frac * w
        out.append(f'<text x="{x:.1f}" y="{y0 + h + 15}" font-size="11" text-anchor="middle">{t:.3g}</text>\n')
    out.append(f'<text x="{x0}" y="{y0 - 8}" font-size="13">{escape(title)}</text>\n')
    return "".join(out)


def bloch_figure(times, exact, mc=None, populations=None, title=""):
    """SVG text: Bloch components (top) and class weights (bottom).

    ``exact`` and ``mc`` map component names to arrays on ``times``;
    ``populations`` maps class ids to (times, weights).
    """
    times = np.asarray(times, dtype=float)
    tlim = (float(times[0]), float(times[-1]) if len(times) > 1 else float(times[0]) + 1.0)
    w = WIDTH - 2 * MARGIN
    h = PANEL_H - MARGIN
    height = 2 * PANEL_H + MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">\n',
        '<rect width="100%" height="100%" fill="white"/>\n',
    ]
    top = MARGIN
    parts.append(_axes(MARGIN, top, w, h, tlim, (-1, 1), title or "Bloch vector"))
    for k in ("x", "y", "z"):
        if mc is not None and k in mc:
            parts.append(_polyline(times, mc[k], MARGIN, top, w, h, tlim, (-1, 1), LIGHT[k], width=2.5))
        parts.append(_polyline(times, exact[k], MARGIN, top, w, h, tlim, (-1, 1), COLORS[k]))
    for n, k in enumerate(("x", "y", "z")):
        parts.append(f'<text x="{MARGIN + w - 60 + 20 * n}" y="{top + 14}" font-size="12" '
                     f'fill="{COLORS[k]}">{k}</text>\n')

    bottom = top + PANEL_H
    parts.append(_axes(MARGIN, bottom, w, h, tlim, (0, 1), "class weights"))
    if populations:
        for n, (cid, (t, wgt)) in enumerate(sorted(populations.items())):
            color = CLASS_COLORS[n % len(CLASS_COLORS)]
            parts.append(_polyline(t, wgt, MARGIN, bottom, w, h, tlim, (0, 1), color))
    else:
        parts.append(f'<text x="{MARGIN + w / 2}" y="{bottom + h / 2}" font-size="12" '
                     'text-anchor="middle" fill="#777">no class ensemble in this mode</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)
