"""Self-contained SVG rendering of a spectrum in the complex plane.

Output is plain text assembled in a fixed order with fixed number formatting,
so identical input gives identical bytes.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .eig import DISCRETE, ESSENTIAL, UNCLASSIFIED

__all__ = ["emit_svg", "render_svg"]

WIDTH, HEIGHT = 640, 480
MARGIN = 48
_COLORS = {ESSENTIAL: "#1f77b4", DISCRETE: "#d62728", UNCLASSIFIED: "#7f7f7f"}
_SEGMENT = "#2ca02c"
_REGION = "#9467bd"
_MARKER = "#ff7f0e"


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_step(span: float) -> float:
    raw = span / 6.0
    mag = 10.0 ** np.floor(np.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if raw <= m * mag:
            return m * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float, step: float) -> list[float]:
    # round away binary noise and negative zero so labels read "0", "0.5", ...
    return [round(k * step, 12) + 0.0 for k in range(int(np.ceil(lo / step)), int(np.floor(hi / step)) + 1)]


class _Frame:
    """Maps the complex plane to SVG pixels with equal scale on both axes."""

    def __init__(self, pts: np.ndarray):
        re = np.append(pts.real, [0.0, 1.0])
        im = np.append(pts.imag, [0.0])
        x0, x1 = re.min(), re.max()
        y0, y1 = im.min(), im.max()
        pad = 0.08 * max(x1 - x0, y1 - y0, 1.0)
        x0, x1, y0, y1 = x0 - pad, x1 + pad, y0 - pad, y1 + pad
        sx = (WIDTH - 2 * MARGIN) / (x1 - x0)
        sy = (HEIGHT - 2 * MARGIN) / (y1 - y0)
        self.s = min(sx, sy)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        self.x0 = cx - 0.5 * (WIDTH - 2 * MARGIN) / self.s
        self.x1 = cx + 0.5 * (WIDTH - 2 * MARGIN) / self.s
        self.y0 = cy - 0.5 * (HEIGHT - 2 * MARGIN) / self.s
        self.y1 = cy + 0.5 * (HEIGHT - 2 * MARGIN) / self.s

    def x(self, re: float) -> float:
        return MARGIN + (re - self.x0) * self.s

    def y(self, im: float) -> float:
        return HEIGHT - MARGIN - (im - self.y0) * self.s

    def clip_line(self, p: complex, d: complex) -> Optional[tuple[complex, complex]]:
        """Portion of the line ``p + t d`` inside the plot window (Liang-Barsky)."""
        t0, t1 = -np.inf, np.inf
        for q, dq, lo, hi in ((p.real, d.real, self.x0, self.x1), (p.imag, d.imag, self.y0, self.y1)):
            if dq == 0:
                if not lo <= q <= hi:
                    return None
                continue
            a, b = (lo - q) / dq, (hi - q) / dq
            t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
        if t0 > t1:
            return None
        return p + t0 * d, p + t1 * d


def _region_points(regions) -> list[complex]:
    pts = []
    for reg in regions:
        for prim in reg.primitives():
            if prim["type"] == "circle":
                c, r = complex(prim["cx"], prim["cy"]), prim["r"]
                pts += [c + r, c - r, c + 1j * r, c - 1j * r]
        pts += list(reg.markers.values())
    return pts


def render_svg(spectrum=None, essential=None, regions: Sequence = (), title: str = "") -> str:
    lam = np.zeros(0, dtype=complex) if spectrum is None else np.asarray(spectrum.eigenvalues, dtype=complex)
    ess = np.zeros(0, dtype=complex) if essential is None else np.asarray(essential.points, dtype=complex)
    frame = _Frame(np.concatenate([lam, ess, np.asarray(_region_points(regions), dtype=complex)]))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')

    # axes and ticks
    out.append('<g id="axes" stroke="#444" stroke-width="1">')
    if frame.y0 <= 0 <= frame.y1:
        out.append(f'<line x1="{MARGIN}" y1="{_f(frame.y(0))}" x2="{WIDTH - MARGIN}" y2="{_f(frame.y(0))}"/>')
    if frame.x0 <= 0 <= frame.x1:
        out.append(f'<line x1="{_f(frame.x(0))}" y1="{MARGIN}" x2="{_f(frame.x(0))}" y2="{HEIGHT - MARGIN}"/>')
    out.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" fill="none"/>')
    out.append("</g>")
    out.append('<g id="ticks" fill="#444">')
    step = _nice_step(frame.x1 - frame.x0)
    for v in _ticks(frame.x0, frame.x1, step):
        out.append(f'<text x="{_f(frame.x(v))}" y="{HEIGHT - MARGIN + 14}" text-anchor="middle">{v:g}</text>')
    for v in _ticks(frame.y0, frame.y1, step):
        out.append(f'<text x="{MARGIN - 4}" y="{_f(frame.y(v) + 4)}" text-anchor="end">{v:g}</text>')
    out.append(f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - 12}" text-anchor="end">Re</text>')
    out.append(f'<text x="12" y="{MARGIN - 8}">Im</text>')
    out.append("</g>")

    if len(ess):
        out.append(f'<g id="essential" stroke="{_SEGMENT}" stroke-width="2" fill="{_SEGMENT}">')
        for p in essential.segment_endpoints:
            out.append(f'<line x1="{_f(frame.x(1.0))}" y1="{_f(frame.y(0.0))}" x2="{_f(frame.x(p.real))}" y2="{_f(frame.y(p.imag))}"/>')
        out.append("</g>")

    if regions:
        out.append(f'<g id="regions" stroke="{_REGION}" stroke-width="1.5" fill="none" stroke-dasharray="6 3">')
        for reg in regions:
            for prim in reg.primitives():
                if prim["type"] == "circle":
                    out.append(f'<circle cx="{_f(frame.x(prim["cx"]))}" cy="{_f(frame.y(prim["cy"]))}" r="{_f(prim["r"] * frame.s)}"/>')
                else:
                    seg = frame.clip_line(complex(prim["px"], prim["py"]), complex(prim["dx"], prim["dy"]))
                    if seg is not None:
                        a, b = seg
                        out.append(f'<line x1="{_f(frame.x(a.real))}" y1="{_f(frame.y(a.imag))}" x2="{_f(frame.x(b.real))}" y2="{_f(frame.y(b.imag))}"/>')
        out.append("</g>")

    if len(lam):
        tags = spectrum.classification
        for tag in (ESSENTIAL, DISCRETE, UNCLASSIFIED):
            sel = lam[tags == tag]
            if not len(sel):
                continue
            out.append(f'<g id="{tag}" fill="{_COLORS[tag]}">')
            for z in sel:
                out.append(f'<circle cx="{_f(frame.x(z.real))}" cy="{_f(frame.y(z.imag))}" r="2"/>')
            out.append("</g>")

    markers = [(k, v) for reg in regions for k, v in sorted(reg.markers.items())]
    if markers:
        out.append(f'<g id="markers" fill="{_MARKER}">')
        for name, z in markers:
            x, y = frame.x(z.real), frame.y(z.imag)
            out.append(f'<rect x="{_f(x - 3)}" y="{_f(y - 3)}" width="6" height="6"/>')
            out.append(f'<text x="{_f(x + 5)}" y="{_f(y - 5)}">{escape(name)}</text>')
        out.append("</g>")

    legend = [(ESSENTIAL, _COLORS[ESSENTIAL]), (DISCRETE, _COLORS[DISCRETE])]
    if len(lam) and np.any(spectrum.classification == UNCLASSIFIED):
        legend.append((UNCLASSIFIED, _COLORS[UNCLASSIFIED]))
    legend.append(("essential segment", _SEGMENT))
    if regions:
        legend.append((f"{regions[0].kind} bound", _REGION))
    if markers:
        legend.append(("marker", _MARKER))
    out.append('<g id="legend">')
    for i, (label, color) in enumerate(legend):
        y = MARGIN + 12 + 15 * i
        out.append(f'<rect x="{WIDTH - MARGIN - 130}" y="{y - 8}" width="9" height="9" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 116}" y="{y}">{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(spectrum, essential, regions: Sequence, path, title: str = "") -> Path:
    path = Path(path)
    path.write_text(render_svg(spectrum, essential, regions, title))
    return path
