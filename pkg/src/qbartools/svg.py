"""Minimal self-contained SVG plotting (no plotting library dependency).

Convenience surface only: line plots, complex-plane scatter, and 2-D maps.
Nothing downstream depends on pixel content.
"""

from __future__ import annotations

import numpy as np

from .emit import atomic_write_text


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = np.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(float(t))
        t += step
    return ticks


class Canvas:
    def __init__(self, width=640, height=420, margin=(64, 16, 28, 52)):
        self.width, self.height = width, height
        self.ml, self.mr, self.mt, self.mb = margin
        self.parts = []

    def add(self, s: str):
        self.parts.append(s)

    def axes(self, xlim, ylim, xlabel="", ylabel="", title=""):
        self.xlim, self.ylim = xlim, ylim
        x0, y0 = self.ml, self.height - self.mb
        x1, y1 = self.width - self.mr, self.mt
        self.add('<rect x="%g" y="%g" width="%g" height="%g" fill="white" '
                 'stroke="black" stroke-width="1"/>' % (x0, y1, x1 - x0, y0 - y1))
        for tx in _nice_ticks(*xlim):
            px = self.px(tx)
            self.add('<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="#ccc"/>' % (px, y0, px, y1))
            self.add('<text x="%g" y="%g" font-size="11" text-anchor="middle">%g</text>'
                     % (px, y0 + 16, tx))
        for ty in _nice_ticks(*ylim):
            py = self.py(ty)
            self.add('<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="#ccc"/>' % (x0, py, x1, py))
            self.add('<text x="%g" y="%g" font-size="11" text-anchor="end">%g</text>'
                     % (x0 - 6, py + 4, ty))
        if xlabel:
            self.add('<text x="%g" y="%g" font-size="13" text-anchor="middle">%s</text>'
                     % ((x0 + x1) / 2, self.height - 8, xlabel))
        if ylabel:
            self.add('<text x="14" y="%g" font-size="13" text-anchor="middle" '
                     'transform="rotate(-90 14 %g)">%s</text>'
                     % ((y0 + y1) / 2, (y0 + y1) / 2, ylabel))
        if title:
            self.add('<text x="%g" y="%g" font-size="14" text-anchor="middle" '
                     'font-weight="bold">%s</text>' % ((x0 + x1) / 2, self.mt - 4, title))

    def px(self, x):
        x0, x1 = self.xlim
        return self.ml + (x - x0) / (x1 - x0) * (self.width - self.ml - self.mr)

    def py(self, y):
        y0, y1 = self.ylim
        return (self.height - self.mb
                - (y - y0) / (y1 - y0) * (self.height - self.mt - self.mb))

    def polyline(self, x, y, color="#1f77b4", width=1.5, dash=None):
        pts = " ".join("%.2f,%.2f" % (self.px(a), self.py(b))
                       for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b))
        extra = ' stroke-dasharray="%s"' % dash if dash else ""
        self.add('<polyline points="%s" fill="none" stroke="%s" stroke-width="%g"%s/>'
                 % (pts, color, width, extra))

    def dots(self, x, y, color="#1f77b4", r=2.0):
        for a, b in zip(x, y):
            if np.isfinite(a) and np.isfinite(b):
                self.add('<circle cx="%.2f" cy="%.2f" r="%g" fill="%s"/>'
                         % (self.px(a), self.py(b), r, color))

    def text(self, x, y, s, color="#333"):
        self.add('<text x="%g" y="%g" font-size="12" fill="%s">%s</text>'
                 % (self.px(x), self.py(y), color, s))

    def render(self) -> str:
        return ('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">\n'
                % (self.width, self.height)
                + "\n".join(self.parts) + "\n</svg>\n")


def _limits(arr, pad=0.05):
    arr = np.asarray(arr, dtype=float)
    lo, hi = float(np.min(arr)), float(np.max(arr))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - pad * span, hi + pad * span


def line_plot(path, series, xlabel="", ylabel="", title=""):
    """series: list of (x, y, color, dash) tuples sharing axes."""
    allx = np.concatenate([np.asarray(s[0], float) for s in series])
    ally = np.concatenate([np.asarray(s[1], float) for s in series])
    cv = Canvas()
    cv.axes(_limits(allx), _limits(ally), xlabel, ylabel, title)
    for x, y, color, dash in series:
        cv.polyline(x, y, color=color, dash=dash)
    atomic_write_text(path, cv.render())


def plane_plot(path, points, curve=None, title=""):
    """Complex-plane scatter with an optional overlay curve."""
    pts = np.asarray(points, dtype=complex)
    allre = [pts.real]
    allim = [pts.imag]
    if curve is not None:
        curve = np.asarray(curve, dtype=complex)
        allre.append(curve.real)
        allim.append(curve.imag)
    lim_r = _limits(np.concatenate(allre))
    lim_i = _limits(np.concatenate(allim))
    cv = Canvas(width=480, height=480)
    cv.axes(lim_r, lim_i, "Re", "Im", title)
    cv.dots(pts.real, pts.imag)
    if curve is not None:
        cv.polyline(curve.real, curve.imag, color="#d62728", dash="5,3")
    atomic_write_text(path, cv.render())


def _viridis(u: float) -> str:
    anchors = [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)]
    u = min(max(u, 0.0), 1.0) * (len(anchors) - 1)
    i = min(int(u), len(anchors) - 2)
    t = u - i
    c0, c1 = anchors[i], anchors[i + 1]
    rgb = tuple(int(round(a + (b - a) * t)) for a, b in zip(c0, c1))
    return "#%02x%02x%02x" % rgb


def heatmap(path, x, y, z, xlabel="", ylabel="", title=""):
    """z[i, j] drawn at (y[i] rows, x[j] columns), viridis-like colors."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    z = np.asarray(z, float)
    zmin, zmax = float(np.min(z)), float(np.max(z))
    span = (zmax - zmin) or 1.0
    cv = Canvas(width=560, height=480)
    cv.axes((x[0], x[-1]), (y[0], y[-1]), xlabel, ylabel, title)

    def edges(v):
        mid = 0.5 * (v[1:] + v[:-1])
        first = v[0] - (mid[0] - v[0]) if v.size > 1 else v[0] - 0.5
        last = v[-1] + (v[-1] - mid[-1]) if v.size > 1 else v[-1] + 0.5
        return np.concatenate([[first], mid, [last]])

    xe, ye = edges(x), edges(y)
    for i in range(y.size):
        for j in range(x.size):
            px0, px1 = cv.px(xe[j]), cv.px(xe[j + 1])
            py0, py1 = cv.py(ye[i]), cv.py(ye[i + 1])
            cv.add('<rect x="%.2f" y="%.2f" width="%.2f" height="%.2f" fill="%s"/>'
                   % (min(px0, px1), min(py0, py1), abs(px1 - px0), abs(py1 - py0),
                      _viridis((z[i, j] - zmin) / span)))
    atomic_write_text(path, cv.render())
