"""Tiny deterministic SVG chart writer (line and grouped-bar charts)."""

from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
W, H = 720, 400
ML, MR, MT, MB = 70, 150, 40, 50


def _fmt(v):
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / n
    mag = 10 ** int(f"{raw:e}".split("e")[1])
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = (lo // step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 10))
        v += step
    return ticks


class _Frame:
    def __init__(self, title, xlabel, ylabel, ymin, ymax):
        ticks = _nice_ticks(min(ymin, 0.0), max(ymax, 0.0))
        self.y0, self.y1 = ticks[0], ticks[-1] if ticks[-1] > ticks[0] else ticks[0] + 1
        self.ticks = ticks
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
            f'<rect width="{W}" height="{H}" fill="white"/>',
            f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" font-size="15" font-family="sans-serif">{escape(title)}</text>',
            f'<text x="{ML + (W - ML - MR) / 2:.1f}" y="{H - 10}" text-anchor="middle" font-size="12" font-family="sans-serif">{escape(xlabel)}</text>',
            f'<text x="16" y="{MT + (H - MT - MB) / 2:.1f}" text-anchor="middle" font-size="12" font-family="sans-serif" '
            f'transform="rotate(-90 16 {MT + (H - MT - MB) / 2:.1f})">{escape(ylabel)}</text>',
        ]
        for t in ticks:
            y = self.y(t)
            self.parts.append(f'<line x1="{ML}" y1="{_fmt(y)}" x2="{W - MR}" y2="{_fmt(y)}" stroke="#ddd"/>')
            self.parts.append(f'<text x="{ML - 6}" y="{_fmt(y + 4)}" text-anchor="end" font-size="10" font-family="sans-serif">{t:g}</text>')
        self.parts.append(f'<line x1="{ML}" y1="{_fmt(self.y(0.0))}" x2="{W - MR}" y2="{_fmt(self.y(0.0))}" stroke="#333"/>')

    def y(self, v):
        return MT + (self.y1 - v) / (self.y1 - self.y0) * (H - MT - MB)

    def legend(self, names):
        for k, name in enumerate(names):
            y = MT + 16 * k
            col = PALETTE[k % len(PALETTE)]
            self.parts.append(f'<rect x="{W - MR + 12}" y="{y}" width="12" height="10" fill="{col}"/>')
            self.parts.append(f'<text x="{W - MR + 30}" y="{y + 9}" font-size="11" font-family="sans-serif">{escape(str(name))}</text>')

    def render(self):
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_chart(title, x, series, xlabel="", ylabel=""):
    """``series`` maps a label to y values aligned with ``x``."""
    vals = [v for ys in series.values() for v in ys] or [0.0]
    fr = _Frame(title, xlabel, ylabel, min(vals), max(vals))
    x0, x1 = (min(x), max(x)) if len(x) > 1 else (0.0, 1.0)
    sx = lambda v: ML + (v - x0) / ((x1 - x0) or 1.0) * (W - ML - MR)
    for k, (name, ys) in enumerate(series.items()):
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(fr.y(b))}" for a, b in zip(x, ys))
        fr.parts.append(f'<polyline fill="none" stroke="{PALETTE[k % len(PALETTE)]}" stroke-width="1.6" points="{pts}"/>')
    step = max(1, len(x) // 8)
    for a in list(x)[::step]:
        fr.parts.append(f'<text x="{_fmt(sx(a))}" y="{H - MB + 16}" text-anchor="middle" font-size="10" font-family="sans-serif">{a:g}</text>')
    fr.legend(list(series))
    return fr.render()


def bar_chart(title, categories, series, xlabel="", ylabel=""):
    """Grouped bars: one group per category, one bar per series."""
    vals = [v for ys in series.values() for v in ys] or [0.0]
    fr = _Frame(title, xlabel, ylabel, min(vals), max(vals))
    ng = max(1, len(categories))
    ns = max(1, len(series))
    gw = (W - ML - MR) / ng
    bw = gw * 0.8 / ns
    base = fr.y(0.0)
    for k, (name, ys) in enumerate(series.items()):
        for g, v in enumerate(ys):
            x = ML + g * gw + gw * 0.1 + k * bw
            top = fr.y(v)
            y, h = (top, base - top) if v >= 0 else (base, top - base)
            fr.parts.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bw)}" height="{_fmt(h)}" fill="{PALETTE[k % len(PALETTE)]}"/>')
    for g, c in enumerate(categories):
        fr.parts.append(f'<text x="{_fmt(ML + (g + 0.5) * gw)}" y="{H - MB + 16}" text-anchor="middle" font-size="11" font-family="sans-serif">{escape(str(c))}</text>')
    fr.legend(list(series))
    return fr.render()
