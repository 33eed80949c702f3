"""Minimal deterministic SVG charts (line panels and bar charts).

Output depends only on the data: no timestamps, random ids or font metrics.
"""
import math
from xml.sax.saxutils import escape

WIDTH, PANEL_HEIGHT = 640, 300
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 40
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd")


def _fmt(x):
    return f"{x:.2f}"


def _tick_label(x):
    return f"{x:.3g}"


def _nice_ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= step), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(first + k * step)
        k += 1
    return ticks


def _panel(title, series, y0, xlabel, ylabel, log_y):
    """series: list of (label, xs, ys)."""
    out = []
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if log_y:
        ys_all = [math.log10(y) for y in ys_all if y > 0]
    finite = [y for y in ys_all if math.isfinite(y)]
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = PANEL_HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return y0 + MARGIN_T + (1.0 - (y - ylo) / (yhi - ylo)) * ph

    out.append(f'<text x="{_fmt(WIDTH / 2)}" y="{_fmt(y0 + 18)}" text-anchor="middle" '
               f'font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{MARGIN_L}" y="{_fmt(y0 + MARGIN_T)}" width="{pw}" height="{ph}" '
               'fill="none" stroke="#444"/>')
    for tx in _nice_ticks(xlo, xhi):
        out.append(f'<text x="{_fmt(px(tx))}" y="{_fmt(y0 + MARGIN_T + ph + 15)}" '
                   f'text-anchor="middle" font-size="10">{_tick_label(tx)}</text>')
    for ty in _nice_ticks(ylo, yhi):
        label = _tick_label(10 ** ty) if log_y else _tick_label(ty)
        out.append(f'<text x="{MARGIN_L - 5}" y="{_fmt(py(ty) + 3)}" text-anchor="end" '
                   f'font-size="10">{label}</text>')
    out.append(f'<text x="{_fmt(WIDTH / 2)}" y="{_fmt(y0 + PANEL_HEIGHT - 5)}" '
               f'text-anchor="middle" font-size="11">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{_fmt(y0 + MARGIN_T + ph / 2)}" font-size="11" '
               f'transform="rotate(-90 14 {_fmt(y0 + MARGIN_T + ph / 2)})" '
               f'text-anchor="middle">{escape(ylabel)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        pts = []
        for x, y in zip(xs, ys):
            if log_y:
                if not y > 0:
                    continue
                y = math.log10(y)
            if math.isfinite(y):
                pts.append(f"{_fmt(px(x))},{_fmt(py(y))}")
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'points="{" ".join(pts)}"/>')
        ly = y0 + MARGIN_T + 14 + 14 * i
        out.append(f'<line x1="{WIDTH - MARGIN_R - 110}" y1="{_fmt(ly - 4)}" '
                   f'x2="{WIDTH - MARGIN_R - 90}" y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{WIDTH - MARGIN_R - 85}" y="{_fmt(ly)}" font-size="10">'
                   f'{escape(label)}</text>')
    return out


def line_chart(panels):
    """panels: list of dicts with keys title, series, xlabel, ylabel, log_y."""
    height = PANEL_HEIGHT * len(panels)
    body = []
    for k, p in enumerate(panels):
        body.extend(_panel(p["title"], p["series"], k * PANEL_HEIGHT, p.get("xlabel", ""),
                           p.get("ylabel", ""), p.get("log_y", False)))
    return _document(height, body)


def bar_chart(title, labels, values, ylabel=""):
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = PANEL_HEIGHT - MARGIN_T - MARGIN_B
    finite = [v for v in values if math.isfinite(v)]
    vmax = max(finite) if finite and max(finite) > 0 else 1.0
    body = [f'<text x="{_fmt(WIDTH / 2)}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
            f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="#444"/>',
            f'<text x="14" y="{_fmt(MARGIN_T + ph / 2)}" font-size="11" '
            f'transform="rotate(-90 14 {_fmt(MARGIN_T + ph / 2)})" text-anchor="middle">{escape(ylabel)}</text>']
    slot = pw / max(len(labels), 1)
    for i, (label, v) in enumerate(zip(labels, values)):
        x = MARGIN_L + i * slot + 0.15 * slot
        cx = MARGIN_L + (i + 0.5) * slot
        body.append(f'<text x="{_fmt(cx)}" y="{MARGIN_T + ph + 15}" text-anchor="middle" '
                    f'font-size="11">{escape(label)}</text>')
        if not math.isfinite(v):
            body.append(f'<text x="{_fmt(cx)}" y="{MARGIN_T + ph - 5}" text-anchor="middle" '
                        'font-size="10">n/a</text>')
            continue
        h = v / vmax * ph
        body.append(f'<rect x="{_fmt(x)}" y="{_fmt(MARGIN_T + ph - h)}" width="{_fmt(0.7 * slot)}" '
                    f'height="{_fmt(h)}" fill="{COLORS[i % len(COLORS)]}"/>')
        body.append(f'<text x="{_fmt(cx)}" y="{_fmt(MARGIN_T + ph - h - 4)}" text-anchor="middle" '
                    f'font-size="10">{v:.3g}</text>')
    return _document(PANEL_HEIGHT, body)


def _document(height, body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
            f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"
