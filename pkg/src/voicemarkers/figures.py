"""Deterministic SVG figures: importance bars, group box plots, scatter.

Plain string assembly, fixed layout constants, %.6g number formatting.
Same inputs give byte-identical files, so figures are diff-able in CI.
"""

import math

__all__ = ["svg_bar", "svg_box", "svg_scatter", "save_svg"]

_FONT = "font-family=\"sans-serif\""


def _fmt(v):
    return "%.6g" % float(v)


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _header(width, height, title):
    parts = [
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\""
        " viewBox=\"0 0 %d %d\">" % (width, height, width, height),
        "<rect width=\"%d\" height=\"%d\" fill=\"white\"/>" % (width, height),
        "<text x=\"%d\" y=\"22\" %s font-size=\"15\" font-weight=\"bold\">%s"
        "</text>" % (width // 2 - 7 * len(title) // 2, _FONT, _esc(title)),
    ]
    return parts


def svg_bar(items, title, highlight=()):
    """Horizontal bar chart; items are (label, value) top-down.

    Labels in highlight get the accent fill (shared-feature marking).
    """
    width, row_h, top, left = 760, 24, 40, 230
    height = top + row_h * max(len(items), 1) + 20
    vmax = max((abs(v) for _, v in items), default=0.0) or 1.0
    span = width - left - 30
    parts = _header(width, height, title)
    for i, (label, value) in enumerate(items):
        y = top + i * row_h
        w = abs(value) / vmax * span
        fill = "#d0622a" if label in highlight else "#4878a8"
        parts.append("<text x=\"%d\" y=\"%s\" %s font-size=\"12\" "
                     "text-anchor=\"end\">%s</text>"
                     % (left - 8, _fmt(y + row_h * 0.7), _FONT, _esc(label)))
        parts.append("<rect x=\"%d\" y=\"%s\" width=\"%s\" height=\"%d\" "
                     "fill=\"%s\"/>" % (left, _fmt(y + 4), _fmt(w),
                                        row_h - 8, fill))
        parts.append("<text x=\"%s\" y=\"%s\" %s font-size=\"11\">%s</text>"
                     % (_fmt(left + w + 4), _fmt(y + row_h * 0.7), _FONT,
                        _fmt(value)))
    parts.append("</svg>")
    return "\n".join(parts)


def _quartiles(values):
    v = sorted(float(x) for x in values if not math.isnan(x))
    if not v:
        return None
    n = len(v)

    def q(frac):
        pos = frac * (n - 1)
        lo = int(math.floor(pos))
        hi = min(lo + 1, n - 1)
        return v[lo] + (v[hi] - v[lo]) * (pos - lo)

    return v[0], q(0.25), q(0.5), q(0.75), v[-1]


def svg_box(feature_rows, title):
    """Paired low/high box plots per feature.

    feature_rows: (label, low_values, high_values, marker) tuples; marker
    is the significance string drawn above the pair.
    """
    width, row_w, top = 90 + 110 * max(len(feature_rows), 1), 110, 46
    height = 320
    plot_h = height - top - 50
    parts = _header(width, height, title)
    all_vals = [x for _, lo, hi, _ in feature_rows for x in list(lo) + list(hi)
                if not math.isnan(x)]
    vmin, vmax = (min(all_vals), max(all_vals)) if all_vals else (0.0, 1.0)
    if vmax == vmin:
        vmax = vmin + 1.0

    def ypix(v):
        return top + plot_h * (1.0 - (v - vmin) / (vmax - vmin))

    for i, (label, low, high, marker) in enumerate(feature_rows):
        x0 = 70 + i * row_w
        for k, (vals, fill) in enumerate(((low, "#7aa6c2"),
                                          (high, "#c2707a"))):
            stats = _quartiles(vals)
            if stats is None:
                continue
            mn, q1, med, q3, mx = stats
            cx = x0 + k * 42
            parts.append("<line x1=\"%d\" y1=\"%s\" x2=\"%d\" y2=\"%s\" "
                         "stroke=\"#444\"/>" % (cx + 14, _fmt(ypix(mx)),
                                                cx + 14, _fmt(ypix(mn))))
            parts.append("<rect x=\"%d\" y=\"%s\" width=\"28\" height=\"%s\" "
                         "fill=\"%s\" stroke=\"#333\"/>"
                         % (cx, _fmt(ypix(q3)),
                            _fmt(max(ypix(q1) - ypix(q3), 0.5)), fill))
            parts.append("<line x1=\"%d\" y1=\"%s\" x2=\"%d\" y2=\"%s\" "
                         "stroke=\"#111\" stroke-width=\"2\"/>"
                         % (cx, _fmt(ypix(med)), cx + 28, _fmt(ypix(med))))
        if marker:
            parts.append("<text x=\"%d\" y=\"%d\" %s font-size=\"13\" "
                         "text-anchor=\"middle\">%s</text>"
                         % (x0 + 35, top - 6, _FONT, _esc(marker)))
        parts.append("<text x=\"%d\" y=\"%d\" %s font-size=\"11\" "
                     "text-anchor=\"middle\">%s</text>"
                     % (x0 + 35, height - 28, _FONT, _esc(label)))
    parts.append("<text x=\"70\" y=\"%d\" %s font-size=\"11\">"
                 "blue = low group, red = high group</text>"
                 % (height - 10, _FONT))
    parts.append("</svg>")
    return "\n".join(parts)


def svg_scatter(x, y, xlabel, ylabel, title, annotation=""):
    """Scatter of paired values with axis labels and a free annotation."""
    width, height, left, top = 560, 420, 70, 40
    plot_w, plot_h = width - left - 30, height - top - 60
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    pairs = [(a, b) for a, b in zip(xs, ys)
             if not (math.isnan(a) or math.isnan(b))]
    parts = _header(width, height, title)
    if pairs:
        xmin, xmax = min(a for a, _ in pairs), max(a for a, _ in pairs)
        ymin, ymax = min(b for _, b in pairs), max(b for _, b in pairs)
        if xmax == xmin:
            xmax = xmin + 1.0
        if ymax == ymin:
            ymax = ymin + 1.0
        for a, b in pairs:
            px = left + plot_w * (a - xmin) / (xmax - xmin)
            py = top + plot_h * (1.0 - (b - ymin) / (ymax - ymin))
            parts.append("<circle cx=\"%s\" cy=\"%s\" r=\"3.5\" "
                         "fill=\"#4878a8\" fill-opacity=\"0.7\"/>"
                         % (_fmt(px), _fmt(py)))
    parts.append("<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                 "fill=\"none\" stroke=\"#888\"/>" % (left, top, plot_w,
                                                      plot_h))
    parts.append("<text x=\"%d\" y=\"%d\" %s font-size=\"12\" "
                 "text-anchor=\"middle\">%s</text>"
                 % (left + plot_w // 2, height - 20, _FONT, _esc(xlabel)))
    parts.append("<text x=\"18\" y=\"%d\" %s font-size=\"12\" "
                 "transform=\"rotate(-90 18 %d)\" text-anchor=\"middle\">%s"
                 "</text>" % (top + plot_h // 2, _FONT, top + plot_h // 2,
                              _esc(ylabel)))
    if annotation:
        parts.append("<text x=\"%d\" y=\"%d\" %s font-size=\"12\">%s</text>"
                     % (left + 8, top + 18, _FONT, _esc(annotation)))
    parts.append("</svg>")
    return "\n".join(parts)


def save_svg(svg, path):
    with open(path, "w") as fh:
        fh.write(svg + "\n")
