"""Native SVG rendering for all chart subtypes.

Geometry is deterministic: every coordinate is printed with three decimals and
text width is approximated as 0.6 * font-size per character, so equal specs
give byte-identical documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from html import escape
from typing import Iterable

from .charts import BOX, HORIZONTAL, ChartSpec
from .errors import RenderOverflow

CANVAS = (800, 600)
MARGIN = 60
GROW = 1.5
TITLE_FS = 16
LABEL_FS = 10
CHAR_W = 0.6

NEUTRALS = {
    "light": {"bg": "#ffffff", "text": "#333333", "axis": "#666666", "grid": "#e6e6e6"},
    "dark": {"bg": "#1f2329", "text": "#e8e8e8", "axis": "#b8b8b8", "grid": "#3a3f47"},
}


def text_width(s: str, fs: float = LABEL_FS) -> float:
    return CHAR_W * fs * len(s)


def label_lines(s: str, limit: float = 0.0, fs: float = LABEL_FS) -> list[str]:
    """Split a label in two at the word break nearest its middle when wider than ``limit``."""
    if not limit or text_width(s, fs) <= limit:
        return [s]
    breaks = [k for k, ch in enumerate(s) if ch in " _-"]
    if not breaks:
        return [s]
    k = min(breaks, key=lambda k: abs(k - len(s) / 2))
    head = s[:k + 1] if s[k] == "-" else s[:k]
    return [head, s[k + 1:]]


def fmt_value(v: float) -> str:
    return f"{v:.2f}"


def _n(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


@dataclass
class El:
    tag: str
    attrs: dict
    text: str | None = None
    children: list = field(default_factory=list)

    def render(self, out: list[str], indent: int = 1) -> None:
        pad = " " * indent
        attrs = "".join(f' {k}="{escape(str(v), quote=True)}"' for k, v in self.attrs.items())
        if self.children:
            out.append(f"{pad}<{self.tag}{attrs}>")
            for c in self.children:
                c.render(out, indent + 1)
            out.append(f"{pad}</{self.tag}>")
        elif self.text is not None:
            out.append(f"{pad}<{self.tag}{attrs}>{escape(self.text, quote=False)}</{self.tag}>")
        else:
            out.append(f"{pad}<{self.tag}{attrs}/>")


@dataclass
class SvgDoc:
    width: float
    height: float
    background: str
    elements: list[El] = field(default_factory=list)

    def add(self, el: El) -> El:
        self.elements.append(el)
        return el

    def body_lines(self, indent: int = 1) -> list[str]:
        out: list[str] = []
        El("rect", {"class": "background", "x": "0", "y": "0", "width": _n(self.width),
                    "height": _n(self.height), "fill": self.background}).render(out, indent)
        for el in self.elements:
            el.render(out, indent)
        return out

    def to_string(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_n(self.width)}" '
                f'height="{_n(self.height)}" viewBox="0 0 {_n(self.width)} {_n(self.height)}" '
                f'font-family="sans-serif">')
        return "\n".join(['<?xml version="1.0" encoding="UTF-8"?>', head,
                          *self.body_lines(), "</svg>"]) + "\n"


@dataclass(frozen=True)
class AxisScale:
    domain: tuple[float, float]
    range: tuple[float, float]
    orientation: str = "vertical"

    def __post_init__(self):
        if not self.domain[0] < self.domain[1]:
            raise ValueError(f"degenerate scale domain {self.domain}")

    def inverse(self, p: float) -> float:
        (d0, d1), (r0, r1) = self.domain, self.range
        return d0 + (p - r0) / (r1 - r0) * (d1 - d0)

    def attr(self) -> str:
        return f"{self.domain[0]!r} {self.domain[1]!r} {self.range[0]!r} {self.range[1]!r}"


def data_to_pixels(scale: AxisScale, v: float) -> float:
    (d0, d1), (r0, r1) = scale.domain, scale.range
    return r0 + (v - d0) / (d1 - d0) * (r1 - r0)


def nice_ticks(lo: float, hi: float) -> list[float]:
    """5-8 ticks on a 1/2/5 x 10^k step covering [lo, hi]."""
    if hi < lo:
        lo, hi = hi, lo
    if hi - lo < 1e-6:   # data carry two decimals; anything narrower is a flat series
        hi = lo + 1.0
    span = hi - lo
    k = math.floor(math.log10(span / 7)) - 1
    while True:
        for m in (1, 2, 5):
            step = m * 10.0 ** k
            a, b = math.floor(lo / step + 1e-9), math.ceil(hi / step - 1e-9)
            if b - a <= 7:
                if b - a < 4:
                    b = a + 4
                return [round(i * step, 10) for i in range(a, b + 1)]
        k += 1


def tick_label(t: float, ticks: list[float]) -> str:
    step = ticks[1] - ticks[0]
    decimals = max(0, -math.floor(math.log10(step) + 1e-9))
    return f"{t:.{decimals}f}"


class _Overflow(Exception):
    pass


@dataclass
class _Ctx:
    spec: ChartSpec
    doc: SvgDoc
    width: float
    height: float
    colors: dict
    neutral: dict
    top: float = MARGIN

    def text(self, x, y, s, cls, anchor="middle", fs=LABEL_FS, **extra):
        attrs = {"class": cls, "x": _n(x), "y": _n(y), "font-size": str(fs),
                 "text-anchor": anchor, "fill": self.neutral["text"]}
        attrs.update(extra)
        return self.doc.add(El("text", attrs, s))

    def line(self, x1, y1, x2, y2, cls, stroke=None, **extra):
        attrs = {"class": cls, "x1": _n(x1), "y1": _n(y1), "x2": _n(x2), "y2": _n(y2),
                 "stroke": stroke or self.neutral["axis"], "stroke-width": "1"}
        attrs.update(extra)
        return self.doc.add(El("line", attrs))


# ---------------------------------------------------------------- shared pieces

def _series_values(spec: ChartSpec):
    t = spec.table
    return list(zip(t.legend_labels, t.values))


def _legend_items(spec: ChartSpec) -> list[str]:
    name = spec.subtype.name
    if name == "Multi Boxplot" or name == "Nesting Pie":
        return list(spec.table.entity_names)
    if len(spec.table.legend_labels) > 1 and spec.subtype.family != "box":
        return list(spec.table.legend_labels)
    return []


def _draw_title_and_legend(ctx: _Ctx) -> None:
    spec = ctx.spec
    ctx.text(ctx.width / 2, 30, spec.title, "title", fs=TITLE_FS)
    items = _legend_items(spec)
    if not items:
        ctx.top = MARGIN
        return
    widths = [18 + text_width(s) + 12 for s in items]
    max_w = ctx.width - 2 * MARGIN
    rows, row, acc = [], [], 0.0
    for s, w in zip(items, widths):
        if row and acc + w > max_w:
            rows.append(row)
            row, acc = [], 0.0
        row.append((s, w))
        acc += w
    rows.append(row)
    y = 48
    for r in rows:
        total = sum(w for _, w in r)
        # light: top-right, dark: top-left
        x = ctx.width - MARGIN - total if spec.style.background == "light" else MARGIN
        for s, w in r:
            ctx.doc.add(El("rect", {"class": "legend-swatch", "x": _n(x), "y": _n(y - 9),
                                    "width": "12", "height": "10", "fill": ctx.colors[s]}))
            ctx.text(x + 16, y, s, "legend", anchor="start")
            x += w
        y += 16
    ctx.top = max(MARGIN, y + 4)


def _value_domain(spec: ChartSpec) -> tuple[float, float]:
    name = spec.subtype.name
    t = spec.table
    if name in BOX:
        vals = [v for s in spec.extras["box_stats"].values() for v in s]
        return min(0.0, min(vals)), max(0.0, max(vals))
    if name == "Waterfall Bar":
        acc, cums = 0.0, [0.0]
        for v in t.values[0]:
            acc += v
            cums.append(acc)
        return min(cums), max(cums)
    if "Stack" in name:
        pos = [sum(max(r[j], 0) for r in t.values) for j in range(len(t.entity_names))]
        neg = [sum(min(r[j], 0) for r in t.values) for j in range(len(t.entity_names))]
        return min(0.0, min(neg)), max(0.0, max(pos))
    vals = [v for r in t.values for v in r]
    return min(0.0, min(vals)), max(0.0, max(vals))


def _value_scale(spec, lo_px, hi_px, orientation) -> tuple[AxisScale, list[float]]:
    ticks = nice_ticks(*_value_domain(spec))
    return AxisScale((ticks[0], ticks[-1]), (lo_px, hi_px), orientation), ticks


# ---------------------------------------------------------------- cartesian

@dataclass
class _Plot:
    x0: float
    y0: float
    x1: float
    y1: float
    horizontal: bool
    vscale: AxisScale
    ticks: list[float]

    @property
    def n_extent(self):
        return (self.y1 - self.y0) if self.horizontal else (self.x1 - self.x0)

    def band(self, i: int, n: int) -> tuple[float, float]:
        w = self.n_extent / n
        start = self.y0 if self.horizontal else self.x0
        return start + i * w, start + (i + 1) * w


def _cartesian_plot(ctx: _Ctx) -> _Plot:
    spec = ctx.spec
    horizontal = spec.subtype.name in HORIZONTAL
    cats = spec.table.entity_names
    n = len(cats)
    y0 = ctx.top + 10
    y1 = ctx.height - MARGIN
    if horizontal:
        left = MARGIN + max(text_width(c) for c in cats) + 8
        x0, x1 = left, ctx.width - MARGIN
        if x1 - x0 < ctx.width * 0.4 or (y1 - y0) / n < LABEL_FS + 2:
            raise _Overflow
        vscale, ticks = _value_scale(spec, x0, x1, "horizontal")
    else:
        x0, x1 = MARGIN + 20, ctx.width - MARGIN
        band = (x1 - x0) / n
        if max(text_width(x) for c in cats for x in label_lines(c, band - 4)) + 4 > band:
            raise _Overflow
        vscale, ticks = _value_scale(spec, y1, y0, "vertical")
    return _Plot(x0, y0, x1, y1, horizontal, vscale, ticks)


def _draw_axes(ctx: _Ctx, p: _Plot) -> None:
    spec = ctx.spec
    cats = spec.table.entity_names
    n = len(cats)
    g = ctx.doc.add(El("g", {"class": "plot", "data-scale": p.vscale.attr(),
                             "data-orientation": p.vscale.orientation}))
    for t in p.ticks:
        pos = data_to_pixels(p.vscale, t)
        label = tick_label(t, p.ticks)
        if p.horizontal:
            g.children.append(El("line", {"class": "grid", "x1": _n(pos), "y1": _n(p.y0),
                                          "x2": _n(pos), "y2": _n(p.y1),
                                          "stroke": ctx.neutral["grid"]}))
            ctx.line(pos, p.y1, pos, p.y1 + 5, "tick")
            ctx.text(pos, p.y1 + 18, label, "tick-label")
        else:
            g.children.append(El("line", {"class": "grid", "x1": _n(p.x0), "y1": _n(pos),
                                          "x2": _n(p.x1), "y2": _n(pos),
                                          "stroke": ctx.neutral["grid"]}))
            ctx.line(p.x0 - 5, pos, p.x0, pos, "tick")
            ctx.text(p.x0 - 8, pos + 3.5, label, "tick-label", anchor="end")
    if not g.children:
        g.text = ""
    ctx.line(p.x0, p.y1, p.x1, p.y1, "axis")
    ctx.line(p.x0, p.y0, p.x0, p.y1, "axis")
    for i, c in enumerate(cats):
        a, b = p.band(i, n)
        mid = (a + b) / 2
        if p.horizontal:
            ctx.text(p.x0 - 8, mid + 3.5, c, "category-label", anchor="end")
        else:
            lines = label_lines(c, b - a - 4)
            if len(lines) == 1:
                ctx.text(mid, p.y1 + 16, c, "category-label")
            else:
                el = ctx.text(mid, p.y1 + 16, None, "category-label", **{"data-label": c})
                el.children = [El("tspan", {"x": _n(mid), "dy": "0" if k == 0 else str(LABEL_FS + 2)}, x)
                               for k, x in enumerate(lines)]
    ctx.text((p.x0 + p.x1) / 2, ctx.height - 15, spec.x_title, "axis-title", fs=12)
    ctx.text(18, (p.y0 + p.y1) / 2, spec.y_title, "axis-title", fs=12,
             transform=f"rotate(-90 18 {_n((p.y0 + p.y1) / 2)})")


def _bar_rect(ctx, p: _Plot, a: float, b: float, v0: float, v1: float, color, series, entity,
              cls="mark"):
    """Rect spanning band [a, b] and value interval [v0, v1]."""
    s0, s1 = data_to_pixels(p.vscale, v0), data_to_pixels(p.vscale, v1)
    if p.horizontal:
        attrs = {"x": _n(min(s0, s1)), "y": _n(a), "width": _n(abs(s1 - s0)), "height": _n(b - a)}
    else:
        attrs = {"x": _n(a), "y": _n(min(s0, s1)), "width": _n(b - a), "height": _n(abs(s1 - s0))}
    attrs = {"class": cls, "data-series": series, "data-entity": entity, **attrs, "fill": color}
    return ctx.doc.add(El("rect", attrs))


def _value_label(ctx, p: _Plot, mid: float, v_end: float, v: float) -> None:
    pos = data_to_pixels(p.vscale, v_end)
    if p.horizontal:
        ctx.text(pos + 4, mid + 3.5, fmt_value(v), "value-label", anchor="start", fs=9)
    else:
        ctx.text(mid, pos - 4, fmt_value(v), "value-label", fs=9)


def _draw_bars(ctx: _Ctx, p: _Plot) -> None:
    spec = ctx.spec
    name = spec.subtype.name
    t = spec.table
    n = len(t.entity_names)
    series = _series_values(spec)
    if name == "Waterfall Bar":
        label, row = series[0]
        acc = 0.0
        for i, (e, v) in enumerate(zip(t.entity_names, row)):
            a, b = p.band(i, n)
            w = (b - a) * 0.6
            lo = a + (b - a - w) / 2
            _bar_rect(ctx, p, lo, lo + w, acc, acc + v, ctx.colors[label], label, e)
            _value_label(ctx, p, (a + b) / 2, max(acc, acc + v), v)
            acc += v
        return
    if "Stack" in name:
        for i, e in enumerate(t.entity_names):
            a, b = p.band(i, n)
            w = (b - a) * 0.6
            lo = a + (b - a - w) / 2
            pos_acc = neg_acc = 0.0
            for label, row in series:
                v = row[i]
                if v >= 0:
                    _bar_rect(ctx, p, lo, lo + w, pos_acc, pos_acc + v, ctx.colors[label], label, e)
                    pos_acc += v
                else:
                    _bar_rect(ctx, p, lo, lo + w, neg_acc + v, neg_acc, ctx.colors[label], label, e)
                    neg_acc += v
            _value_label(ctx, p, (a + b) / 2, pos_acc, pos_acc + neg_acc)
        return
    k = len(series)
    for i, e in enumerate(t.entity_names):
        a, b = p.band(i, n)
        w = (b - a) * (0.8 if k > 1 else 0.6)
        lo = a + (b - a - w) / 2
        sub = w / k
        for s, (label, row) in enumerate(series):
            c0 = lo + s * sub
            _bar_rect(ctx, p, c0, c0 + sub, 0.0, row[i], ctx.colors[label], label, e)
            _value_label(ctx, p, c0 + sub / 2, max(row[i], 0.0), row[i])


def _smooth_path(pts: list[tuple[float, float]]) -> str:
    d = [f"M {_n(pts[0][0])} {_n(pts[0][1])}"]
    for i in range(len(pts) - 1):
        p0 = pts[i - 1] if i > 0 else pts[i]
        p1, p2 = pts[i], pts[i + 1]
        p3 = pts[i + 2] if i + 2 < len(pts) else p2
        c1 = (p1[0] + (p2[0] - p0[0]) / 6, p1[1] + (p2[1] - p0[1]) / 6)
        c2 = (p2[0] - (p3[0] - p1[0]) / 6, p2[1] - (p3[1] - p1[1]) / 6)
        d.append(f"C {_n(c1[0])} {_n(c1[1])} {_n(c2[0])} {_n(c2[1])} {_n(p2[0])} {_n(p2[1])}")
    return " ".join(d)


def _draw_lines(ctx: _Ctx, p: _Plot, rows=None) -> None:
    spec = ctx.spec
    t = spec.table
    n = len(t.entity_names)
    name = spec.subtype.name
    mids = [sum(p.band(i, n)) / 2 for i in range(n)]
    if name == "Interval Highlight Single Line":
        label = t.legend_labels[0]
        for start, end in spec.extras["highlight_intervals"]:
            i, j = t.entity_names.index(start), t.entity_names.index(end)
            a, _ = p.band(min(i, j), n)
            _, b = p.band(max(i, j), n)
            ctx.doc.add(El("rect", {"class": "highlight", "x": _n(a), "y": _n(p.y0),
                                    "width": _n(b - a), "height": _n(p.y1 - p.y0),
                                    "fill": ctx.colors[label], "fill-opacity": "0.15"}))
    for label, row in rows if rows is not None else _series_values(spec):
        pts = [(mids[i], data_to_pixels(p.vscale, v)) for i, v in enumerate(row)]
        if name == "Smooth Single Line":
            d = _smooth_path(pts)
        else:
            d = "M " + " L ".join(f"{_n(x)} {_n(y)}" for x, y in pts)
        ctx.doc.add(El("path", {"class": "mark", "data-series": label, "d": d, "fill": "none",
                                "stroke": ctx.colors[label], "stroke-width": "2"}))
        for (x, y), e, v in zip(pts, t.entity_names, row):
            ctx.doc.add(El("circle", {"class": "point", "data-series": label, "data-entity": e,
                                      "cx": _n(x), "cy": _n(y), "r": "3",
                                      "fill": ctx.colors[label]}))
            ctx.text(x, y - 7, fmt_value(v), "value-label", fs=9)
    if name == "Marker Single Line":
        mv = spec.extras["marker_value"]
        y = data_to_pixels(p.vscale, mv)
        ctx.line(p.x0, y, p.x1, y, "marker", stroke=ctx.neutral["text"],
                 **{"stroke-dasharray": "6 4"})
        ctx.text(p.x1, y - 4, fmt_value(mv), "marker-label", anchor="end", fs=9)
    if name in ("Best Value Single Line", "Best Value MultiLine"):
        for label, best in spec.extras["best_values"].items():
            for kind in ("max", "min"):
                e, v = best[kind]
                x = mids[t.entity_names.index(e)]
                y = data_to_pixels(p.vscale, v)
                ctx.doc.add(El("circle", {"class": "callout", "data-series": label,
                                          "data-kind": kind, "cx": _n(x), "cy": _n(y),
                                          "r": "7", "fill": "none",
                                          "stroke": ctx.colors[label], "stroke-width": "2"}))


def _draw_scatter(ctx: _Ctx, p: _Plot) -> None:
    spec = ctx.spec
    t = spec.table
    n = len(t.entity_names)
    bubble = "Bubble" in spec.subtype.name
    vmax = max(abs(v) for r in t.values for v in r) or 1.0
    for label, row in _series_values(spec):
        for i, (e, v) in enumerate(zip(t.entity_names, row)):
            x = sum(p.band(i, n)) / 2
            y = data_to_pixels(p.vscale, v)
            r = 4 + 18 * math.sqrt(abs(v) / vmax) if bubble else 5
            ctx.doc.add(El("circle", {"class": "mark", "data-series": label, "data-entity": e,
                                      "cx": _n(x), "cy": _n(y), "r": _n(r),
                                      "fill": ctx.colors[label], "fill-opacity": "0.8"}))


def _draw_boxes(ctx: _Ctx, p: _Plot) -> None:
    spec = ctx.spec
    t = spec.table
    n = len(t.entity_names)
    for i, e in enumerate(t.entity_names):
        mn, q1, med, q3, mx = spec.extras["box_stats"][e]
        color = ctx.colors.get(e) or next(iter(ctx.colors.values()))
        a, b = p.band(i, n)
        w = (b - a) * 0.5
        lo, hi, mid = a + (b - a - w) / 2, a + (b - a + w) / 2, (a + b) / 2
        s = lambda v: data_to_pixels(p.vscale, v)  # noqa: E731
        kids = []
        if p.horizontal:
            kids.append(El("rect", {"class": "box", "x": _n(s(q1)), "y": _n(lo),
                                    "width": _n(s(q3) - s(q1)), "height": _n(w),
                                    "fill": color, "fill-opacity": "0.6", "stroke": color}))
            segs = [(s(med), lo, s(med), hi, "median"), (s(mn), mid, s(q1), mid, "whisker"),
                    (s(q3), mid, s(mx), mid, "whisker"), (s(mn), lo, s(mn), hi, "cap"),
                    (s(mx), lo, s(mx), hi, "cap")]
        else:
            kids.append(El("rect", {"class": "box", "x": _n(lo), "y": _n(s(q3)),
                                    "width": _n(w), "height": _n(s(q1) - s(q3)),
                                    "fill": color, "fill-opacity": "0.6", "stroke": color}))
            segs = [(lo, s(med), hi, s(med), "median"), (mid, s(mn), mid, s(q1), "whisker"),
                    (mid, s(q3), mid, s(mx), "whisker"), (lo, s(mn), hi, s(mn), "cap"),
                    (lo, s(mx), hi, s(mx), "cap")]
        for x1, y1, x2, y2, cls in segs:
            kids.append(El("line", {"class": cls, "x1": _n(x1), "y1": _n(y1), "x2": _n(x2),
                                    "y2": _n(y2), "stroke": ctx.neutral["text"] if cls == "median"
                                    else color, "stroke-width": "1.5"}))
        ctx.doc.add(El("g", {"class": "mark", "data-entity": e}, children=kids))


def _render_cartesian(ctx: _Ctx) -> None:
    p = _cartesian_plot(ctx)
    _draw_axes(ctx, p)
    family = ctx.spec.subtype.family
    if family == "bar":
        _draw_bars(ctx, p)
    elif family == "line":
        _draw_lines(ctx, p)
    elif family == "scatter":
        _draw_scatter(ctx, p)
    elif family == "box":
        _draw_boxes(ctx, p)
    else:  # Line Bar: first series as bars, second as a line
        t = ctx.spec.table
        n = len(t.entity_names)
        label, row = _series_values(ctx.spec)[0]
        for i, (e, v) in enumerate(zip(t.entity_names, row)):
            a, b = p.band(i, n)
            w = (b - a) * 0.6
            lo = a + (b - a - w) / 2
            _bar_rect(ctx, p, lo, lo + w, 0.0, v, ctx.colors[label], label, e)
            _value_label(ctx, p, (a + b) / 2, max(v, 0.0), v)
        _draw_lines(ctx, p, rows=_series_values(ctx.spec)[1:])


# ---------------------------------------------------------------- polar & pie

def _polar_point(cx, cy, r, deg) -> tuple[str, str]:
    a = math.radians(deg)
    return _n(cx + r * math.sin(a)), _n(cy - r * math.cos(a))


def _sector_path(cx, cy, r0, r1, a0, a1, p0=None, p1=None) -> str:
    """Annular sector between radii r0<r1, clockwise from angle a0 to a1 (degrees from 12 o'clock).

    ``p0``/``p1`` let callers pass pre-formatted outer boundary points so
    adjacent wedges share identical coordinates.
    """
    if a1 - a0 >= 360:
        # an arc cannot end where it starts; a full turn is drawn as two halves
        m = _polar_point(cx, cy, r1, a0 + 180)
        o0 = p0 or _polar_point(cx, cy, r1, a0)
        half = f"A {_n(r1)} {_n(r1)} 0 0 1"
        if r0 <= 0:
            return (f"M {_n(cx)} {_n(cy)} L {o0[0]} {o0[1]} {half} {m[0]} {m[1]} "
                    f"{half} {o0[0]} {o0[1]} Z")
        i0 = _polar_point(cx, cy, r0, a0)
        im = _polar_point(cx, cy, r0, a0 + 180)
        ihalf = f"A {_n(r0)} {_n(r0)} 0 0 0"
        return (f"M {o0[0]} {o0[1]} {half} {m[0]} {m[1]} {half} {o0[0]} {o0[1]} "
                f"L {i0[0]} {i0[1]} {ihalf} {im[0]} {im[1]} {ihalf} {i0[0]} {i0[1]} Z")
    large = 1 if a1 - a0 > 180 else 0
    o0 = p0 or _polar_point(cx, cy, r1, a0)
    o1 = p1 or _polar_point(cx, cy, r1, a1)
    if r0 <= 0:
        return (f"M {_n(cx)} {_n(cy)} L {o0[0]} {o0[1]} "
                f"A {_n(r1)} {_n(r1)} 0 {large} 1 {o1[0]} {o1[1]} Z")
    i1 = _polar_point(cx, cy, r0, a1)
    i0 = _polar_point(cx, cy, r0, a0)
    return (f"M {o0[0]} {o0[1]} A {_n(r1)} {_n(r1)} 0 {large} 1 {o1[0]} {o1[1]} "
            f"L {i1[0]} {i1[1]} A {_n(r0)} {_n(r0)} 0 {large} 0 {i0[0]} {i0[1]} Z")


POLAR_SWEEP = 270.0


def _render_polar(ctx: _Ctx) -> None:
    spec = ctx.spec
    t = spec.table
    n = len(t.entity_names)
    angular_value = "Horizontal" in spec.subtype.name
    stacked = "Stack" in spec.subtype.name
    cx = ctx.width / 2
    cy = (ctx.top + 10 + ctx.height - MARGIN) / 2
    R = min(ctx.width - 2 * MARGIN, ctx.height - MARGIN - ctx.top - 10) / 2 - 14
    ticks = nice_ticks(*_value_domain(spec))
    series = _series_values(spec)
    if angular_value:
        vscale = AxisScale((ticks[0], ticks[-1]), (0.0, POLAR_SWEEP), "angular")
        inner = R * 0.2
        ring = (R - inner) / n
    else:
        vscale = AxisScale((ticks[0], ticks[-1]), (0.0, R), "radial")
    g = El("g", {"class": "plot", "data-scale": vscale.attr(),
                 "data-orientation": vscale.orientation,
                 "data-center": f"{_n(cx)} {_n(cy)}"})
    ctx.doc.add(g)
    for tk in ticks:
        label = tick_label(tk, ticks)
        if angular_value:
            a = data_to_pixels(vscale, tk)
            x, y = _polar_point(cx, cy, R + 10, a)
            g.children.append(El("line", {"class": "grid", "x1": _n(cx), "y1": _n(cy),
                                          "x2": _polar_point(cx, cy, R, a)[0],
                                          "y2": _polar_point(cx, cy, R, a)[1],
                                          "stroke": ctx.neutral["grid"]}))
            ctx.text(float(x), float(y) + 3.5, label, "tick-label", fs=9)
        else:
            r = data_to_pixels(vscale, tk)
            g.children.append(El("circle", {"class": "grid", "cx": _n(cx), "cy": _n(cy),
                                            "r": _n(r), "fill": "none",
                                            "stroke": ctx.neutral["grid"]}))
            ctx.text(cx + 3, cy - r - 2, label, "tick-label", anchor="start", fs=9)
    for i, e in enumerate(t.entity_names):
        base = 0.0
        if angular_value:
            r0, r1 = inner + i * ring + ring * 0.15, inner + (i + 1) * ring - ring * 0.15
            ctx.text(cx - 4, cy - (r0 + r1) / 2 + 3.5, e, "category-label", anchor="end", fs=9)
        else:
            step = 360.0 / n
            a0, a1 = i * step + step * 0.15, (i + 1) * step - step * 0.15
            x, y = _polar_point(cx, cy, R + 12, (a0 + a1) / 2)
            ctx.text(float(x), float(y) + 3.5, e, "category-label", fs=9)
        rows = series if stacked else series[:1]
        for label, row in rows:
            v = row[i]
            lo_v, hi_v = base, base + v
            # negative values run backwards; sector bounds must stay ordered
            p_lo, p_hi = sorted((data_to_pixels(vscale, lo_v), data_to_pixels(vscale, hi_v)))
            if angular_value:
                d = _sector_path(cx, cy, r0, r1, p_lo, p_hi)
            else:
                d = _sector_path(cx, cy, p_lo, p_hi, a0, a1)
            ctx.doc.add(El("path", {"class": "mark", "data-series": label, "data-entity": e,
                                    "d": d, "fill": ctx.colors[label]}))
            base = hi_v
        if not stacked:
            if angular_value:
                x, y = _polar_point(cx, cy, (r0 + r1) / 2, data_to_pixels(vscale, base))
                ctx.text(float(x) + 4, float(y) + 3, fmt_value(base), "value-label",
                         anchor="start", fs=9)
            else:
                x, y = _polar_point(cx, cy, data_to_pixels(vscale, base) + 8, (a0 + a1) / 2)
                ctx.text(float(x), float(y), fmt_value(base), "value-label", fs=9)


def _ring_wedges(ctx, cx, cy, r0, r1_fn, row, entities, label_ring: bool, series_label: str):
    total = sum(row)
    bounds = [0.0]
    acc = 0.0
    for v in row[:-1]:
        acc += v
        bounds.append(360.0 * acc / total)
    bounds.append(360.0)
    for i, (e, v) in enumerate(zip(entities, row)):
        a0, a1 = bounds[i], bounds[i + 1]
        r1 = r1_fn(v)
        p0 = _polar_point(cx, cy, r1, a0)
        # closing boundary reuses the starting point so the sweeps telescope to 360
        p1 = _polar_point(cx, cy, r1, a1 % 360.0 if i == len(row) - 1 else a1)
        d = _sector_path(cx, cy, r0, r1, a0, a1, p0, p1)
        ctx.doc.add(El("path", {"class": "mark", "data-series": series_label, "data-entity": e,
                                "data-angles": f"{a0!r} {a1!r}", "d": d, "fill": ctx.colors[e],
                                "stroke": ctx.neutral["bg"], "stroke-width": "1"}))
        if label_ring:
            x, y = _polar_point(cx, cy, r1 + 14, (a0 + a1) / 2)
            mid = (a0 + a1) / 2 % 360
            anchor = "start" if 10 < mid < 170 else "end" if 190 < mid < 350 else "middle"
            ctx.text(float(x), float(y) + 3.5, e, "slice-label", anchor=anchor, fs=9)


def _render_pie(ctx: _Ctx) -> None:
    spec = ctx.spec
    t = spec.table
    name = spec.subtype.name
    cx = ctx.width / 2
    cy = (ctx.top + 10 + ctx.height - MARGIN) / 2
    R = min(ctx.width - 2 * MARGIN - 160, ctx.height - MARGIN - ctx.top - 10) / 2 - 20
    row = t.values[0]
    label = t.legend_labels[0]
    ctx.doc.add(El("g", {"class": "plot", "data-orientation": "angular",
                         "data-center": f"{_n(cx)} {_n(cy)}"}))
    if name == "Simple Pie":
        _ring_wedges(ctx, cx, cy, 0, lambda v: R, row, t.entity_names, True, label)
    elif name == "Ring Pie":
        _ring_wedges(ctx, cx, cy, R * 0.5, lambda v: R, row, t.entity_names, True, label)
    elif name == "Rose Pie":
        vmax = max(row)
        _ring_wedges(ctx, cx, cy, 0, lambda v: R * (0.3 + 0.7 * v / vmax), row,
                     t.entity_names, True, label)
    else:  # Nesting Pie: inner disc for the first series, outer ring for the second
        _ring_wedges(ctx, cx, cy, 0, lambda v: R * 0.45, t.values[0], t.entity_names, False,
                     t.legend_labels[0])
        _ring_wedges(ctx, cx, cy, R * 0.6, lambda v: R, t.values[1], t.entity_names, True,
                     t.legend_labels[1])


# ---------------------------------------------------------------- entry point

def _render_at(spec: ChartSpec, width: float, height: float) -> SvgDoc:
    neutral = NEUTRALS[spec.style.background]
    doc = SvgDoc(width, height, neutral["bg"])
    colors = {}
    for (series, (_, hx)) in zip(_color_labels(spec), spec.style.palette):
        colors[series] = hx
    ctx = _Ctx(spec, doc, width, height, colors, neutral)
    _draw_title_and_legend(ctx)
    family = spec.subtype.family
    if family == "pie":
        _render_pie(ctx)
    elif spec.subtype.name.startswith("Polar"):
        _render_polar(ctx)
    else:
        _render_cartesian(ctx)
    return doc


def _color_labels(spec: ChartSpec) -> Iterable[str]:
    from .charts import color_series
    return color_series(spec.table, spec.subtype)


def render(spec: ChartSpec, canvas: tuple[float, float] = CANVAS) -> SvgDoc:
    width, height = canvas
    try:
        return _render_at(spec, width, height)
    except _Overflow:
        pass
    try:
        return _render_at(spec, width * GROW, height * GROW)
    except _Overflow:
        raise RenderOverflow(
            f"labels of {spec.chart_id} do not fit a {width * GROW:.0f}x{height * GROW:.0f} canvas"
        ) from None
