"""Chart subtypes, styling, chart IDs and the ChartInfo metadata record."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime
from decimal import Decimal
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping

from .errors import IncompatibleShape, ValidationError
from .tables import DataTable, ShapeNeed, round_half_up

COLOR_CATALOG = Path(__file__).parent / "data" / "colors.csv"

FAMILIES = ("bar", "line", "pie", "scatter", "box", "combination")

# subtype name -> ID code, grouped by family
SUBTYPE_CODES: dict[str, dict[str, str]] = {
    "bar": {
        "Vertical Bar": "Vbar",
        "Horizontal Bar": "Hbar",
        "Stack Vertical Bar": "S-Vbar",
        "Stack Horizontal Bar": "S-Hbar",
        "Group Vertical Bar": "GVbar",
        "Group Horizontal Bar": "GHbar",
        "Polar Coordinates Vertical Bar": "PVbar",
        "Polar Coordinates Horizontal Bar": "PHbar",
        "Polar Coordinates Stack Vertical Bar": "PS-Vbar",
        "Polar Coordinates Stack Horizontal Bar": "PS-Hbar",
        "Waterfall Bar": "Wbar",
    },
    "line": {
        "Single Line": "Sline",
        "Smooth Single Line": "SSline",
        "MultiLine": "Mline",
        "Marker Single Line": "MK-Sline",
        "Best Value Single Line": "BV-Sline",
        "Best Value MultiLine": "BV-Mline",
        "Interval Highlight Single Line": "IH-Sline",
    },
    "pie": {
        "Simple Pie": "Spie",
        "Ring Pie": "Rpie",
        "Rose Pie": "ROpie",
        "Nesting Pie": "Npie",
    },
    "scatter": {
        "Simple Scatter": "Sscatter",
        "Multi Scatter": "Mscatter",
        "Bubble Scatter": "Bscatter",
        "Check Bubble Scatter": "CBscatter",
    },
    "box": {
        "Vertical Boxplot": "Vbox",
        "Horizontal Boxplot": "Hbox",
        "Multi Boxplot": "Mbox",
    },
    "combination": {
        "Line Bar": "Line-Bar",
    },
}

# family totals in a reference corpus of 50,010 charts
FAMILY_WEIGHTS = {"bar": 18337, "line": 11669, "pie": 6668, "scatter": 6668,
                  "box": 5001, "combination": 1667}

SINGLE_SERIES = frozenset({
    "Vertical Bar", "Horizontal Bar", "Polar Coordinates Vertical Bar",
    "Polar Coordinates Horizontal Bar", "Waterfall Bar",
    "Single Line", "Smooth Single Line", "Marker Single Line",
    "Best Value Single Line", "Interval Highlight Single Line",
    "Simple Scatter", "Bubble Scatter",
    "Simple Pie", "Ring Pie", "Rose Pie",
})
MULTI_SERIES = frozenset({
    "Stack Vertical Bar", "Stack Horizontal Bar", "Group Vertical Bar",
    "Group Horizontal Bar", "Polar Coordinates Stack Vertical Bar",
    "Polar Coordinates Stack Horizontal Bar", "MultiLine", "Best Value MultiLine",
    "Multi Scatter", "Check Bubble Scatter", "Nesting Pie", "Line Bar",
})
BOX = frozenset(SUBTYPE_CODES["box"])
HORIZONTAL = frozenset({
    "Horizontal Bar", "Stack Horizontal Bar", "Group Horizontal Bar",
    "Polar Coordinates Horizontal Bar", "Polar Coordinates Stack Horizontal Bar",
    "Horizontal Boxplot",
})
ORIENTED = frozenset(SUBTYPE_CODES["bar"]) | BOX | {"Line Bar"}
BOX_STATS = ("min", "q1", "median", "q3", "max")
MIN_BOX_POINTS = 5


@dataclass(frozen=True)
class ChartSubtype:
    family: str
    name: str

    @property
    def code(self) -> str:
        return SUBTYPE_CODES[self.family][self.name]


def all_subtypes() -> list[ChartSubtype]:
    return [ChartSubtype(f, n) for f in FAMILIES for n in SUBTYPE_CODES[f]]


def subtype_by_name(name: str) -> ChartSubtype:
    for f in FAMILIES:
        if name in SUBTYPE_CODES[f]:
            return ChartSubtype(f, name)
    raise ValidationError(f"unknown chart subtype {name!r}")


def shape_need(name: str) -> ShapeNeed:
    if name in BOX:
        return ShapeNeed(min_rows=MIN_BOX_POINTS, observations=True)
    positive = name in SUBTYPE_CODES["pie"]
    if name in ("Nesting Pie", "Line Bar"):
        return ShapeNeed(2, 2, positive=positive)
    if name in MULTI_SERIES:
        return ShapeNeed(2, None, positive=positive)
    return ShapeNeed(1, 1, positive=positive)


def sample_subtype(rng, weights: Mapping[str, float] = FAMILY_WEIGHTS) -> ChartSubtype:
    families = list(weights)
    family = rng.choices(families, weights=[weights[f] for f in families])[0]
    return ChartSubtype(family, rng.choice(list(SUBTYPE_CODES[family])))


def family_from_unit(u: float, weights: Mapping[str, float] = FAMILY_WEIGHTS) -> str:
    """Inverse-CDF lookup of a family for a point u in [0, 1)."""
    total = sum(weights.values())
    acc = 0.0
    for f, w in weights.items():
        acc += w / total
        if u < acc:
            return f
    return list(weights)[-1]


def make_chart_id(clock: datetime, rng, subtype: ChartSubtype, machine: str = "L",
                  taken: set | None = None) -> str:
    if len(machine) != 1 or not machine.isupper():
        raise ValidationError("machine id must be a single uppercase letter")
    stamp = clock.strftime("%Y_%m_%d_%H_%M_%S")
    digits = list(range(10))
    rng.shuffle(digits)
    for r in digits:
        cid = f"{machine}_{stamp}_{r}_{subtype.code}"
        if taken is None or cid not in taken:
            if taken is not None:
                taken.add(cid)
            return cid
    raise ValidationError(f"all ten chart ids for {stamp} {subtype.code} are taken")


@lru_cache(maxsize=4)
def load_colors(path: str | Path = COLOR_CATALOG) -> tuple[tuple[str, str], ...]:
    rows = list(csv.DictReader(io.StringIO(Path(path).read_text(encoding="utf-8"))))
    return tuple((r["name"], r["hex"].lower()) for r in rows)


@dataclass(frozen=True)
class ChartStyle:
    background: str                          # "light" | "dark"
    palette: tuple[tuple[str, str], ...]     # (color name, hex) per colored series

    def to_dict(self):
        return {"background": self.background, "palette": [list(p) for p in self.palette]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["background"], tuple(tuple(p) for p in d["palette"]))


@dataclass(frozen=True)
class ChartSpec:
    chart_id: str
    subtype: ChartSubtype
    style: ChartStyle
    table: DataTable
    title: str
    x_title: str
    y_title: str
    extras: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return {
            "chart_id": self.chart_id,
            "subtype": self.subtype.name,
            "style": self.style.to_dict(),
            "table": self.table.to_dict(),
            "title": self.title,
            "x_title": self.x_title,
            "y_title": self.y_title,
            "extras": dict(self.extras),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["chart_id"], subtype_by_name(d["subtype"]), ChartStyle.from_dict(d["style"]),
                   DataTable.from_dict(d["table"]), d["title"], d["x_title"], d["y_title"],
                   d.get("extras", {}))


@dataclass(frozen=True)
class ChartInfo:
    chart_id: str
    chart_type: str
    title: str
    entity_names: tuple[str, ...]
    legend_labels: tuple[str, ...]
    data: tuple[tuple[float, ...], ...]
    colors: tuple[tuple[str, str, str], ...]   # (series label, color name, hex)
    entity_parents: tuple[str, ...]
    entity_grandparent: str
    legend_parents: tuple[str, ...]
    legend_grandparent: str
    x_title: str
    y_title: str
    table_id: str
    background: str
    dsc: Mapping[str, Any] = field(default_factory=dict)

    @property
    def family(self) -> str:
        return subtype_by_name(self.chart_type).family

    def color_of(self, series: str) -> str:
        for label, name, _ in self.colors:
            if label == series:
                return name
        raise KeyError(series)

    def to_dict(self):
        return {
            "chart_id": self.chart_id,
            "chart_type": self.chart_type,
            "title": self.title,
            "entity_names": list(self.entity_names),
            "legend_labels": list(self.legend_labels),
            "data": [list(r) for r in self.data],
            "colors": [{"series": s, "name": n, "value": v} for s, n, v in self.colors],
            "entity_parents": list(self.entity_parents),
            "entity_grandparent": self.entity_grandparent,
            "legend_parents": list(self.legend_parents),
            "legend_grandparent": self.legend_grandparent,
            "x_title": self.x_title,
            "y_title": self.y_title,
            "table_id": self.table_id,
            "background": self.background,
            "dsc": self.dsc,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["chart_id"], d["chart_type"], d["title"], tuple(d["entity_names"]),
            tuple(d["legend_labels"]), tuple(tuple(r) for r in d["data"]),
            tuple((c["series"], c["name"], c["value"]) for c in d["colors"]),
            tuple(d["entity_parents"]), d["entity_grandparent"],
            tuple(d["legend_parents"]), d["legend_grandparent"],
            d["x_title"], d["y_title"], d["table_id"], d["background"], d["dsc"],
        )


def quartile(sorted_vals: list[Decimal], q: Decimal) -> Decimal:
    """Linear-interpolation quantile (numpy's default method) in exact decimals."""
    pos = (len(sorted_vals) - 1) * q
    lo = int(pos)
    frac = pos - lo
    if lo + 1 >= len(sorted_vals):
        return sorted_vals[lo]
    return sorted_vals[lo] + (sorted_vals[lo + 1] - sorted_vals[lo]) * frac


def box_stats(values) -> list[float]:
    """min, Q1, median, Q3, max rounded half-up to two decimals."""
    vals = sorted(Decimal(repr(float(v))) for v in values)
    qs = [quartile(vals, Decimal(q)) for q in ("0", "0.25", "0.5", "0.75", "1")]
    return [float(round_half_up(q)) for q in qs]


def check_compatible(table: DataTable, subtype: ChartSubtype) -> None:
    rows, cols = table.shape
    name = subtype.name
    need = shape_need(name)
    if cols < 1:
        raise IncompatibleShape(name, table.shape, "no entities")
    if rows < need.min_rows:
        raise IncompatibleShape(name, table.shape, f"needs at least {need.min_rows} rows")
    if need.max_rows is not None and rows > need.max_rows:
        raise IncompatibleShape(name, table.shape, f"needs at most {need.max_rows} rows")
    if need.positive and any(v <= 0 for r in table.values for v in r):
        raise IncompatibleShape(name, table.shape, "pie values must be positive")


def color_series(table: DataTable, subtype: ChartSubtype) -> list[str]:
    """Labels that each receive one palette color."""
    if subtype.family == "pie" or subtype.name == "Multi Boxplot":
        return list(table.entity_names)
    if subtype.family == "box":
        return [table.title or "values"]
    return list(table.legend_labels)


def _titles(table: DataTable, subtype: ChartSubtype) -> tuple[str, str, str]:
    if table.sample is not None:
        x = table.sample.grandparent.replace("_", " ")
    else:
        x = "category"
    y = "value"
    title = table.title or f"{subtype.name} of {x}"
    if subtype.name in HORIZONTAL:
        x, y = y, x
    return title, x, y


def _extras(table: DataTable, subtype: ChartSubtype, rng) -> dict:
    name = subtype.name
    extras: dict[str, Any] = {}
    if subtype.family in ("bar", "box") or name == "Line Bar":
        extras["orientation"] = "horizontal" if name in HORIZONTAL else "vertical"
    if name == "Marker Single Line":
        row = [Decimal(repr(v)) for v in table.values[0]]
        extras["marker_kind"] = "average"
        extras["marker_value"] = float(round_half_up(sum(row) / len(row)))
    elif name == "Interval Highlight Single Line":
        n = len(table.entity_names)
        count = 1 if n < 6 else rng.randint(1, 2)
        cuts = sorted(rng.sample(range(n), min(n, 2 * count)))
        intervals = []
        for a, b in zip(cuts[::2], cuts[1::2]):
            intervals.append([table.entity_names[a], table.entity_names[b]])
        if not intervals:
            intervals.append([table.entity_names[0], table.entity_names[-1]])
        extras["highlight_intervals"] = intervals
    elif name in ("Best Value Single Line", "Best Value MultiLine"):
        best = {}
        for label, row in zip(table.legend_labels, table.values):
            hi = max(range(len(row)), key=lambda j: (row[j], -j))
            lo = min(range(len(row)), key=lambda j: (row[j], j))
            best[label] = {"max": [table.entity_names[hi], row[hi]],
                           "min": [table.entity_names[lo], row[lo]]}
        extras["best_values"] = best
    elif name == "Line Bar":
        extras["bar_series"] = table.legend_labels[0]
        extras["line_series"] = table.legend_labels[1]
    elif name == "Nesting Pie":
        extras["inner_series"] = table.legend_labels[0]
        extras["outer_series"] = table.legend_labels[1]
    if subtype.family == "box":
        extras["box_stats"] = {
            e: box_stats(table.column(j)) for j, e in enumerate(table.entity_names)
        }
    return extras


def build_chart(table: DataTable, subtype: ChartSubtype, rng, chart_id: str,
                colors: tuple[tuple[str, str], ...] | None = None) -> tuple[ChartSpec, ChartInfo]:
    check_compatible(table, subtype)
    catalog = colors if colors is not None else load_colors()
    series = color_series(table, subtype)
    if len(series) > len(catalog):
        raise IncompatibleShape(subtype.name, table.shape, "more series than catalog colors")
    palette = tuple(rng.sample(catalog, len(series)))
    background = "dark" if rng.random() < 0.5 else "light"
    style = ChartStyle(background, palette)
    title, x_title, y_title = _titles(table, subtype)
    extras = _extras(table, subtype, rng)
    spec = ChartSpec(chart_id, subtype, style, table, title, x_title, y_title, extras)
    return spec, chart_info(spec)


def chart_info(spec: ChartSpec) -> ChartInfo:
    table = spec.table
    sample = table.sample
    if sample is not None:
        ent_parents = tuple(sample.entities[e][0] for e in table.entity_names)
        ent_gp = sample.grandparent
        if all(l in sample.entities for l in table.legend_labels):
            leg_parents = tuple(sample.entities[l][0] for l in table.legend_labels)
            leg_gp = sample.grandparent
        else:
            leg_parents, leg_gp = (), ""
    else:
        ent_parents, ent_gp, leg_parents, leg_gp = (), "", (), ""
    series = color_series(table, spec.subtype)
    colors = tuple((s, name, hx) for s, (name, hx) in zip(series, spec.style.palette))
    return ChartInfo(
        chart_id=spec.chart_id,
        chart_type=spec.subtype.name,
        title=spec.title,
        entity_names=table.entity_names,
        legend_labels=table.legend_labels,
        data=table.values,
        colors=colors,
        entity_parents=ent_parents,
        entity_grandparent=ent_gp,
        legend_parents=leg_parents,
        legend_grandparent=leg_gp,
        x_title=spec.x_title,
        y_title=spec.y_title,
        table_id=table.table_id,
        background=spec.style.background,
        dsc=dict(spec.extras),
    )


def plotted_values(info: ChartInfo) -> list[float]:
    """Values a reader can see: box statistics for box plots, raw cells otherwise."""
    if info.chart_type in BOX:
        return [v for stats in info.dsc["box_stats"].values() for v in stats]
    return [v for row in info.data for v in row]
