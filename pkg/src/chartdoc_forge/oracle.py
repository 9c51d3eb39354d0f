"""Independent answer checker working straight from the DataTable.

Everything here is recomputed with exact fractions by walking the table cells,
so it shares nothing with the answer engine apart from the program syntax.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .errors import SolveError

_STATS = ("min", "q1", "median", "q3", "max")


class _Fail(Exception):
    pass


def _frac(v) -> Fraction:
    return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)


def _round2(x: Fraction) -> Fraction:
    """Half away from zero at two decimals, in exact arithmetic."""
    sign = -1 if x < 0 else 1
    return sign * Fraction(math.floor(abs(x) * 100 + Fraction(1, 2)), 100)


def _quantile(sorted_vals: list[Fraction], q: Fraction) -> Fraction:
    pos = (len(sorted_vals) - 1) * q
    k = math.floor(pos)
    if k + 1 >= len(sorted_vals):
        return sorted_vals[-1]
    return sorted_vals[k] + (sorted_vals[k + 1] - sorted_vals[k]) * (pos - k)


class _TableView:
    def __init__(self, table, chart_type: str, palette):
        self.table = table
        self.box = "Boxplot" in chart_type
        self.horizontal = "Horizontal" in chart_type
        self.chart_type = chart_type
        self.palette = {label: name for label, name in palette}
        self.cols = len(table.entity_names)
        self.rows = len(table.legend_labels)

    def cell(self, i, j) -> Fraction:
        return _frac(self.table.values[i][j])

    def stats(self, j) -> list[Fraction]:
        col = sorted(self.cell(i, j) for i in range(self.rows))
        qs = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]
        return [_round2(_quantile(col, q)) for q in qs]

    def ent(self, name) -> int:
        for j in range(self.cols):
            if self.table.entity_names[j] == name:
                return j
        raise _Fail(f"no entity {name!r}")

    def leg(self, name) -> int:
        for i in range(self.rows):
            if self.table.legend_labels[i] == name:
                return i
        raise _Fail(f"no legend {name!r}")

    def parent_of(self, label):
        s = self.table.sample
        if s is None or label not in s.entities:
            return None
        return s.entities[label][0]


def _is_list(x):
    return isinstance(x, list)


def _nums(x):
    if not _is_list(x) or not x or not all(isinstance(v, Fraction) for _, v in x):
        raise _Fail("numeric list required")
    return [v for _, v in x]


def _scalar(x):
    if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
        raise _Fail("number required")
    return Fraction(x)


def _exec(op: str, args: list, view: _TableView):
    t = view.table
    if op == "getEntityValue":
        return args[0]
    if op == "getAllValues":
        out = []
        for j in range(view.cols):
            vals = view.stats(j) if view.box else [view.cell(i, j) for i in range(view.rows)]
            out += [(t.entity_names[j], v) for v in vals]
        return out
    if op == "getValueByEntity":
        target = args[0]
        if _is_list(target):
            if len(args) > 1:
                raise _Fail("no legend allowed with a list")
            out = []
            for _, name in target:
                sub = _exec(op, [name], view)
                out += sub if _is_list(sub) else [(name, sub)]
            return out
        j = view.ent(target)
        if view.box:
            if len(args) > 1:
                raise _Fail("box has no series")
            return list(zip(_STATS, view.stats(j)))
        if len(args) > 1:
            return view.cell(view.leg(args[1]), j)
        if view.rows == 1:
            return view.cell(0, j)
        return [(t.legend_labels[i], view.cell(i, j)) for i in range(view.rows)]
    if op == "getValueByLegend":
        target = args[0]
        if _is_list(target):
            out = []
            for _, name in target:
                out += _exec(op, [name], view)
            return out
        if view.box:
            if target not in _STATS:
                raise _Fail("unknown statistic")
            k = _STATS.index(target)
            return [(t.entity_names[j], view.stats(j)[k]) for j in range(view.cols)]
        i = view.leg(target)
        return [(t.entity_names[j], view.cell(i, j)) for j in range(view.cols)]
    if op == "getIntervalValueByEntity":
        if view.box:
            raise _Fail("interval on box")
        a, b = sorted((view.ent(args[0]), view.ent(args[1])))
        return [(t.entity_names[j], view.cell(i, j)) for j in range(a, b + 1)
                for i in range(view.rows)]
    if op in ("getEntitiesByParent", "getLegendsByParent"):
        labels = t.entity_names if op == "getEntitiesByParent" else t.legend_labels
        if op == "getLegendsByParent" and not all(view.parent_of(x) for x in labels):
            raise _Fail("legends carry no parent classes")
        hits = [(x, x) for x in labels if view.parent_of(x) == args[0]]
        if not hits:
            raise _Fail("no members")
        return hits
    if op == "colorOf":
        if args[0] not in view.palette:
            raise _Fail("no such series")
        return view.palette[args[0]]
    if op == "entityAt":
        k = args[0]
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= view.cols:
            raise _Fail("bad ordinal")
        return t.entity_names[k - 1]
    if op == "countEntities":
        if args:
            if not _is_list(args[0]):
                raise _Fail("list required")
            return len(args[0])
        return view.cols
    if op == "max":
        return max(_nums(args[0]))
    if op == "min":
        return min(_nums(args[0]))
    if op == "sum":
        return sum(_nums(args[0]), Fraction(0))
    if op == "avg":
        v = _nums(args[0])
        return sum(v, Fraction(0)) / len(v)
    if op == "median":
        v = sorted(_nums(args[0]))
        n = len(v)
        return v[n // 2] if n % 2 else (v[n // 2 - 1] + v[n // 2]) / 2
    if op in ("argmax", "argmin"):
        _nums(args[0])
        pick = args[0][0]
        for item in args[0]:
            if (item[1] > pick[1]) if op == "argmax" else (item[1] < pick[1]):
                pick = item
        return pick[0]
    if op == "diff":
        return _scalar(args[0]) - _scalar(args[1])
    if op == "ratio":
        if _scalar(args[1]) == 0:
            raise _Fail("division by zero")
        return _scalar(args[0]) / _scalar(args[1])
    if op in ("countGreater", "countLess", "filterGreater", "filterLess"):
        if not _is_list(args[0]) or not all(isinstance(v, Fraction) for _, v in args[0]):
            raise _Fail("numeric list required")
        bound = _scalar(args[1])
        if op.endswith("Greater"):
            kept = [(lab, v) for lab, v in args[0] if v > bound]
        else:
            kept = [(lab, v) for lab, v in args[0] if v < bound]
        return len(kept) if op.startswith("count") else kept
    if op == "greaterThan":
        return _scalar(args[0]) > _scalar(args[1])
    if op == "lessThan":
        return _scalar(args[0]) < _scalar(args[1])
    if op == "equalsText":
        if not (isinstance(args[0], str) and isinstance(args[1], str)):
            raise _Fail("text required")
        return args[0] == args[1]
    if op == "orientation":
        if view.chart_type.startswith(("Polar", "Vertical", "Horizontal", "Stack", "Group",
                                       "Waterfall", "Multi Boxplot", "Line Bar")):
            return "horizontal" if view.horizontal else "vertical"
        raise _Fail("no orientation")
    raise _Fail(f"unknown op {op}")


def brute_force_oracle(question, table, template, palette: Sequence[tuple[str, str]] = ()):
    """Answer ``question`` from ``table`` alone.

    ``palette`` maps each colored series label to its color name; it is only
    consulted by color questions.
    """
    view = _TableView(table, question.chart_type, palette)
    fills = [_frac(f) if isinstance(f, float) else f for f in question.fills]
    results = []
    for k, step in enumerate(template.program.steps, 1):
        args = []
        for a in step.args:
            if a.kind == "fill" or (step.name == "getEntityValue" and a.kind == "lit"):
                args.append(fills[a.value - 1])
            elif a.kind == "step":
                args.append(results[a.value - 1])
            else:
                args.append(_frac(a.value) if not isinstance(a.value, (str, int)) else a.value)
        try:
            results.append(_exec(step.name, args, view))
        except _Fail as exc:
            raise SolveError(k, exc) from None
    last = results[-1]
    if isinstance(last, bool):
        return "Yes" if last else "No"
    if isinstance(last, int):
        return last
    if isinstance(last, Fraction):
        r = _round2(last)
        return r.numerator / r.denominator
    if isinstance(last, str):
        return last
    raise SolveError(len(results), _Fail("list answer"))
