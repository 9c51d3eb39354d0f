"""Solution programs: ordered atomic operations that derive an answer from ChartInfo.

Program text has one step per line, ``s<k> = opName(arg, ...)``.  Arguments are
``fill<i>`` (1-based template fill), ``s<j>`` (an earlier step) or a literal
(integer, decimal or double-quoted string).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Any, Sequence

from .charts import BOX, BOX_STATS, ChartInfo
from .errors import EmptyList, SolveError, TypeMismatch, UnknownLabel, ValidationError
from .tables import round_half_up

# name -> (min arity, max arity)
CATALOG: dict[str, tuple[int, int]] = {
    "getEntityValue": (1, 1),
    "getValueByEntity": (1, 2),
    "getValueByLegend": (1, 1),
    "getIntervalValueByEntity": (2, 2),
    "getAllValues": (0, 0),
    "getEntitiesByParent": (1, 1),
    "getLegendsByParent": (1, 1),
    "colorOf": (1, 1),
    "entityAt": (1, 1),
    "countEntities": (0, 1),
    "max": (1, 1), "min": (1, 1), "median": (1, 1), "avg": (1, 1), "sum": (1, 1),
    "diff": (2, 2), "ratio": (2, 2),
    "countGreater": (2, 2), "countLess": (2, 2),
    "greaterThan": (2, 2), "lessThan": (2, 2), "equalsText": (2, 2),
    "argmax": (1, 1), "argmin": (1, 1),
    "filterGreater": (2, 2), "filterLess": (2, 2),
    "orientation": (0, 0),
}
LIST_OPS = frozenset({"getValueByLegend", "getIntervalValueByEntity", "getAllValues",
                      "getEntitiesByParent", "getLegendsByParent", "filterGreater", "filterLess"})


@dataclass(frozen=True)
class Arg:
    kind: str      # "fill" | "step" | "lit"
    value: Any     # fill/step index (1-based) or the literal


@dataclass(frozen=True)
class AtomicOp:
    name: str
    args: tuple[Arg, ...]


@dataclass(frozen=True)
class SolutionProgram:
    steps: tuple[AtomicOp, ...]
    source: str = ""


@dataclass(frozen=True)
class LabeledList:
    """Axis-ordered list of (label, item); items are exact Fractions or strings."""
    items: tuple[tuple[str, Any], ...]

    def values(self) -> list:
        return [v for _, v in self.items]

    def __len__(self):
        return len(self.items)


_STEP_RE = re.compile(r"^s(\d+)\s*=\s*([A-Za-z]\w*)\s*\((.*)\)\s*$")
_ARG_RE = re.compile(r'\s*("(?:[^"\\]|\\.)*"|[^,]+?)\s*(?:,|$)')


def _parse_arg(tok: str) -> Arg:
    if tok.startswith('"'):
        return Arg("lit", tok[1:-1].replace('\\"', '"'))
    m = re.fullmatch(r"fill(\d+)", tok)
    if m:
        return Arg("fill", int(m.group(1)))
    m = re.fullmatch(r"s(\d+)", tok)
    if m:
        return Arg("step", int(m.group(1)))
    if re.fullmatch(r"-?\d+", tok):
        return Arg("lit", int(tok))
    if re.fullmatch(r"-?\d+\.\d+", tok):
        return Arg("lit", Decimal(tok))
    raise ValidationError(f"bad program argument {tok!r}")


def parse_program(text: str, n_fills: int | None = None) -> SolutionProgram:
    """Parse and statically check a program; raises ValidationError."""
    steps = []
    for raw in text.strip().splitlines():
        line = raw.strip()
        if not line:
            continue
        m = _STEP_RE.match(line)
        if not m:
            raise ValidationError(f"malformed step {line!r}")
        k, name, argtext = int(m.group(1)), m.group(2), m.group(3).strip()
        if k != len(steps) + 1:
            raise ValidationError(f"step s{k} out of sequence")
        if name not in CATALOG:
            raise ValidationError(f"unknown operation {name!r}")
        args = tuple(_parse_arg(t) for t in _ARG_RE.findall(argtext)) if argtext else ()
        lo, hi = CATALOG[name]
        if not lo <= len(args) <= hi:
            raise ValidationError(f"{name} takes {lo}..{hi} arguments, got {len(args)}")
        for a in args:
            if a.kind == "step" and not 1 <= a.value < k:
                raise ValidationError(f"s{k} references s{a.value}, not an earlier step")
            if a.kind == "fill" and (a.value < 1 or (n_fills is not None and a.value > n_fills)):
                raise ValidationError(f"s{k} references undeclared fill{a.value}")
        if name == "getEntityValue" and args[0].kind == "lit":
            if not isinstance(args[0].value, int) or (
                    n_fills is not None and not 1 <= args[0].value <= n_fills):
                raise ValidationError(f"getEntityValue index {args[0].value} is not a fill")
        steps.append(AtomicOp(name, args))
    if not steps:
        raise ValidationError("empty program")
    if steps[-1].name in LIST_OPS:
        raise ValidationError("last step must produce a single value")
    return SolutionProgram(tuple(steps), text.strip())


# ---------------------------------------------------------------- execution

@dataclass
class ExecContext:
    fills: Sequence[Any]
    info: ChartInfo
    results: list


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x) if isinstance(x, Decimal) else Fraction(repr(float(x)))


def _num(x, op) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, float, Decimal, Fraction)):
        raise TypeMismatch(f"{op} expects a number, got {type(x).__name__}")
    return Fraction(x) if isinstance(x, int) else _exact(x)


def _text(x, op) -> str:
    if not isinstance(x, str):
        raise TypeMismatch(f"{op} expects text, got {type(x).__name__}")
    return x


def _numlist(x, op) -> LabeledList:
    if not isinstance(x, LabeledList):
        raise TypeMismatch(f"{op} expects a list, got {type(x).__name__}")
    if any(not isinstance(v, Fraction) for v in x.values()):
        raise TypeMismatch(f"{op} expects a list of numbers")
    if not len(x):
        raise EmptyList(op)
    return x


def _entity_index(info: ChartInfo, e) -> int:
    try:
        return info.entity_names.index(_text(e, "lookup"))
    except ValueError:
        raise UnknownLabel(e) from None


def _legend_index(info: ChartInfo, label) -> int:
    try:
        return info.legend_labels.index(_text(label, "lookup"))
    except ValueError:
        raise UnknownLabel(label) from None


def _box_stats(info: ChartInfo, e: str) -> list[Fraction]:
    stats = info.dsc["box_stats"].get(e)
    if stats is None:
        raise UnknownLabel(e)
    return [_exact(v) for v in stats]


def _by_entity(info: ChartInfo, e, legend=None):
    if isinstance(e, LabeledList):
        if legend is not None:
            raise TypeMismatch("getValueByEntity over a list takes no legend")
        items = []
        for name in e.values():
            v = _by_entity(info, name)
            items.extend(v.items if isinstance(v, LabeledList) else [(name, v)])
        return LabeledList(tuple(items))
    if info.chart_type in BOX:
        if legend is not None:
            raise TypeMismatch("box plots have no series")
        return LabeledList(tuple(zip(BOX_STATS, _box_stats(info, e))))
    j = _entity_index(info, e)
    if legend is not None:
        return _exact(info.data[_legend_index(info, legend)][j])
    if len(info.legend_labels) == 1:
        return _exact(info.data[0][j])
    return LabeledList(tuple((lab, _exact(row[j])) for lab, row in zip(info.legend_labels, info.data)))


def _by_legend(info: ChartInfo, label):
    if isinstance(label, LabeledList):
        items = []
        for name in label.values():
            items.extend(_by_legend(info, name).items)
        return LabeledList(tuple(items))
    if info.chart_type in BOX:
        name = _text(label, "getValueByLegend")
        if name not in BOX_STATS:
            raise UnknownLabel(name)
        k = BOX_STATS.index(name)
        return LabeledList(tuple((e, _box_stats(info, e)[k]) for e in info.entity_names))
    i = _legend_index(info, label)
    return LabeledList(tuple(zip(info.entity_names, map(_exact, info.data[i]))))


def _interval(info: ChartInfo, e1, e2) -> LabeledList:
    if info.chart_type in BOX:
        raise TypeMismatch("interval lookup is undefined for box plots")
    i, j = _entity_index(info, e1), _entity_index(info, e2)
    if i > j:
        i, j = j, i
    items = []
    for k in range(i, j + 1):
        for row in info.data:
            items.append((info.entity_names[k], _exact(row[k])))
    return LabeledList(tuple(items))


def _all_values(info: ChartInfo) -> LabeledList:
    if info.chart_type in BOX:
        return LabeledList(tuple((e, v) for e in info.entity_names for v in _box_stats(info, e)))
    return LabeledList(tuple((e, _exact(row[j])) for j, e in enumerate(info.entity_names)
                             for row in info.data))


def _by_parent(labels, parents, p) -> LabeledList:
    p = _text(p, "getEntitiesByParent")
    if not parents:
        raise UnknownLabel(p)
    names = [lab for lab, par in zip(labels, parents) if par == p]
    if not names:
        raise UnknownLabel(p)
    return LabeledList(tuple((n, n) for n in names))


def _median(vals: list[Fraction]) -> Fraction:
    s = sorted(vals)
    n = len(s)
    mid = n // 2
    return s[mid] if n % 2 else (s[mid - 1] + s[mid]) / 2


def _arg(xs: LabeledList, better) -> str:
    best_label, best = xs.items[0]
    for label, v in xs.items[1:]:
        if better(v, best):
            best_label, best = label, v
    return best_label


def _resolve(arg: Arg, ctx: ExecContext):
    if arg.kind == "fill":
        try:
            v = ctx.fills[arg.value - 1]
        except IndexError:
            raise TypeMismatch(f"fill{arg.value} is not provided") from None
        return _exact(v) if isinstance(v, float) else v
    if arg.kind == "step":
        return ctx.results[arg.value - 1]
    return Fraction(arg.value) if isinstance(arg.value, Decimal) else arg.value


def run_step(op: AtomicOp, ctx: ExecContext):
    info = ctx.info
    name = op.name
    if name == "getEntityValue" and op.args[0].kind == "lit":
        a = [_resolve(Arg("fill", op.args[0].value), ctx)]
    else:
        a = [_resolve(x, ctx) for x in op.args]

    if name == "getEntityValue":
        return a[0]
    if name == "getValueByEntity":
        return _by_entity(info, *a)
    if name == "getValueByLegend":
        return _by_legend(info, a[0])
    if name == "getIntervalValueByEntity":
        return _interval(info, a[0], a[1])
    if name == "getAllValues":
        return _all_values(info)
    if name == "getEntitiesByParent":
        return _by_parent(info.entity_names, info.entity_parents, a[0])
    if name == "getLegendsByParent":
        return _by_parent(info.legend_labels, info.legend_parents, a[0])
    if name == "colorOf":
        try:
            return info.color_of(_text(a[0], name))
        except KeyError:
            raise UnknownLabel(a[0]) from None
    if name == "entityAt":
        k = a[0]
        if isinstance(k, bool) or not isinstance(k, int):
            raise TypeMismatch("entityAt expects an ordinal")
        if not 1 <= k <= len(info.entity_names):
            raise UnknownLabel(str(k))
        return info.entity_names[k - 1]
    if name == "countEntities":
        if a:
            if not isinstance(a[0], LabeledList):
                raise TypeMismatch("countEntities expects a list")
            return len(a[0])
        return len(info.entity_names)
    if name in ("max", "min", "median", "avg", "sum"):
        vals = _numlist(a[0], name).values()
        if name == "max":
            return max(vals)
        if name == "min":
            return min(vals)
        if name == "median":
            return _median(vals)
        total = sum(vals, Fraction(0))
        return total / len(vals) if name == "avg" else total
    if name == "argmax":
        return _arg(_numlist(a[0], name), lambda v, b: v > b)
    if name == "argmin":
        return _arg(_numlist(a[0], name), lambda v, b: v < b)
    if name == "diff":
        return _num(a[0], name) - _num(a[1], name)
    if name == "ratio":
        den = _num(a[1], name)
        if den == 0:
            raise TypeMismatch("ratio with zero denominator")
        return _num(a[0], name) / den
    if name in ("countGreater", "countLess", "filterGreater", "filterLess"):
        if not isinstance(a[0], LabeledList):
            raise TypeMismatch(f"{name} expects a list")
        if any(not isinstance(v, Fraction) for v in a[0].values()):
            raise TypeMismatch(f"{name} expects a list of numbers")
        t = _num(a[1], name)
        keep = (lambda v: v > t) if name.endswith("Greater") else (lambda v: v < t)
        items = tuple((lab, v) for lab, v in a[0].items if keep(v))
        return len(items) if name.startswith("count") else LabeledList(items)
    if name == "greaterThan":
        return _num(a[0], name) > _num(a[1], name)
    if name == "lessThan":
        return _num(a[0], name) < _num(a[1], name)
    if name == "equalsText":
        return _text(a[0], name) == _text(a[1], name)
    if name == "orientation":
        o = info.dsc.get("orientation")
        if o is None:
            raise TypeMismatch(f"{info.chart_type} has no orientation")
        return o
    raise ValidationError(f"unknown operation {name!r}")


def finalize(value):
    """Answer-level rendering: Yes/No, two-decimal numbers, text verbatim."""
    if isinstance(value, bool):
        return "Yes" if value else "No"
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return float(round_half_up(value))
    if isinstance(value, str):
        return value
    raise TypeMismatch(f"answer must be a single value, got {type(value).__name__}")


def solve(program: SolutionProgram, fills: Sequence[Any], info: ChartInfo):
    ctx = ExecContext(fills, info, [])
    for k, op in enumerate(program.steps, 1):
        try:
            ctx.results.append(run_step(op, ctx))
        except (TypeMismatch, UnknownLabel, EmptyList) as exc:
            raise SolveError(k, exc) from exc
    try:
        return finalize(ctx.results[-1])
    except TypeMismatch as exc:
        raise SolveError(len(program.steps), exc) from exc
