"""Template registry, question instantiation and difficulty classification."""

from __future__ import annotations

import configparser
import io
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

from .charts import (
    BOX,
    MULTI_SERIES,
    ORIENTED,
    SINGLE_SERIES,
    SUBTYPE_CODES,
    ChartInfo,
    plotted_values,
)
from .errors import (
    EmptyFillDomain,
    InvariantViolation,
    NotApplicable,
    RegistryParseError,
    SolveError,
    ValidationError,
)
from .program import SolutionProgram, parse_program, solve
from .tables import round_half_up

BUNDLED_REGISTRY = Path(__file__).parent / "data" / "templates.ini"

SLOT_KINDS = ("entity", "entity_pair", "legend", "value", "color", "entity_sort",
              "legend_sort", "ordinal", "axis")
COMMON_SENSE_SLOTS = frozenset({"entity_sort", "legend_sort"})
QUESTION_TYPES = ("reasoning", "common_sense")
ANSWER_TYPES = ("yes_no", "elements", "open_vocab")
DIFFICULTIES = ("beginner", "elementary", "intermediate", "advanced", "expert")
AXES = ("horizontal", "vertical")

PLACEHOLDER = re.compile(r"<[^<>]+>")

_ALL = frozenset(n for f in SUBTYPE_CODES.values() for n in f)
SUBTYPE_ALIASES: dict[str, frozenset[str]] = {
    "@all": _ALL,
    "@single": SINGLE_SERIES,
    "@multi": MULTI_SERIES,
    "@box": BOX,
    "@nonbox": _ALL - BOX,
    "@oriented": ORIENTED,
    "@bar": frozenset(SUBTYPE_CODES["bar"]),
    "@line": frozenset(SUBTYPE_CODES["line"]),
    "@pie": frozenset(SUBTYPE_CODES["pie"]),
    "@scatter": frozenset(SUBTYPE_CODES["scatter"]),
    # single-series charts drawn with bars
    "@sbar": frozenset(SUBTYPE_CODES["bar"]) & SINGLE_SERIES,
    # charts whose palette is keyed by entity rather than by series
    "@entitycolor": frozenset(SUBTYPE_CODES["pie"]) | {"Multi Boxplot"},
}


@dataclass(frozen=True)
class QuestionTemplate:
    template_id: int
    text: str
    slots: tuple[str, ...]
    question_type: str
    answer_type: str
    difficulty: str
    applicable_subtypes: frozenset[str]
    program: SolutionProgram


@dataclass(frozen=True)
class QuestionInfo:
    question: str
    answer: Any
    chart_id: str
    chart_type: str
    question_id: str
    question_type: str
    template_id: int
    difficulty: str
    answer_type: str
    fills: tuple = ()
    split: str = ""

    def to_dict(self):
        return {
            "question_id": self.question_id,
            "question": self.question,
            "answer": self.answer,
            "chart_id": self.chart_id,
            "chart_type": self.chart_type,
            "question_type": self.question_type,
            "answer_type": self.answer_type,
            "template_id": self.template_id,
            "difficulty": self.difficulty,
            "fills": list(self.fills),
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["question"], d["answer"], d["chart_id"], d["chart_type"], d["question_id"],
                   d["question_type"], int(d["template_id"]), d["difficulty"], d["answer_type"],
                   tuple(d.get("fills", ())), d.get("split", ""))


# ---------------------------------------------------------------- registry

def _subtypes(spec: str, tid) -> frozenset[str]:
    out: set[str] = set()
    for tok in (t.strip() for t in spec.split(",")):
        if not tok:
            continue
        drop = tok.startswith("!")
        name = tok[1:].strip() if drop else tok
        if name.startswith("@"):
            if name not in SUBTYPE_ALIASES:
                raise InvariantViolation(tid, f"unknown subtype alias {name!r}")
            names = SUBTYPE_ALIASES[name]
        elif name in _ALL:
            names = {name}
        else:
            raise InvariantViolation(tid, f"unknown chart subtype {name!r}")
        out = out - names if drop else out | names
    if not out:
        raise InvariantViolation(tid, "no applicable subtypes")
    return frozenset(out)


def validate_template(t: QuestionTemplate) -> None:
    tid = t.template_id
    holes = PLACEHOLDER.findall(t.text)
    if len(holes) != len(t.slots):
        raise InvariantViolation(tid, f"{len(holes)} placeholders but {len(t.slots)} slots")
    for s in t.slots:
        if s not in SLOT_KINDS:
            raise InvariantViolation(tid, f"unknown slot kind {s!r}")
    pairs = [i for i, s in enumerate(t.slots) if s == "entity_pair"]
    if len(pairs) % 2 or any(pairs[k + 1] != pairs[k] + 1 for k in range(0, len(pairs), 2)):
        raise InvariantViolation(tid, "entity_pair slots must come in adjacent pairs")
    if t.question_type not in QUESTION_TYPES:
        raise InvariantViolation(tid, f"bad question_type {t.question_type!r}")
    if t.answer_type not in ANSWER_TYPES:
        raise InvariantViolation(tid, f"bad answer_type {t.answer_type!r}")
    if t.difficulty not in DIFFICULTIES:
        raise InvariantViolation(tid, f"bad difficulty {t.difficulty!r}")
    common = any(s in COMMON_SENSE_SLOTS for s in t.slots)
    if common != (t.question_type == "common_sense"):
        raise InvariantViolation(tid, "common_sense type must match parent-class slots")
    if (t.difficulty == "expert") != (t.question_type == "common_sense"):
        raise InvariantViolation(tid, "expert difficulty is reserved for common-sense templates")


def _section_lines(text: str) -> dict[str, list[int]]:
    lines: dict[str, list[int]] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", raw)
        if m:
            lines.setdefault(m.group(1).strip(), []).append(n)
    return lines


REQUIRED_KEYS = ("text", "slots", "question_type", "answer_type", "difficulty", "subtypes",
                 "program")


def load_registry(stream) -> list[QuestionTemplate]:
    """Parse an INI-style registry (one ``[template_id]`` section per template)."""
    text = stream.read() if hasattr(stream, "read") else str(stream)
    lines = _section_lines(text)
    for name, where in lines.items():
        if len(where) > 1:
            raise RegistryParseError(where[1], f"duplicate template id {name}")
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#",), empty_lines_in_values=False)
    try:
        cp.read_file(io.StringIO(text))
    except configparser.DuplicateSectionError as exc:
        raise RegistryParseError(exc.lineno or 0, str(exc)) from None
    except configparser.Error as exc:
        raise RegistryParseError(getattr(exc, "lineno", 0) or 0, exc.message) from None
    templates = []
    seen = set()
    for name in cp.sections():
        line = lines.get(name, [0])[0]
        try:
            tid = int(name)
        except ValueError:
            raise RegistryParseError(line, f"template id {name!r} is not an integer") from None
        if tid in seen:
            raise RegistryParseError(line, f"duplicate template id {tid}")
        seen.add(tid)
        sec = cp[name]
        missing = [k for k in REQUIRED_KEYS if k not in sec]
        if missing:
            raise RegistryParseError(line, f"template {tid} lacks {', '.join(missing)}")
        slots = tuple(s.strip() for s in sec["slots"].split(",") if s.strip())
        try:
            program = parse_program(sec["program"], n_fills=len(slots))
        except ValidationError as exc:
            raise InvariantViolation(tid, f"program: {exc}") from None
        t = QuestionTemplate(tid, sec["text"].strip(), slots, sec["question_type"].strip(),
                             sec["answer_type"].strip(), sec["difficulty"].strip(),
                             _subtypes(sec["subtypes"], tid), program)
        validate_template(t)
        templates.append(t)
    return sorted(templates, key=lambda t: t.template_id)


def load_bundled_registry(path: str | Path = BUNDLED_REGISTRY) -> list[QuestionTemplate]:
    return load_registry(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- difficulty

SELECT_OPS = frozenset({"getValueByEntity", "getValueByLegend", "getIntervalValueByEntity",
                        "getEntitiesByParent", "getLegendsByParent"})
AGG_OPS = frozenset({"max", "min", "median", "avg", "sum", "argmax", "argmin"})
COMBINE_OPS = frozenset({"diff", "ratio", "greaterThan", "lessThan", "equalsText"})
FILTER_OPS = frozenset({"filterGreater", "filterLess", "countGreater", "countLess"})


def classify_difficulty(t: QuestionTemplate) -> str:
    """Structural difficulty: highest-priority rule that matches wins."""
    if any(s in COMMON_SENSE_SLOTS for s in t.slots):
        return "expert"
    steps = t.program.steps

    def source(arg):
        # getEntityValue is a transparent pass-through of a fill
        return steps[arg.value - 1].name if arg.kind == "step" else None

    step_args = [[a for a in op.args if a.kind == "step"] for op in steps]
    for op, refs in zip(steps, step_args):
        if op.name in COMBINE_OPS and len(refs) >= 2 and any(source(a) in AGG_OPS for a in refs):
            return "advanced"
    for op, refs in zip(steps, step_args):
        if op.name in FILTER_OPS:
            return "intermediate"
        if op.name in AGG_OPS and any(source(a) in SELECT_OPS for a in refs):
            return "intermediate"
        if op.name in COMBINE_OPS and len(refs) >= 2:
            return "intermediate"
    for op, refs in zip(steps, step_args):
        if op.name in AGG_OPS and any(source(a) == "getAllValues" for a in refs):
            return "elementary"
    return "beginner"


# ---------------------------------------------------------------- instantiation

def ordinal_text(k: int) -> str:
    if 10 <= k % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(k % 10, "th")
    return f"{k}{suffix}"


def render_fill(kind: str, v) -> str:
    if kind == "value":
        return f"{v:.2f}"
    if kind == "ordinal":
        return ordinal_text(v)
    return str(v)


def render_question(t: QuestionTemplate, fills: Sequence) -> str:
    it = iter(zip(t.slots, fills))

    def sub(_m):
        kind, v = next(it)
        return render_fill(kind, v)

    return PLACEHOLDER.sub(sub, t.text)


def _distinct(seq: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(x for x in seq if x))


def fill_domain(kind: str, info: ChartInfo) -> list:
    """Discrete fill domain; ``value`` returns the closed [lo, hi] bounds instead."""
    if kind in ("entity", "entity_pair"):
        return list(info.entity_names)
    if kind == "legend":
        return [] if info.chart_type in BOX else list(info.legend_labels)
    if kind == "value":
        vals = plotted_values(info)
        return [min(vals), max(vals)] if vals else []
    if kind == "color":
        return [name for _, name, _ in info.colors]
    if kind == "entity_sort":
        return _distinct(info.entity_parents)
    if kind == "legend_sort":
        return [] if info.chart_type in BOX else _distinct(info.legend_parents)
    if kind == "ordinal":
        return list(range(1, len(info.entity_names) + 1))
    if kind == "axis":
        return list(AXES)
    raise ValidationError(f"unknown slot kind {kind!r}")


def sample_fills(t: QuestionTemplate, info: ChartInfo, rng, keep: Sequence | None = None,
                 resample: frozenset[str] | None = None) -> list:
    """Draw fills for every slot; with ``keep``, only kinds in ``resample`` are redrawn."""
    fills: list = [None] * len(t.slots)
    used: dict[str, set] = {}
    redo = lambda kind: keep is None or resample is None or kind in resample  # noqa: E731
    if keep is not None:
        for i, kind in enumerate(t.slots):
            if not redo(kind):
                fills[i] = keep[i]
                used.setdefault(kind, set()).add(keep[i])
    i = 0
    while i < len(t.slots):
        kind = t.slots[i]
        if fills[i] is not None:
            i += 1 + (kind == "entity_pair")
            continue
        domain = fill_domain(kind, info)
        if kind == "entity_pair":
            if len(domain) < 2:
                raise EmptyFillDomain(f"template {t.template_id}: needs two entities")
            a, b = sorted(rng.sample(range(len(domain)), 2))
            fills[i], fills[i + 1] = domain[a], domain[b]
            i += 2
            continue
        if kind == "value":
            if not domain:
                raise EmptyFillDomain(f"template {t.template_id}: no values")
            lo, hi = domain
            fills[i] = float(round_half_up(rng.uniform(lo, hi)))
        else:
            taken = used.setdefault(kind, set())
            if kind in ("axis", "color", "ordinal"):
                choices = domain
            else:
                choices = [d for d in domain if d not in taken]
            if not choices:
                raise EmptyFillDomain(f"template {t.template_id}: empty {kind} domain")
            fills[i] = rng.choice(choices)
            taken.add(fills[i])
        i += 1
    return fills


def instantiate(t: QuestionTemplate, info: ChartInfo, rng, split: str = "") -> QuestionInfo:
    if info.chart_type not in t.applicable_subtypes:
        raise NotApplicable(f"template {t.template_id} does not apply to {info.chart_type}")
    fills = sample_fills(t, info, rng)
    return make_question(t, info, fills, None, split)


def make_question(t: QuestionTemplate, info: ChartInfo, fills, answer, split="") -> QuestionInfo:
    return QuestionInfo(
        question=render_question(t, fills),
        answer=answer,
        chart_id=info.chart_id,
        chart_type=info.chart_type,
        question_id=f"{info.chart_id}_{t.template_id}",
        question_type=t.question_type,
        template_id=t.template_id,
        difficulty=t.difficulty,
        answer_type=t.answer_type,
        fills=tuple(fills),
        split=split,
    )


def answer_question(q: QuestionInfo, t: QuestionTemplate, info: ChartInfo) -> QuestionInfo:
    return replace(q, answer=solve(t.program, q.fills, info))


def draw_questions(templates: Sequence[QuestionTemplate], info: ChartInfo, rng,
                   per_chart: tuple[int, int] = (10, 18), split: str = "",
                   tries: int = 3) -> list[QuestionInfo]:
    """Answered questions for one chart, at most one per template.

    Templates whose fills cannot be drawn or whose program fails on this chart
    are skipped in favour of the next candidate.
    """
    applicable = [t for t in templates if info.chart_type in t.applicable_subtypes]
    want = rng.randint(*per_chart)
    order = rng.sample(applicable, len(applicable))
    out: list[QuestionInfo] = []
    for t in order:
        if len(out) >= want:
            break
        for _ in range(tries):
            try:
                q = instantiate(t, info, rng, split)
                out.append(answer_question(q, t, info))
                break
            except EmptyFillDomain:
                break
            except SolveError:
                continue
    return out
