"""Scoring of prediction files against a generated corpus."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Sequence

from .errors import ValidationError
from .questions import ANSWER_TYPES, DIFFICULTIES, QUESTION_TYPES, QuestionInfo

TOLERANCE = Decimal("0.05")
ZERO_EPS = Decimal("1e-9")
EVAL_TYPES = ("yes_no", "numerical", "string")


def _number(x) -> Decimal | None:
    try:
        d = Decimal(str(x).strip())
    except (InvalidOperation, ValueError):
        return None
    return d if d.is_finite() else None


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def judge(pred, truth) -> bool:
    """True when ``pred`` counts as a correct answer for ``truth``. Never raises."""
    if pred is None:
        return False
    if not _is_number(truth):
        return str(pred).strip().casefold() == str(truth).strip().casefold()
    p = _number(pred)
    if p is None:
        return False
    t = Decimal(repr(truth)) if isinstance(truth, float) else Decimal(truth)
    if t == 0:
        return abs(p) <= ZERO_EPS
    try:
        if t == t.to_integral_value():
            return p == t
        return abs(p - t) <= TOLERANCE * abs(t)
    except ArithmeticError:  # exponents beyond the decimal context
        return False


def eval_type(q: QuestionInfo) -> str:
    if q.answer_type == "yes_no":
        return "yes_no"
    return "numerical" if _is_number(q.answer) else "string"


def parse_predictions(lines: Iterable[str]) -> dict[str, str]:
    """``question_id<TAB>answer`` lines; blank lines are skipped."""
    preds: dict[str, str] = {}
    for n, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        if "\t" not in line:
            raise ValidationError(f"predictions line {n}: expected question_id<TAB>answer")
        qid, answer = line.split("\t", 1)
        qid = qid.strip()
        if qid in preds:
            raise ValidationError(f"predictions line {n}: duplicate question id {qid!r}")
        preds[qid] = answer
    return preds


@dataclass
class Cell:
    correct: int = 0
    total: int = 0

    @property
    def accuracy(self) -> float | None:
        """None for an empty cell, which has no defined accuracy."""
        return self.correct / self.total if self.total else None

    def add(self, ok: bool) -> None:
        self.total += 1
        self.correct += ok


def _cells(keys) -> dict[str, Cell]:
    return {k: Cell() for k in keys}


@dataclass
class EvalReport:
    overall: Cell = field(default_factory=Cell)
    by_level: dict[str, Cell] = field(default_factory=lambda: _cells(DIFFICULTIES))
    by_question_type: dict[str, Cell] = field(default_factory=lambda: _cells(QUESTION_TYPES))
    by_answer_type: dict[str, Cell] = field(default_factory=lambda: _cells(ANSWER_TYPES))
    by_eval_type: dict[str, Cell] = field(default_factory=lambda: _cells(EVAL_TYPES))
    unknown_ids: list[str] = field(default_factory=list)
    answered: int = 0

    @property
    def accuracy(self) -> float:
        return self.overall.accuracy or 0.0

    def to_dict(self) -> dict:
        def group(cells):
            return {k: {"accuracy": c.accuracy, "correct": c.correct, "total": c.total}
                    for k, c in cells.items()}
        return {
            "accuracy": self.accuracy,
            "correct": self.overall.correct,
            "total": self.overall.total,
            "answered": self.answered,
            "by_level": group(self.by_level),
            "by_question_type": group(self.by_question_type),
            "by_answer_type": group(self.by_answer_type),
            "by_eval_type": group(self.by_eval_type),
            "unknown_ids": list(self.unknown_ids),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"{'group':<16} {'cell':<14} {'acc':>7} {'n':>8}"]
        lines.append(f"{'overall':<16} {'all':<14} {self.accuracy:>7.4f} "
                     f"{self.overall.total:>8}")
        for name, cells in (("level", self.by_level), ("question_type", self.by_question_type),
                            ("answer_type", self.by_answer_type),
                            ("eval_type", self.by_eval_type)):
            for k, c in cells.items():
                acc = "-" if c.accuracy is None else f"{c.accuracy:.4f}"
                lines.append(f"{name:<16} {k:<14} {acc:>7} {c.total:>8}")
        if self.unknown_ids:
            lines.append(f"unknown question ids ({len(self.unknown_ids)}): "
                         + ", ".join(self.unknown_ids[:10])
                         + (" ..." if len(self.unknown_ids) > 10 else ""))
        return "\n".join(lines) + "\n"


def evaluate(preds: dict[str, str] | Iterable[str], corpus: Sequence[QuestionInfo]) -> EvalReport:
    """Judge every corpus question; missing predictions count as wrong."""
    if not isinstance(preds, dict):
        preds = parse_predictions(preds)
    report = EvalReport()
    known = set()
    for q in corpus:
        known.add(q.question_id)
        pred = preds.get(q.question_id)
        report.answered += pred is not None
        ok = judge(pred, q.answer)
        for cell in (report.overall, report.by_level[q.difficulty],
                     report.by_question_type[q.question_type],
                     report.by_answer_type[q.answer_type], report.by_eval_type[eval_type(q)]):
            cell.add(ok)
    report.unknown_ids = sorted(set(preds) - known)
    return report
