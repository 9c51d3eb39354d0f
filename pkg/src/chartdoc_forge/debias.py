"""Per-template Yes/No rebalancing by re-sampling question fills."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .charts import ChartInfo
from .errors import EmptyFillDomain, SolveError
from .program import solve
from .questions import QuestionInfo, QuestionTemplate, render_question, sample_fills

MAX_ATTEMPTS = 50


@dataclass
class TemplateBias:
    yes_before: int
    no_before: int
    yes_count: int
    no_count: int
    balanced: bool
    mutations_applied: int = 0

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class BiasReport:
    templates: dict[int, TemplateBias] = field(default_factory=dict)
    yes_share_before: float = 0.0
    yes_share_after: float = 0.0

    @property
    def unbalanced(self) -> list[int]:
        return [tid for tid, b in self.templates.items() if not b.balanced]

    @property
    def mutations(self) -> int:
        return sum(b.mutations_applied for b in self.templates.values())

    def to_dict(self):
        return {
            "yes_share_before": self.yes_share_before,
            "yes_share_after": self.yes_share_after,
            "mutations_applied": self.mutations,
            "unbalanced_templates": self.unbalanced,
            "templates": {str(tid): b.to_dict() for tid, b in sorted(self.templates.items())},
        }


def tally(corpus: Sequence[QuestionInfo]) -> dict[int, tuple[int, int]]:
    """(yes, no) counts per template, yes/no templates only."""
    counts: dict[int, Counter] = {}
    for q in corpus:
        if q.answer_type != "yes_no":
            continue
        counts.setdefault(q.template_id, Counter())[q.answer] += 1
    return {tid: (c["Yes"], c["No"]) for tid, c in sorted(counts.items())}


def _yes_share(counts: Mapping[int, tuple[int, int]]) -> float:
    yes = sum(y for y, _ in counts.values())
    total = sum(y + n for y, n in counts.values())
    return yes / total if total else 0.0


def _try_flip(q: QuestionInfo, t: QuestionTemplate, info: ChartInfo, rng, want: str,
              max_attempts: int) -> QuestionInfo | None:
    has_values = "value" in t.slots
    for attempt in range(max_attempts):
        # value slots are the cheapest to move; fall back to redrawing every slot
        values_only = has_values and attempt < max_attempts // 2
        try:
            if values_only:
                fills = sample_fills(t, info, rng, keep=q.fills, resample=frozenset({"value"}))
            else:
                fills = sample_fills(t, info, rng)
            answer = solve(t.program, fills, info)
        except (EmptyFillDomain, SolveError):
            continue
        if answer == want:
            return replace(q, fills=tuple(fills), question=render_question(t, fills),
                           answer=answer)
    return None


def debias(corpus: Sequence[QuestionInfo], charts: Mapping[str, ChartInfo], rng,
           templates: Mapping[int, QuestionTemplate],
           max_attempts: int = MAX_ATTEMPTS) -> tuple[list[QuestionInfo], BiasReport]:
    """Flip majority answers until each yes/no template has |yes - no| <= 1.

    Templates are processed in ascending id.  A template that runs out of
    flippable questions is left as it is and reported unbalanced.
    """
    out = list(corpus)
    before = tally(out)
    report = BiasReport(yes_share_before=_yes_share(before))
    by_template: dict[int, list[int]] = {}
    for k, q in enumerate(out):
        if q.answer_type == "yes_no":
            by_template.setdefault(q.template_id, []).append(k)
    for tid in sorted(by_template):
        yes, no = before[tid]
        entry = TemplateBias(yes, no, yes, no, abs(yes - no) <= 1)
        report.templates[tid] = entry
        if entry.balanced:
            continue
        t = templates[tid]
        majority = "Yes" if yes > no else "No"
        minority = "No" if majority == "Yes" else "Yes"
        candidates = [k for k in by_template[tid] if out[k].answer == majority]
        rng.shuffle(candidates)
        for k in candidates:
            if abs(entry.yes_count - entry.no_count) <= 1:
                break
            flipped = _try_flip(out[k], t, charts[out[k].chart_id], rng, minority, max_attempts)
            if flipped is None:
                continue
            out[k] = flipped
            entry.mutations_applied += 1
            if minority == "Yes":
                entry.yes_count, entry.no_count = entry.yes_count + 1, entry.no_count - 1
            else:
                entry.yes_count, entry.no_count = entry.yes_count - 1, entry.no_count + 1
        entry.balanced = abs(entry.yes_count - entry.no_count) <= 1
    report.yes_share_after = _yes_share(tally(out))
    return out, report
