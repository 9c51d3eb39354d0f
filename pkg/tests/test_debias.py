import random

import pytest
from hypothesis import given, strategies as st

from chartdoc_forge.charts import all_subtypes
from chartdoc_forge.debias import debias, tally
from chartdoc_forge.program import parse_program, solve
from chartdoc_forge.questions import QuestionInfo, QuestionTemplate, draw_questions, make_question


def _q(tid, answer, n=0, answer_type="yes_no"):
    return QuestionInfo(question="q", answer=answer, chart_id=f"c{n}", chart_type="Vertical Bar",
                        question_id=f"c{n}_{tid}", question_type="reasoning", template_id=tid,
                        difficulty="beginner", answer_type=answer_type, fills=(), split="train")


def test_tally_example():
    corpus = [_q(5, a, n) for n, a in enumerate("YNYNNYNN")]
    corpus = [QuestionInfo(**{**q.__dict__, "answer": "Yes" if q.answer == "Y" else "No"})
              for q in corpus]
    corpus.append(_q(9, 4, answer_type="open_vocab"))
    assert tally(corpus) == {5: (3, 5)}


@given(st.lists(st.tuples(st.integers(1, 6), st.sampled_from(["Yes", "No"])), max_size=60),
       st.randoms(use_true_random=False))
def test_tally_is_order_free(items, rnd):
    corpus = [_q(t, a, n) for n, (t, a) in enumerate(items)]
    shuffled = corpus[:]
    rnd.shuffle(shuffled)
    assert tally(shuffled) == tally(corpus)
    assert sum(y + n for y, n in tally(corpus).values()) == len(items)


def _const_template(tid=900):
    return QuestionTemplate(tid, "Does the chart show any entity?", (), "reasoning", "yes_no",
                            "elementary", frozenset(s.name for s in all_subtypes()),
                            parse_program("s1 = countEntities()\ns2 = greaterThan(s1, 0)"))


@pytest.fixture(scope="module")
def corpus(chart_maker, registry):
    rng = random.Random(11)
    charts, qs = {}, []
    subs = all_subtypes()
    for k in range(400):
        _, _, info = chart_maker(subs[k % len(subs)].name, k)
        info = type(info)(**{**info.__dict__, "chart_id": f"{info.chart_id}_{k}"})
        charts[info.chart_id] = info
        qs += draw_questions(registry, info, rng)
    return charts, qs


def test_balanced_template_untouched(corpus, registry):
    charts, _ = corpus
    ids = list(charts)
    qs = [_q(7, "Yes" if n % 2 else "No", n) for n in range(20)]
    qs = [QuestionInfo(**{**q.__dict__, "chart_id": ids[n]}) for n, q in enumerate(qs)]
    out, report = debias(qs, charts, random.Random(0), {t.template_id: t for t in registry})
    assert out == qs
    assert report.templates[7].mutations_applied == 0 and report.templates[7].balanced


def test_constant_template_reported(corpus):
    charts, _ = corpus
    t = _const_template()
    qs = [make_question(t, info, [], solve(t.program, [], info)) for info in
          list(charts.values())[:12]]
    assert {q.answer for q in qs} == {"Yes"}
    out, report = debias(qs, charts, random.Random(0), {t.template_id: t}, max_attempts=5)
    assert out == qs
    assert report.unbalanced == [t.template_id]
    assert report.templates[t.template_id].to_dict()["yes_count"] == 12


def test_corpus_balance(corpus, templates_by_id):
    charts, qs = corpus
    out, report = debias(qs, charts, random.Random(3), templates_by_id)
    assert len(out) == len(qs)
    counts = tally(out)
    for tid, (y, n) in counts.items():
        assert (abs(y - n) <= 1) == (tid not in report.unbalanced)
        entry = report.templates[tid]
        assert (entry.yes_count, entry.no_count) == (y, n)
    changed = 0
    for old, new in zip(qs, out):
        assert new.question_id == old.question_id
        if old != new:
            changed += 1
            assert new.answer_type == "yes_no" and new.answer != old.answer
            t = templates_by_id[new.template_id]
            assert solve(t.program, new.fills, charts[new.chart_id]) == new.answer
    assert changed == report.mutations > 0
    assert abs(report.yes_share_after - 0.5) < abs(report.yes_share_before - 0.5) + 1e-12
    again, _ = debias(qs, charts, random.Random(3), templates_by_id)
    assert again == out
