import json
from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from chartdoc_forge.errors import ValidationError
from chartdoc_forge.evaluate import EvalReport, eval_type, evaluate, judge, parse_predictions
from chartdoc_forge.questions import QuestionInfo


@pytest.mark.parametrize("truth,pred,ok", [
    (95.57, "95.57", True),
    (100.50, "105.52", True),
    (100.50, "105.53", False),
    (100.50, "95.475", True),
    (100.50, "95.47", False),
    (-20.0 + 0.5, "-20.47", True),
    ("Yes", "yes", True),
    ("Yes", " YES ", True),
    ("Yes", "no", False),
    ("mouse", "Mouse", True),
    ("mouse", "mice", False),
    (7, "7", True),
    (7, "7.0", True),
    (7, "7.2", False),
    (0.0, "0", True),
    (0.0, "1e-10", True),
    (0.0, "0.001", False),
    (12.5, "twelve", False),
    (12.5, "nan", False),
    (12.5, None, False),
])
def test_judge_cases(truth, pred, ok):
    assert judge(pred, truth) is ok


@given(st.decimals(min_value=Decimal("0.01"), max_value=Decimal("1e6"), places=2),
       st.integers(-100, 100))
def test_five_percent_boundary(truth, k):
    t = float(truth)
    if t == int(t):
        return
    pred = Decimal(repr(t)) * (1 + Decimal(k) / 2000)   # k/2000 steps of the relative error
    assert judge(str(pred), t) is (abs(k) <= 100)


@given(st.decimals(min_value=Decimal("0.01"), max_value=Decimal("1e4"), places=2),
       st.decimals(min_value=Decimal("0.01"), max_value=Decimal("1e4"), places=2),
       st.sampled_from([Decimal(10), Decimal(100), Decimal("0.1")]))
def test_scale_covariance(truth, pred, scale):
    t, ts = float(truth), float(truth * scale)
    if t == int(t) or ts == int(ts):
        return
    assert judge(str(pred), t) == judge(str(pred * scale), ts)


@given(st.one_of(st.none(), st.text(), st.floats().map(str)),
       st.one_of(st.text(), st.integers(), st.floats(allow_nan=False, allow_infinity=False)))
def test_judge_is_total(pred, truth):
    assert judge(pred, truth) in (True, False)


def _q(i, answer, level, qtype="reasoning", atype="open_vocab"):
    return QuestionInfo(question=f"q{i}", answer=answer, chart_id="c", chart_type="Vertical Bar",
                        question_id=f"c_{i}", question_type=qtype, template_id=i,
                        difficulty=level, answer_type=atype, fills=(), split="test")


@pytest.fixture
def ten():
    corpus = [
        _q(0, 5, "beginner"),
        _q(1, "Yes", "beginner", atype="yes_no"),
        _q(2, 12.34, "elementary", atype="elements"),
        _q(3, "No", "elementary", atype="yes_no"),
        _q(4, 48.1, "intermediate"),
        _q(5, "mouse", "intermediate", atype="elements"),
        _q(6, 3, "intermediate"),
        _q(7, 250.5, "advanced"),
        _q(8, "Asia", "expert", "common_sense"),
        _q(9, "Yes", "expert", "common_sense", "yes_no"),
    ]
    preds = {"c_0": "5", "c_1": "yes", "c_2": "12.9", "c_3": "Yes", "c_4": "60",
             "c_5": "MOUSE", "c_6": "3", "c_7": "0", "c_8": "asia"}   # c_9 unanswered
    return corpus, preds


def test_hand_scored_fixture(ten):
    corpus, preds = ten
    r = evaluate(preds, corpus)
    assert r.overall.correct == 6 and r.overall.total == 10
    assert r.accuracy == pytest.approx(0.6)
    assert r.answered == 9
    levels = {k: (c.correct, c.total) for k, c in r.by_level.items()}
    assert levels == {"beginner": (2, 2), "elementary": (1, 2), "intermediate": (2, 3),
                      "advanced": (0, 1), "expert": (1, 2)}
    assert (r.by_question_type["common_sense"].correct, r.by_question_type["common_sense"].total) == (1, 2)
    assert {k: c.total for k, c in r.by_eval_type.items()} == \
        {"yes_no": 3, "numerical": 5, "string": 2}


def test_cells_partition_total(ten):
    corpus, preds = ten
    r = evaluate(preds, corpus)
    for group in (r.by_level, r.by_question_type, r.by_answer_type, r.by_eval_type):
        assert sum(c.total for c in group.values()) == r.overall.total
        assert sum(c.correct for c in group.values()) == r.overall.correct
        for c in group.values():
            assert c.accuracy is None or 0 <= c.accuracy <= 1


def test_all_correct_and_empty(ten):
    corpus, _ = ten
    truth = {q.question_id: str(q.answer) for q in corpus}
    r = evaluate(truth, corpus)
    assert r.accuracy == 1.0
    for group in (r.by_level, r.by_question_type, r.by_answer_type, r.by_eval_type):
        assert all(c.accuracy in (1.0, None) for c in group.values())
    empty = evaluate({}, corpus)
    assert empty.accuracy == 0.0 and empty.overall.total == 10 and empty.answered == 0


def test_unknown_ids_reported(ten):
    corpus, preds = ten
    r = evaluate({**preds, "zzz_1": "3"}, corpus)
    assert r.unknown_ids == ["zzz_1"] and r.overall.total == 10
    d = json.loads(r.to_json())
    assert d["unknown_ids"] == ["zzz_1"] and d["by_level"]["advanced"]["accuracy"] == 0.0
    assert "zzz_1" in r.to_text()
    assert EvalReport().to_dict()["by_level"]["expert"]["accuracy"] is None


def test_parse_predictions():
    assert parse_predictions(["a\t1\n", "\n", "b\tsome text\twith tab\n"]) == \
        {"a": "1", "b": "some text\twith tab"}
    with pytest.raises(ValidationError):
        parse_predictions(["a 1"])
    with pytest.raises(ValidationError):
        parse_predictions(["a\t1", "a\t2"])


def test_eval_type_mapping():
    assert eval_type(_q(0, "Yes", "beginner", atype="yes_no")) == "yes_no"
    assert eval_type(_q(0, 2.5, "beginner", atype="elements")) == "numerical"
    assert eval_type(_q(0, 4, "beginner")) == "numerical"
    assert eval_type(_q(0, "red", "beginner", atype="elements")) == "string"
