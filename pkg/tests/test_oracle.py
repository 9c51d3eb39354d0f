import random

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from chartdoc_forge.charts import all_subtypes
from chartdoc_forge.errors import ForgeError, SolveError
from chartdoc_forge.oracle import brute_force_oracle
from chartdoc_forge.program import solve
from chartdoc_forge.questions import draw_questions, instantiate


def _palette(info):
    return [(label, name) for label, name, _ in info.colors]


@pytest.mark.parametrize("sub", [s.name for s in all_subtypes()])
def test_engine_matches_oracle_per_subtype(sub, chart_maker, registry):
    rng = random.Random(sub)
    checked = 0
    for seed in range(25):
        table, _, info = chart_maker(sub, seed)
        for q in draw_questions(registry, info, rng):
            t = next(x for x in registry if x.template_id == q.template_id)
            assert brute_force_oracle(q, table, t, _palette(info)) == q.answer, q.question
            checked += 1
    assert checked > 200


@pytest.mark.filterwarnings("ignore:Generating overly large repr")
@settings(max_examples=150, deadline=None, suppress_health_check=list(HealthCheck))
@given(seed=st.integers(0, 10**6), k=st.integers(0, 10**6))
def test_every_template_agrees(chart_maker, registry, seed, k):
    subs = all_subtypes()
    table, _, info = chart_maker(subs[k % len(subs)].name, seed)
    rng = random.Random(seed)
    for t in registry:
        if info.chart_type not in t.applicable_subtypes:
            continue
        try:
            q = instantiate(t, info, rng)
        except ForgeError:
            continue
        try:
            want = solve(t.program, q.fills, info)
        except SolveError:
            with pytest.raises(SolveError):
                brute_force_oracle(q, table, t, _palette(info))
            continue
        assert brute_force_oracle(q, table, t, _palette(info)) == want


def test_both_reject_unsolvable_fills(chart_maker, registry):
    """A wrong-kind fill fails in the engine and in the oracle alike."""
    table, _, info = chart_maker("Vertical Bar", 3)
    t = next(x for x in registry if x.slots == ("entity",) and "Vertical Bar" in x.applicable_subtypes)
    q = instantiate(t, info, random.Random(0))
    bad = type(q)(**{**q.__dict__, "fills": ("no-such-entity",)})
    with pytest.raises(SolveError):
        solve(t.program, bad.fills, info)
    with pytest.raises(SolveError):
        brute_force_oracle(bad, table, t, _palette(info))
