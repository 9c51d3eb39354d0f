import random

import pytest

from chartdoc_forge.charts import ChartSubtype, build_chart, shape_need, subtype_by_name
from chartdoc_forge.hierarchy import load_bundled
from chartdoc_forge.questions import load_bundled_registry
from chartdoc_forge.tables import ShapeConfig, load_pool, make_table, pick_table


@pytest.fixture(scope="session")
def hierarchy():
    return load_bundled()


@pytest.fixture(scope="session")
def pool():
    return load_pool()


@pytest.fixture(scope="session")
def registry():
    return load_bundled_registry()


@pytest.fixture(scope="session")
def templates_by_id(registry):
    return {t.template_id: t for t in registry}


@pytest.fixture(scope="session")
def chart_maker(hierarchy, pool):
    """``make(subtype_name, seed, random_prob=0.2) -> (table, spec, info)``."""

    def make(name, seed, random_prob=0.2):
        rng = random.Random(seed)
        subtype = subtype_by_name(name)
        shapes = ShapeConfig(random_prob=random_prob)
        table = pick_table(pool, hierarchy, rng, shapes, shape_need(name))
        cid = f"L_2023_04_08_00_00_00_{seed % 10}_{subtype.code}"
        spec, info = build_chart(table, subtype, rng, cid)
        return table, spec, info

    return make


@pytest.fixture
def worked_chart():
    """A five-bar chart whose mouse..sunglass interval is [85.6, 100.01, 101.1]."""
    table = make_table(["keyboard", "mouse", "laptop", "sunglass", "hat"], ["price"],
                       [[40.5, 85.6, 100.01, 101.1, 12.0]], "real_world", title="Prices")
    return build_chart(table, ChartSubtype("bar", "Vertical Bar"), random.Random(0),
                       "L_2023_04_08_18_48_12_8_Vbar")


ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """``log(n, ok, detail)`` records one criterion outcome for the terminal summary."""

    def log(n, ok, detail):
        ACCEPTANCE[n] = (ok, detail)
        print(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

    return log


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
