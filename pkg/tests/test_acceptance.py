"""Acceptance criteria 1-10, each at its stated tolerance; one PASS/FAIL line per criterion."""

import json
import random
import time
from collections import Counter

import pytest
import xmlschema

from chartdoc_forge.charts import SUBTYPE_CODES, all_subtypes
from chartdoc_forge.debias import tally
from chartdoc_forge.documents import PADDING, SCHEMA, check_record, parse_annotation
from chartdoc_forge.errors import ValidationError
from chartdoc_forge.evaluate import judge
from chartdoc_forge.hierarchy import build_hierarchy, dumps, loads, to_edges
from chartdoc_forge.oracle import brute_force_oracle
from chartdoc_forge.pipeline import GenConfig, generate, read_questions, stats
from chartdoc_forge.program import solve
from chartdoc_forge.questions import DIFFICULTIES, classify_difficulty, draw_questions
from chartdoc_forge.render import render
from svgtools import bar_extents, expected_bar_extents, parse, wedges

FAMILY_TARGETS = {"bar": 0.3667, "line": 0.2333, "pie": 0.1333, "scatter": 0.1333,
                  "box": 0.1000, "combination": 0.0333}


@pytest.fixture(scope="module")
def big_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance") / "big"
    t0 = time.monotonic()
    generate(GenConfig(doc_count=5001, master_seed=2023), out, jobs=1)
    return out, time.monotonic() - t0


def test_c01_worked_example(worked_chart, templates_by_id, acceptance_log):
    t0 = time.monotonic()
    _, info = worked_chart
    answer = solve(templates_by_id[30].program, ["mouse", "sunglass"], info)
    dt = time.monotonic() - t0
    ok = answer == 95.57 and dt < 1.0
    acceptance_log(1, ok, f"answer={answer!r} in {dt:.3f}s")
    assert ok


def test_c02_oracle_equivalence(chart_maker, registry, templates_by_id, acceptance_log):
    t0 = time.monotonic()
    rng = random.Random(2)
    subs = all_subtypes()
    questions, k = [], 0
    while len(questions) < 1000:
        table, _, info = chart_maker(subs[k % len(subs)].name, 1000 + k)
        palette = [(label, name) for label, name, _ in info.colors]
        questions += [(q, table, palette) for q in draw_questions(registry, info, rng)]
        k += 1
    questions = questions[:1000]
    agree = sum(brute_force_oracle(q, table, templates_by_id[q.template_id], palette) == q.answer
                for q, table, palette in questions)
    families = {subs[i % len(subs)].family for i in range(k)}
    dt = time.monotonic() - t0
    ok = agree == 1000 and families == set(SUBTYPE_CODES) and dt < 60
    acceptance_log(2, ok, f"{agree}/1000 agree over {k} charts, {len(families)} families, "
                          f"{dt:.1f}s")
    assert ok


def test_c03_debias_balance(big_run, acceptance_log):
    out, elapsed = big_run
    report = json.loads((out / "bias_report.json").read_text())
    counts = tally(read_questions(out))
    n_yes_no = sum(y + n for y, n in counts.values())
    unbalanced = set(report["unbalanced_templates"])
    worst = max(abs(y - n) for tid, (y, n) in counts.items() if tid not in unbalanced)
    share = sum(y for y, _ in counts.values()) / n_yes_no
    ok = n_yes_no >= 5000 and worst <= 1 and 0.49 <= share <= 0.51 and elapsed < 300
    acceptance_log(3, ok, f"{n_yes_no} yes/no questions, max |yes-no|={worst}, "
                          f"yes-share {report['yes_share_before']:.4f} -> {share:.4f}, "
                          f"{len(unbalanced)} unbalanceable, run {elapsed:.0f}s")
    assert ok


def test_c04_distribution(big_run, acceptance_log):
    out, elapsed = big_run
    s = stats(out)
    fam_err = max(abs(s["family_proportions"][f] - p) for f, p in FAMILY_TARGETS.items())
    split_err = max(abs(s["split_fractions"][sp] - p)
                    for sp, p in (("train", 0.80), ("val", 0.10), ("test", 0.10)))
    ok = s["documents"] == 5001 and fam_err <= 0.01 and split_err <= 0.005 and elapsed < 600
    acceptance_log(4, ok, f"max family error {fam_err:.4f}, max split error {split_err:.4f}, "
                          f"run {elapsed:.0f}s")
    assert ok


def test_c05_determinism(tmp_path, acceptance_log):
    cfg = GenConfig(doc_count=40, master_seed=99)
    a = generate(cfg, tmp_path / "a", jobs=1)
    b = generate(cfg, tmp_path / "b", jobs=3)
    c = generate(cfg, tmp_path / "c", jobs=1)
    same_digests = a["files"] == b["files"] == c["files"]
    same_bytes = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
                     for f in a["files"] if f.startswith(("docs/", "annotations/")))
    ok = same_digests and same_bytes
    acceptance_log(5, ok, f"{len(a['files'])} files identical across jobs=1, 3, 1")
    assert ok


def test_c06_annotation_validity(big_run, acceptance_log):
    out, _ = big_run
    schema = xmlschema.XMLSchema(str(SCHEMA))
    files = sorted((out / "annotations").glob("*.xml"))[:1000]
    bad = 0
    for p in files:
        data = p.read_bytes()
        rec = parse_annotation(data)
        try:
            schema.validate(data.decode("utf-8"))
            check_record(rec)
        except (ValidationError, xmlschema.XMLSchemaValidationError):
            bad += 1
            continue
        W, H = rec.page_size
        kinds = Counter(e.kind for e in rec.elements)
        chart = next(e for e in rec.elements if e.kind == "chart_image")
        cap = next(e for e in rec.elements if e.kind == "caption")
        in_page = all(0 <= e.bbox[0] < e.bbox[2] <= W and 0 <= e.bbox[1] < e.bbox[3] <= H
                      for e in rec.elements)
        adjacent = cap.column == chart.column and 0 <= cap.bbox[1] - chart.bbox[3] <= PADDING
        if not (in_page and adjacent and kinds["chart_image"] == 1 and kinds["caption"] == 1):
            bad += 1
    ok = len(files) == 1000 and bad == 0
    acceptance_log(6, ok, f"{len(files) - bad}/{len(files)} annotations valid")
    assert ok


def test_c07_renderer_faithfulness(chart_maker, acceptance_log):
    bars = list(SUBTYPE_CODES["bar"])
    worst, marks = 0.0, 0
    for k in range(200):
        name = bars[k % len(bars)]
        table, spec, _ = chart_maker(name, 5000 + k)
        root = parse(render(spec).to_string())
        got = bar_extents(root, name in ("Horizontal Bar", "Stack Horizontal Bar",
                                         "Group Horizontal Bar"))
        exp = expected_bar_extents(table, name)
        assert [g[:2] for g in got] == [e[:2] for e in exp]
        for (_, _, glo, ghi, tol), (_, _, elo, ehi) in zip(got, exp):
            worst = max(worst, abs(glo - elo) / tol, abs(ghi - ehi) / tol)
            marks += 1
    pie_err = 0.0
    for k in range(60):
        name = list(SUBTYPE_CODES["pie"])[k % len(SUBTYPE_CODES["pie"])]
        table, spec, _ = chart_maker(name, 7000 + k)
        ws = wedges(parse(render(spec).to_string()))
        for label in {w[0] for w in ws}:
            total = sum(a1 - a0 for s, _, a0, a1, _, _ in ws if s == label)
            pie_err = max(pie_err, abs(total - 360.0))
    ok = worst <= 1.0 and pie_err <= 1e-6
    acceptance_log(7, ok, f"{marks} bar marks, worst error {worst * 0.5:.3f}px; "
                          f"max pie angle-sum error {pie_err:.2e} deg")
    assert ok


JUDGE_CASES = [
    (100.50, "105.52", True), (100.50, "105.53", False),
    (100.50, "95.475", True), (100.50, "95.47", False),
    (95.57, "95.57", True), (95.57, "100.34", True), (95.57, "100.35", False),
    (0.0, "0", True), (0.0, "0.0000000001", True), (0.0, "0.01", False),
    (7, "7", True), (7, "7.00", True), (7, "7.3", False), (12, "11.9", False),
    ("Yes", "yes", True), ("Yes", "no", False), ("No", " NO ", True),
    ("mouse", "Mouse", True), ("mouse", "mouse pad", False), (12.5, "abc", False),
]


def test_c08_metric_boundaries(acceptance_log):
    hits = sum(judge(pred, truth) is want for truth, pred, want in JUDGE_CASES)
    ok = len(JUDGE_CASES) == 20 and hits == 20
    acceptance_log(8, ok, f"{hits}/{len(JUDGE_CASES)} judge cases")
    assert ok


def test_c09_difficulty_classifier(registry, acceptance_log):
    agree = sum(classify_difficulty(t) == t.difficulty for t in registry)
    branches = {classify_difficulty(t) for t in registry}
    ok = len(registry) >= 48 and agree == len(registry) and branches == set(DIFFICULTIES)
    acceptance_log(9, ok, f"{agree}/{len(registry)} templates agree, {len(branches)}/5 branches")
    assert ok


def _fixture_dag(seed, n=500):
    rng = random.Random(seed)
    names = [f"n{i:03d}" for i in range(n)]
    edges = []
    for i, name in enumerate(names):
        if i < 10:
            continue   # ten roots
        k = 1 if rng.random() < 0.7 else rng.randint(2, 3)
        edges.append((name, sorted(rng.sample(names[:i], min(k, i)))))
    return edges


def test_c10_hierarchy(acceptance_log):
    dag = _fixture_dag(10)
    assert len({x for c, ps in dag for x in [c, *ps]}) == 500
    h = build_hierarchy(dag)
    shuffled = dag[:]
    random.Random(1).shuffle(shuffled)
    h2 = build_hierarchy([(c, list(reversed(ps))) for c, ps in shuffled])
    single = [n for n, node in h.nodes.items() if len(node.children) == 1]
    tree = all(node.parent is None or n in h.nodes[node.parent].children
               for n, node in h.nodes.items())
    acyclic = True
    for n in h.nodes:
        seen, cur = set(), n
        while cur is not None:
            if cur in seen:
                acyclic = False
                break
            seen.add(cur)
            cur = h.nodes[cur].parent
    stable = loads(dumps(h)) == h and dumps(loads(dumps(h))) == dumps(h) \
        and build_hierarchy(to_edges(h)) == h
    reproducible = h2 == h and dumps(h2) == dumps(h)
    ok = tree and acyclic and not single and stable and reproducible
    acceptance_log(10, ok, f"{len(h.nodes)} nodes kept of 500, single-child={len(single)}, "
                           f"stable={stable}, tie-break reproducible={reproducible}")
    assert ok
