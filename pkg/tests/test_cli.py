import json
import subprocess
import sys

import pytest

from chartdoc_forge.cli import main


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "ds"
    assert main(["generate", "--seed", "3", "--doc-count", "4", "--out", str(out)]) == 0
    return out


def test_generate_refuses_non_empty(dataset, capsys):
    assert main(["generate", "--seed", "3", "--doc-count", "4", "--out", str(dataset)]) == 1
    assert "--force" in capsys.readouterr().err
    before = json.loads((dataset / "manifest.json").read_text())
    assert main(["generate", "--seed", "3", "--doc-count", "4", "--out", str(dataset),
                 "--force"]) == 0
    assert json.loads((dataset / "manifest.json").read_text())["files"] == before["files"]


def test_generate_config_and_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"doc_count": 5, "split_ratios": [1, 0, 0]}))
    out = tmp_path / "a"
    assert main(["generate", "--config", str(cfg), "--seed", "1", "--out", str(out),
                 "--doc-count", "2", "--jobs", "2"]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["counts"]["docs"] == 2 and m["config"]["master_seed"] == 1
    assert (out / "qa" / "val.jsonl").read_text() == ""


@pytest.mark.parametrize("argv", [
    ["generate", "--out", "x"],
    ["generate", "--seed", "1", "--out", "x", "--doc-count", "0"],
    ["generate", "--seed", "1", "--out", "x", "--split-ratios", "1,2"],
    ["generate", "--seed", "1", "--out", "x", "--jobs", "0"],
    ["generate", "--seed", "1", "--out", "x", "--pool", "/no/such/dir"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as e:
        code = main(argv)
        raise SystemExit(code)
    assert e.value.code == 1


def test_generate_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{oops")
    assert main(["generate", "--config", str(cfg), "--seed", "1", "--out",
                 str(tmp_path / "o")]) == 1
    cfg.write_text(json.dumps({"colour": 1}))
    assert main(["generate", "--config", str(cfg), "--seed", "1", "--out",
                 str(tmp_path / "o")]) == 1


def test_stats_and_debias(dataset, capsys, tmp_path):
    assert main(["stats", "--dataset", str(dataset)]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["documents"] == 4
    assert main(["debias", "--dataset", str(dataset)]) == 0
    assert main(["stats", "--dataset", str(tmp_path)]) == 1


def test_evaluate(dataset, tmp_path, capsys):
    qs = [json.loads(l) for f in sorted((dataset / "qa").glob("*.jsonl"))
          for l in f.read_text().splitlines()]
    preds = tmp_path / "p.tsv"
    preds.write_text("".join(f"{q['question_id']}\t{q['answer']}\n" for q in qs)
                     + "bogus_id\t1\n")
    report = tmp_path / "r.json"
    assert main(["evaluate", "--dataset", str(dataset), "--preds", str(preds),
                 "--report", str(report)]) == 0
    r = json.loads(report.read_text())
    assert r["accuracy"] == 1.0 and r["total"] == len(qs) and r["unknown_ids"] == ["bogus_id"]
    assert "overall" in capsys.readouterr().err

    missing = tmp_path / "r2.json"
    assert main(["evaluate", "--dataset", str(dataset), "--preds", str(tmp_path / "none.tsv"),
                 "--report", str(missing)]) == 1
    assert not missing.exists()
    preds.write_text("no tab here\n")
    assert main(["evaluate", "--dataset", str(dataset), "--preds", str(preds),
                 "--report", str(missing)]) == 1


def test_render_chart(dataset, tmp_path):
    spec = next((dataset / "charts").glob("*.json"))
    # chart JSON files hold ChartInfo, not specs; build a spec file instead
    from chartdoc_forge.charts import ChartSubtype, build_chart
    from chartdoc_forge.tables import make_table
    import random
    table = make_table(["a", "b", "c"], ["v"], [[1.0, 2.5, 3.0]], "real_world", title="T")
    chart_spec, _ = build_chart(table, ChartSubtype("bar", "Vertical Bar"), random.Random(0), "X")
    p = tmp_path / "spec.json"
    p.write_text(json.dumps(chart_spec.to_dict()))
    out = tmp_path / "c.svg"
    assert main(["render-chart", "--spec", str(p), "--out", str(out)]) == 0
    assert out.read_text().lstrip().startswith("<?xml") or "<svg" in out.read_text()
    assert main(["render-chart", "--spec", str(spec), "--out", str(out)]) == 1


def test_build_hierarchy(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("dog\tanimal\ncat\tanimal\noak\tplant\npine\tplant\nanimal\tentity\n"
                     "plant\tentity\n")
    out = tmp_path / "h.json"
    assert main(["build-hierarchy", "--edges", str(edges), "--out", str(out)]) == 0
    assert out.exists()
    assert main(["build-hierarchy", "--edges", str(tmp_path / "nope"), "--out", str(out)]) == 1


def test_console_script_version():
    r = subprocess.run([sys.executable, "-m", "chartdoc_forge.cli", "--version"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "chartdoc-forge" in r.stdout
