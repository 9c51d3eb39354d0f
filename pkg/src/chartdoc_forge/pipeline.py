"""End-to-end dataset generation, manifest and statistics."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import multiprocessing
import shutil
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Sequence

from .charts import (
    FAMILY_WEIGHTS,
    SUBTYPE_CODES,
    ChartInfo,
    ChartSubtype,
    build_chart,
    family_from_unit,
    load_colors,
    make_chart_id,
    shape_need,
    subtype_by_name,
)
from .debias import MAX_ATTEMPTS, debias, tally
from .documents import (
    BUNDLED_IMAGES,
    FillerText,
    answer_text,
    compose_page,
    load_image_pool,
    parse_annotation,
    write_annotation,
)
from .errors import DocumentError, ForgeError, ManifestMismatch, ValidationError
from .hierarchy import BUNDLED_EDGES, build_hierarchy, load_edges
from .questions import BUNDLED_REGISTRY, QuestionInfo, draw_questions, load_registry
from .render import render
from .seeding import child_rng, unit_offset, weyl_point
from .tables import BUNDLED_POOL, ShapeConfig, load_pool, pick_table, to_csv

log = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
DEFAULT_RATIOS = (0.8002, 0.0996, 0.1002)
GOLDEN = (math.sqrt(5) - 1) / 2
SILVER = math.sqrt(2) - 1
MANIFEST = "manifest.json"


@dataclass
class GenConfig:
    doc_count: int = 100
    master_seed: int = 0
    split_ratios: tuple[float, float, float] = DEFAULT_RATIOS
    questions_per_chart: tuple[int, int] = (10, 18)
    family_weights: dict = field(default_factory=lambda: dict(FAMILY_WEIGHTS))
    entities: tuple[int, int] = (3, 10)
    legends: tuple[int, int] = (1, 4)
    parents: tuple[int, int] = (2, 4)
    children: tuple[int, int] = (2, 5)
    box_points: int = 20
    random_prob: float = 0.2
    max_attempts: int = MAX_ATTEMPTS
    epoch: str = "2023-04-08T00:00:00"
    machine: str = "L"
    edges: str | None = None
    registry: str | None = None
    pool: str | None = None
    images: str | None = None
    colors: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.doc_count, int) or self.doc_count < 1:
            raise ValidationError("doc_count must be >= 1")
        r = tuple(float(x) for x in self.split_ratios)
        if len(r) != 3 or any(x < 0 for x in r) or abs(sum(r) - 1) > 1e-9:
            raise ValidationError("split ratios must be three non-negative numbers summing to 1")
        self.split_ratios = r
        for name in ("questions_per_chart", "entities", "legends", "parents", "children"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValidationError(f"{name} must be a range lo <= hi with lo >= 1")
            setattr(self, name, (int(lo), int(hi)))
        if self.entities[0] < 2:
            raise ValidationError("charts need at least two entities")
        if set(self.family_weights) - set(SUBTYPE_CODES) or \
                any(w < 0 for w in self.family_weights.values()) or \
                sum(self.family_weights.values()) <= 0:
            raise ValidationError("family_weights must map chart families to non-negative weights")
        if not 0 <= self.random_prob <= 1:
            raise ValidationError("random_prob must lie in [0, 1]")
        if self.box_points < 5:
            raise ValidationError("box_points must be >= 5")
        if self.max_attempts < 1:
            raise ValidationError("max_attempts must be >= 1")
        try:
            datetime.fromisoformat(self.epoch)
        except ValueError:
            raise ValidationError(f"bad epoch {self.epoch!r}") from None
        if len(self.machine) != 1 or not self.machine.isupper():
            raise ValidationError("machine must be one uppercase letter")

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = dict(d)
        for k in ("split_ratios", "questions_per_chart", "entities", "legends", "parents",
                  "children"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)

    @property
    def shapes(self) -> ShapeConfig:
        return ShapeConfig(self.entities, self.legends, self.parents, self.children,
                           self.box_points, self.random_prob)


def assign_split(doc_index: int, ratios: Sequence[float], master_seed) -> str:
    """Stratified deterministic split: a low-discrepancy point per document index."""
    u = weyl_point(doc_index, SILVER, unit_offset(master_seed, "split"))
    acc = 0.0
    for name, r in zip(SPLITS, ratios):
        acc += r
        if u < acc:
            return name
    return next(n for n, r in zip(reversed(SPLITS), reversed(ratios)) if r > 0)


def doc_subtype(cfg: GenConfig, index: int, rng) -> ChartSubtype:
    u = weyl_point(index, GOLDEN, unit_offset(cfg.master_seed, "family"))
    family = family_from_unit(u, cfg.family_weights)
    return ChartSubtype(family, rng.choice(list(SUBTYPE_CODES[family])))


# ---------------------------------------------------------------- per-document work

class _Resources:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.hierarchy = build_hierarchy(load_edges(cfg.edges or BUNDLED_EDGES))
        self.pool = load_pool(cfg.pool or BUNDLED_POOL)
        self.registry_text = Path(cfg.registry or BUNDLED_REGISTRY).read_text(encoding="utf-8")
        self.templates = load_registry(self.registry_text)
        self.images = load_image_pool(cfg.images or BUNDLED_IMAGES)
        self.colors = load_colors(cfg.colors) if cfg.colors else load_colors()
        self.epoch = datetime.fromisoformat(cfg.epoch)


_RES: _Resources | None = None


def _init_worker(cfg_dict: dict) -> None:
    global _RES
    _RES = _Resources(GenConfig.from_dict(cfg_dict))


@dataclass
class DocResult:
    index: int
    doc_id: str
    split: str
    info: ChartInfo
    table: Any
    chart_svg: str
    page_svg: str
    record: Any
    questions: list[QuestionInfo]


def build_document(index: int, res: _Resources | None = None) -> DocResult:
    res = res or _RES
    cfg = res.cfg
    rng = child_rng(cfg.master_seed, "doc", index)
    try:
        subtype = doc_subtype(cfg, index, rng)
        table = pick_table(res.pool, res.hierarchy, rng, cfg.shapes, shape_need(subtype.name))
        chart_id = make_chart_id(res.epoch + timedelta(seconds=index), rng, subtype, cfg.machine)
        spec, info = build_chart(table, subtype, rng, chart_id, res.colors)
        svg = render(spec)
        split = assign_split(index, cfg.split_ratios, cfg.master_seed)
        questions = draw_questions(res.templates, info, rng, cfg.questions_per_chart, split)
        doc_id = f"doc_{index:06d}"
        record, page = compose_page(svg, info, res.images, FillerText(table.entity_names), rng,
                                    doc_id, chart_href=f"../charts/{chart_id}.svg")
    except ForgeError as exc:
        raise DocumentError(index, exc) from exc
    return DocResult(index, doc_id, split, info, table, svg.to_string(), page, record, questions)


# ---------------------------------------------------------------- output

def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.write_bytes(data)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _listing(out: Path) -> dict[str, str]:
    return {p.relative_to(out).as_posix(): _sha256(p)
            for p in sorted(out.rglob("*")) if p.is_file() and p.name != MANIFEST}


def write_manifest(out: Path, config: dict) -> dict:
    files = _listing(out)
    counts = Counter(name.split("/", 1)[0] for name in files)
    questions = 0
    for split in SPLITS:
        p = out / "qa" / f"{split}.jsonl"
        if p.exists():
            questions += sum(1 for line in p.read_text(encoding="utf-8").splitlines() if line)
    manifest = {
        "config": config,
        "counts": {
            "charts": sum(1 for f in files if f.startswith("charts/") and f.endswith(".svg")),
            "docs": counts.get("docs", 0),
            "annotations": counts.get("annotations", 0),
            "tables": counts.get("tables", 0),
            "questions": questions,
        },
        "files": files,
    }
    _write(out / MANIFEST, _dump_json(manifest))
    return manifest


def verify_manifest(dataset: str | Path) -> dict:
    out = Path(dataset)
    path = out / MANIFEST
    if not path.is_file():
        raise ManifestMismatch(f"{out} has no {MANIFEST}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestMismatch(f"unreadable manifest: {exc}") from None
    on_disk = _listing(out)
    listed = manifest.get("files", {})
    if set(on_disk) != set(listed):
        extra = sorted(set(on_disk) ^ set(listed))[:5]
        raise ManifestMismatch(f"file listing differs from manifest: {extra}")
    for name, digest in listed.items():
        if on_disk[name] != digest:
            raise ManifestMismatch(f"digest mismatch for {name}")
    return manifest


def read_questions(out: Path) -> list[QuestionInfo]:
    qs = []
    for split in SPLITS:
        p = out / "qa" / f"{split}.jsonl"
        if p.exists():
            for line in p.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    qs.append(QuestionInfo.from_dict(json.loads(line)))
    return qs


def write_questions(out: Path, questions: Sequence[QuestionInfo]) -> None:
    by_split: dict[str, list[str]] = {s: [] for s in SPLITS}
    for q in questions:
        by_split[q.split].append(json.dumps(q.to_dict(), sort_keys=True, ensure_ascii=False))
    for split, lines in by_split.items():
        _write(out / "qa" / f"{split}.jsonl", "".join(l + "\n" for l in lines))


def read_charts(out: Path) -> dict[str, ChartInfo]:
    return {p.stem: ChartInfo.from_dict(json.loads(p.read_text(encoding="utf-8")))
            for p in sorted((out / "charts").glob("*.json"))}


def compute_stats(out: Path) -> dict:
    """Statistics recomputed from the corpus files themselves."""
    charts = read_charts(out)
    families: dict[str, Counter] = {s: Counter() for s in SPLITS}
    for p in sorted((out / "annotations").glob("*.xml")):
        rec = parse_annotation(p.read_bytes())
        info = charts.get(rec.chart_id)
        if info is None:
            raise ManifestMismatch(f"{p.name} references missing chart {rec.chart_id}")
        families[rec.split][subtype_by_name(info.chart_type).family] += 1
    questions = read_questions(out)
    qtype: dict[str, Counter] = {s: Counter() for s in SPLITS}
    atype: dict[str, Counter] = {s: Counter() for s in SPLITS}
    level: dict[str, Counter] = {s: Counter() for s in SPLITS}
    for q in questions:
        qtype[q.split][q.question_type] += 1
        atype[q.split][q.answer_type] += 1
        level[q.split][q.difficulty] += 1

    def table(per_split, keys):
        rows = {s: {k: per_split[s].get(k, 0) for k in keys} for s in SPLITS}
        rows["total"] = {k: sum(rows[s][k] for s in SPLITS) for k in keys}
        return rows

    fam = table(families, list(SUBTYPE_CODES))
    n_docs = sum(fam["total"].values())
    yes, no = (sum(c[i] for c in tally(questions).values()) for i in (0, 1))
    return {
        "documents": n_docs,
        "questions": len(questions),
        "split_counts": {s: sum(fam[s].values()) for s in SPLITS},
        "split_fractions": {s: (sum(fam[s].values()) / n_docs if n_docs else 0.0) for s in SPLITS},
        "chart_families": fam,
        "family_proportions": {k: (v / n_docs if n_docs else 0.0)
                               for k, v in fam["total"].items()},
        "question_types": table(qtype, ["reasoning", "common_sense"]),
        "answer_types": table(atype, ["yes_no", "elements", "open_vocab"]),
        "difficulty_levels": table(level, ["beginner", "elementary", "intermediate",
                                           "advanced", "expert"]),
        "yes_share": yes / (yes + no) if yes + no else 0.0,
    }


def stats(dataset: str | Path) -> dict:
    out = Path(dataset)
    verify_manifest(out)
    return compute_stats(out)


# ---------------------------------------------------------------- generate

def _results(cfg: GenConfig, jobs: int):
    if jobs <= 1:
        res = _Resources(cfg)
        for i in range(cfg.doc_count):
            yield build_document(i, res)
        return
    ctx = multiprocessing.get_context("spawn")
    with ctx.Pool(jobs, initializer=_init_worker, initargs=(cfg.to_dict(),)) as pool:
        yield from pool.imap(build_document, range(cfg.doc_count), chunksize=8)


def generate(cfg: GenConfig, out: str | Path, jobs: int = 1) -> dict:
    """Generate a complete dataset directory and return its manifest."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    res = _Resources(cfg)
    charts: dict[str, ChartInfo] = {}
    records, tables, doc_tables = [], {}, {}
    questions: list[QuestionInfo] = []
    for r in _results(cfg, jobs):
        charts[r.info.chart_id] = r.info
        records.append(r.record)
        tables.setdefault(r.table.table_id, r.table)
        doc_tables[r.doc_id] = r.table
        questions.extend(r.questions)
        _write(out / "charts" / f"{r.info.chart_id}.svg", r.chart_svg)
        _write(out / "charts" / f"{r.info.chart_id}.json", _dump_json(r.info.to_dict()))
        _write(out / "docs" / f"{r.doc_id}.svg", r.page_svg)
        if (r.index + 1) % 500 == 0:
            log.info("generated %d/%d documents", r.index + 1, cfg.doc_count)
    for tid, table in sorted(tables.items()):
        _write(out / "tables" / f"{tid}.csv", to_csv(table))

    by_id = {t.template_id: t for t in res.templates}
    questions, report = debias(questions, charts, child_rng(cfg.master_seed, "debias"), by_id,
                               cfg.max_attempts)
    _write(out / "bias_report.json", _dump_json(report.to_dict()))
    write_questions(out, questions)
    by_chart: dict[str, list[QuestionInfo]] = {}
    for q in questions:
        by_chart.setdefault(q.chart_id, []).append(q)
    for rec in records:
        split = assign_split(int(rec.doc_id.split("_")[1]), cfg.split_ratios, cfg.master_seed)
        full = rec.with_corpus(doc_tables[rec.doc_id], by_chart.get(rec.chart_id, []), split)
        _write(out / "annotations" / f"{rec.doc_id}.xml", write_annotation(full))
    _write(out / "registry.ini", res.registry_text)
    shutil.copytree(cfg.images or BUNDLED_IMAGES, out / "images", dirs_exist_ok=True)
    _write(out / "stats.json", _dump_json(compute_stats(out)))
    return write_manifest(out, cfg.to_dict())


def debias_dataset(dataset: str | Path) -> dict:
    """Re-run debiasing over an existing dataset in place; returns the bias report."""
    out = Path(dataset)
    manifest = verify_manifest(out)
    cfg = GenConfig.from_dict(manifest["config"])
    templates = {t.template_id: t
                 for t in load_registry((out / "registry.ini").read_text(encoding="utf-8"))}
    charts = read_charts(out)
    questions = read_questions(out)
    questions, report = debias(questions, charts, child_rng(cfg.master_seed, "debias-again"),
                               templates, cfg.max_attempts)
    write_questions(out, questions)
    by_chart: dict[str, list[QuestionInfo]] = {}
    for q in questions:
        by_chart.setdefault(q.chart_id, []).append(q)
    for p in sorted((out / "annotations").glob("*.xml")):
        rec = parse_annotation(p.read_bytes())
        qa = tuple((q.question_id, q.question, answer_text(q.answer))
                   for q in by_chart.get(rec.chart_id, []))
        _write(p, write_annotation(replace(rec, qa=qa, question_ids=tuple(x[0] for x in qa))))
    _write(out / "bias_report.json", _dump_json(report.to_dict()))
    _write(out / "stats.json", _dump_json(compute_stats(out)))
    write_manifest(out, manifest["config"])
    return report.to_dict()
