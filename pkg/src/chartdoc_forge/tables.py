"""Data tables behind charts: random taxonomy-labelled tables and ingested CSVs."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import DuplicateLabel, InsufficientEntities, InvalidShape, ParseError
from .hierarchy import EntityHierarchy, EntitySample, sample_entities

BUNDLED_POOL = Path(__file__).parent / "data" / "real_world"

RANDOM_LOW = 1.0
RANDOM_HIGH = 200.0
CENT = Decimal("0.01")


def round_half_up(x, places: int = 2) -> Decimal:
    """Round half away from zero; floats go through repr so 85.605 stays 85.605."""
    if isinstance(x, Fraction):
        q = math.floor(abs(x) * 10 ** places + Fraction(1, 2))
        return Decimal(q if x >= 0 else -q).scaleb(-places)
    if not isinstance(x, Decimal):
        x = Decimal(repr(x)) if isinstance(x, float) else Decimal(x)
    return x.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class DataTable:
    table_id: str
    entity_names: tuple[str, ...]
    legend_labels: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]   # legend x entity
    source_kind: str                       # "random" | "real_world"
    sample: EntitySample | None = None
    title: str = ""

    def __post_init__(self):
        if len(self.values) != len(self.legend_labels) or any(
                len(row) != len(self.entity_names) for row in self.values):
            raise InvalidShape("values do not match label dimensions")
        for labels, what in ((self.entity_names, "entity"), (self.legend_labels, "legend")):
            if len(set(labels)) != len(labels):
                raise DuplicateLabel(f"duplicate {what} label")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.legend_labels), len(self.entity_names)

    def column(self, j: int) -> list[float]:
        return [row[j] for row in self.values]

    def to_dict(self):
        return {
            "table_id": self.table_id,
            "title": self.title,
            "entity_names": list(self.entity_names),
            "legend_labels": list(self.legend_labels),
            "values": [list(r) for r in self.values],
            "source_kind": self.source_kind,
            "sample": self.sample.to_dict() if self.sample else None,
        }

    @classmethod
    def from_dict(cls, d):
        sample = EntitySample.from_dict(d["sample"]) if d.get("sample") else None
        return cls(d["table_id"], tuple(d["entity_names"]), tuple(d["legend_labels"]),
                   tuple(tuple(float(v) for v in r) for r in d["values"]),
                   d["source_kind"], sample, d.get("title", ""))


def _fmt(v: float) -> str:
    return repr(float(v))


def to_csv(table: DataTable) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([table.title, *table.entity_names])
    for label, row in zip(table.legend_labels, table.values):
        w.writerow([label, *map(_fmt, row)])
    return buf.getvalue().encode("utf-8")


def table_digest(title, entities, legends, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([title, *entities])
    for label, row in zip(legends, values):
        w.writerow([label, *map(_fmt, row)])
    return "T_" + hashlib.sha256(buf.getvalue().encode()).hexdigest()[:8]


def make_table(entities, legends, values, source_kind, sample=None, title="") -> DataTable:
    entities = tuple(entities)
    legends = tuple(legends)
    values = tuple(tuple(float(v) for v in row) for row in values)
    tid = table_digest(title, entities, legends, values)
    return DataTable(tid, entities, legends, values, source_kind, sample, title)


def random_table(rows: int, cols: int, sample: EntitySample, rng,
                 legend_labels: Sequence[str] | None = None) -> DataTable:
    """Uniform [1, 200] values at two decimals labelled from a taxonomy sample.

    Entity names are the first ``cols`` sampled entities after a shuffle and
    legend labels the next ``rows`` (a single series is labelled by the
    grandparent).  ``legend_labels`` overrides the legend source, which box
    plots use for their observation rows.
    """
    if rows < 1 or cols < 1:
        raise InvalidShape(f"table shape must be positive, got {rows}x{cols}")
    names = sample.names()
    need = cols + (rows if rows > 1 and legend_labels is None else 0)
    if len(names) < need:
        raise InsufficientEntities(f"sample has {len(names)} entities, need {need}")
    rng.shuffle(names)
    entities = names[:cols]
    if legend_labels is not None:
        if len(legend_labels) != rows:
            raise InvalidShape("legend_labels length must equal rows")
        legends = list(legend_labels)
    elif rows == 1:
        legends = [sample.grandparent]
    else:
        legends = names[cols:cols + rows]
    values = [[float(round_half_up(rng.uniform(RANDOM_LOW, RANDOM_HIGH))) for _ in range(cols)]
              for _ in range(rows)]
    title = f"{sample.grandparent.replace('_', ' ').capitalize()} statistics"
    return make_table(entities, legends, values, "random", sample, title)


def ingest_csv(stream) -> DataTable:
    """Parse a header-row CSV (corner cell, entity names) into a real-world table."""
    data = stream.read() if hasattr(stream, "read") else stream
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    rows = [r for r in csv.reader(io.StringIO(data)) if any(c.strip() for c in r)]
    if len(rows) < 2 or len(rows[0]) < 2:
        raise InvalidShape("CSV needs a header row and at least one data row")
    header = [c.strip() for c in rows[0]]
    title, entities = header[0], header[1:]
    if len(set(entities)) != len(entities):
        raise DuplicateLabel("duplicate entity header")
    legends, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(i, len(row) + 1, "ragged row")
        legends.append(row[0].strip())
        parsed = []
        for j, cell in enumerate(row[1:], start=2):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(i, j) from None
            if v != v or v in (float("inf"), float("-inf")):
                raise ParseError(i, j, "non-finite cell")
            parsed.append(v)
        values.append(parsed)
    if len(set(legends)) != len(legends):
        raise DuplicateLabel("duplicate legend label")
    return make_table(entities, legends, values, "real_world", None, title)


def load_pool(directory: str | Path | None = BUNDLED_POOL) -> list[DataTable]:
    if directory is None:
        return []
    return [ingest_csv(p.read_bytes()) for p in sorted(Path(directory).glob("*.csv"))]


@dataclass(frozen=True)
class ShapeConfig:
    entities: tuple[int, int] = (3, 10)
    legends: tuple[int, int] = (1, 4)
    parents: tuple[int, int] = (2, 4)
    children: tuple[int, int] = (2, 5)
    box_points: int = 20
    random_prob: float = 0.2


@dataclass(frozen=True)
class ShapeNeed:
    """Legend-row constraints a chart subtype places on its table."""
    min_rows: int = 1
    max_rows: int | None = None
    observations: bool = False        # rows are raw points (box plots)
    positive: bool = False

    def row_range(self, shapes: ShapeConfig) -> tuple[int, int]:
        if self.observations:
            return self.min_rows, max(self.min_rows, shapes.box_points)
        lo = max(self.min_rows, shapes.legends[0])
        hi = shapes.legends[1] if self.max_rows is None else min(self.max_rows, shapes.legends[1])
        return lo, max(lo, hi)


def _pick_counts(rng, shapes: ShapeConfig, need: int) -> tuple[int, int]:
    lo_p, hi_p = shapes.parents
    lo_c, hi_c = shapes.children
    for _ in range(64):
        kp, kc = rng.randint(lo_p, hi_p), rng.randint(lo_c, hi_c)
        if kp * kc >= need:
            return kp, kc
    return hi_p, hi_c


def _random_branch(hierarchy, rng, shapes, need_spec) -> DataTable:
    cols = rng.randint(*shapes.entities)
    if need_spec.observations:
        rows = shapes.box_points
        kp, kc = _pick_counts(rng, shapes, cols)
        sample = sample_entities(hierarchy, rng, kp, kc)
        legends = [f"obs {i + 1}" for i in range(rows)]
        return random_table(rows, cols, sample, rng, legend_labels=legends)
    rows = rng.randint(*need_spec.row_range(shapes))
    kp, kc = _pick_counts(rng, shapes, cols + (rows if rows > 1 else 0))
    sample = sample_entities(hierarchy, rng, kp, kc)
    return random_table(rows, cols, sample, rng)


def _fits(table: DataTable, need_spec: ShapeNeed, shapes: ShapeConfig) -> bool:
    rows, cols = table.shape
    lo, hi = need_spec.row_range(shapes)
    if rows < lo or cols < shapes.entities[0]:
        return False
    if need_spec.positive and any(v <= 0 for r in table.values for v in r):
        return False
    return True


def trim_table(table: DataTable, rng, need_spec: ShapeNeed, shapes: ShapeConfig) -> DataTable:
    """Contiguous random sub-block whose shape lies inside the config ranges."""
    rows, cols = table.shape
    lo, hi = need_spec.row_range(shapes)
    n_rows = rng.randint(lo, min(hi, rows))
    n_cols = rng.randint(shapes.entities[0], min(shapes.entities[1], cols))
    r0 = rng.randint(0, rows - n_rows)
    c0 = rng.randint(0, cols - n_cols)
    values = [row[c0:c0 + n_cols] for row in table.values[r0:r0 + n_rows]]
    return make_table(table.entity_names[c0:c0 + n_cols], table.legend_labels[r0:r0 + n_rows],
                      values, "real_world", None, table.title)


def pick_table(real_pool: Sequence[DataTable], hierarchy: EntityHierarchy, rng,
               shapes: ShapeConfig = ShapeConfig(), need: ShapeNeed = ShapeNeed()) -> DataTable:
    """Random table with probability ``shapes.random_prob``, else a real-world one.

    Pool tables that cannot satisfy ``need`` are skipped; an empty or fully
    incompatible pool forces the random branch.
    """
    use_random = rng.random() < shapes.random_prob
    usable = [t for t in real_pool if _fits(t, need, shapes)]
    if use_random or not usable:
        return _random_branch(hierarchy, rng, shapes, need)
    return trim_table(rng.choice(usable), rng, need, shapes)
