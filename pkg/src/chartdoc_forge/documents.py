"""Page composition with element-level bounding boxes and annotation XML."""

from __future__ import annotations

import struct
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from html import escape
from pathlib import Path
from typing import Protocol, Sequence

from .errors import DoesNotFit, ValidationError
from .render import SvgDoc

PAGE_W, PAGE_H = 794, 1123
SIDE_MARGIN = 50
TOP, BOTTOM = 80, PAGE_H - 80
COLUMN_GAP = 20
MIN_H = 40
CAPTION_GAP = 6
PADDING = 10
FONT = 11
LINE_H = 14
CHAR_W = 0.6 * FONT
MAX_LAYOUT_RETRIES = 50

KIND_WEIGHTS = {"text": 0.45, "picture": 0.15, "list": 0.15, "chart": 0.25}
MAX_HEIGHT = {"text": 260, "picture": 220, "list": 180}
ELEMENT_KINDS = ("chart_image", "picture", "text", "list", "caption", "page_header",
                 "page_footer", "page_number")

BUNDLED_IMAGES = Path(__file__).parent / "data" / "images"
SCHEMA = Path(__file__).parent / "data" / "annotation.xsd"


@dataclass(frozen=True)
class DocElement:
    kind: str
    bbox: tuple[int, int, int, int]
    content: str = ""
    payload: str = ""
    column: int = 0          # 1-based column, 0 for margin elements

    def __post_init__(self):
        x1, y1, x2, y2 = self.bbox
        if not (x1 < x2 and y1 < y2):
            raise ValidationError(f"degenerate bbox {self.bbox} for {self.kind}")
        if self.kind not in ELEMENT_KINDS:
            raise ValidationError(f"unknown element kind {self.kind!r}")


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    page_size: tuple[int, int]
    column_count: int
    elements: tuple[DocElement, ...]
    chart_id: str
    table_id: str
    page_number: int
    question_ids: tuple[str, ...] = ()
    split: str = ""
    table_title: str = ""
    entity_names: tuple[str, ...] = ()
    legend_labels: tuple[str, ...] = ()
    values: tuple[tuple[float, ...], ...] = ()
    qa: tuple[tuple[str, str, str], ...] = ()    # (question_id, question, answer)

    def with_corpus(self, table, questions, split: str) -> "DocumentRecord":
        qa = tuple((q.question_id, q.question, answer_text(q.answer)) for q in questions)
        return replace(self, question_ids=tuple(q[0] for q in qa), split=split,
                       table_title=table.title, entity_names=tuple(table.entity_names),
                       legend_labels=tuple(table.legend_labels),
                       values=tuple(tuple(r) for r in table.values), qa=qa)


def answer_text(answer) -> str:
    return repr(answer) if isinstance(answer, float) else str(answer)


# ---------------------------------------------------------------- content sources

class TextProvider(Protocol):
    def paragraph(self, rng, n_chars: int) -> str: ...
    def list_items(self, rng, k: int) -> list[str]: ...
    def header(self, rng) -> str: ...
    def footer(self, rng) -> str: ...


_OPENERS = ("This section reviews", "The report compares", "Recent figures describe",
            "Analysts examined", "The survey summarises", "Our notes discuss",
            "The summary lists", "Observers tracked")
_MIDDLES = ("the recorded levels of", "seasonal changes in", "the relative standing of",
            "long-run movements for", "regional differences between", "the spread of")
_CLOSERS = ("across the reported period.", "under comparable conditions.",
            "with notable variation.", "relative to earlier estimates.",
            "as shown in the accompanying material.", "in the collected data.")
_FOOTERS = ("Confidential draft", "For internal circulation", "Prepared for review",
            "Working draft", "Summary report")
_HEADERS = ("Quarterly review", "Statistical bulletin", "Field notes", "Annual digest",
            "Research brief", "Data overview")


class FillerText:
    """Seeded filler sentences that mention the chart's labels."""

    def __init__(self, labels: Sequence[str] = ()):
        self.labels = [l.replace("_", " ") for l in labels] or ["the indicators"]

    def sentence(self, rng) -> str:
        a = rng.choice(self.labels)
        b = rng.choice(self.labels)
        subject = a if a == b else f"{a} and {b}"
        return f"{rng.choice(_OPENERS)} {rng.choice(_MIDDLES)} {subject} {rng.choice(_CLOSERS)}"

    def paragraph(self, rng, n_chars: int) -> str:
        out = []
        while sum(len(s) + 1 for s in out) < n_chars:
            out.append(self.sentence(rng))
        return " ".join(out)

    def list_items(self, rng, k: int) -> list[str]:
        return [f"{rng.choice(_MIDDLES).capitalize()} {rng.choice(self.labels)}" for _ in range(k)]

    def header(self, rng) -> str:
        return rng.choice(_HEADERS)

    def footer(self, rng) -> str:
        return rng.choice(_FOOTERS)


@dataclass(frozen=True)
class ImageAsset:
    name: str
    width: int
    height: int


def _image_size(path: Path) -> tuple[int, int]:
    data = path.read_bytes()
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return struct.unpack(">II", data[16:24])
    root = ET.fromstring(data)
    w, h = root.get("width"), root.get("height")
    if w is None or h is None:
        _, _, w, h = root.get("viewBox", "0 0 0 0").split()
    return int(float(w)), int(float(h))


def load_image_pool(directory: str | Path = BUNDLED_IMAGES) -> list[ImageAsset]:
    pool = []
    for p in sorted(Path(directory).iterdir()):
        if p.suffix.lower() in (".svg", ".png"):
            w, h = _image_size(p)
            if w > 0 and h > 0:
                pool.append(ImageAsset(p.name, w, h))
    if not pool:
        raise ValidationError(f"image pool {directory} has no .svg or .png files")
    return pool


# ---------------------------------------------------------------- layout

def wrap(text: str, width_px: float) -> list[str]:
    per_line = max(1, int(width_px // CHAR_W))
    lines, cur = [], ""
    for word in text.split():
        cand = f"{cur} {word}" if cur else word
        if len(cand) <= per_line:
            cur = cand
        else:
            if cur:
                lines.append(cur)
            cur = word[:per_line]
    if cur:
        lines.append(cur)
    return lines


@dataclass
class ColumnPools:
    text: TextProvider
    images: Sequence[ImageAsset]
    chart: SvgDoc | None = None
    chart_title: str = ""


@dataclass
class Placement:
    kind: str
    bbox: tuple[int, int, int, int]
    content: str = ""
    payload: str = ""
    lines: list[str] = field(default_factory=list)


def _chart_min_h(col_w: int, pools: ColumnPools) -> int:
    aspect = pools.chart.height / pools.chart.width
    cap_h = len(wrap(pools.chart_title, col_w)) * LINE_H
    return int(col_w * 0.5 * aspect) + CAPTION_GAP + cap_h


def _place_chart(a, b, x0, col_w, pools, rng) -> list[Placement]:
    aspect = pools.chart.height / pools.chart.width
    avail = b - a
    cap_lines = wrap(pools.chart_title, col_w)
    cap_h = len(cap_lines) * LINE_H
    max_w = min(col_w, int((avail - CAPTION_GAP - cap_h) / aspect))
    w = rng.randint(max(1, int(max_w * 0.7)), max_w)
    h = int(w * aspect)
    total = h + CAPTION_GAP + cap_h
    y = rng.randint(a, b - total)
    x = x0 + (col_w - w) // 2
    caption_w = min(col_w, max(int(len(l) * CHAR_W) + 1 for l in cap_lines))
    cx = x0 + (col_w - caption_w) // 2
    return [
        Placement("chart_image", (x, y, x + w, y + h)),
        Placement("caption", (cx, y + h + CAPTION_GAP, cx + caption_w, y + h + CAPTION_GAP + cap_h),
                  pools.chart_title, lines=cap_lines),
    ]


def _place_block(kind, a, b, x0, col_w, pools, rng) -> Placement:
    h = rng.randint(MIN_H, min(b - a, MAX_HEIGHT[kind]))
    y = rng.randint(a, b - h)
    if kind == "picture":
        img = rng.choice(list(pools.images))
        w = min(col_w, max(1, int(h * img.width / img.height)))
        h = max(1, int(w * img.height / img.width))
        x = x0 + (col_w - w) // 2
        return Placement("picture", (x, y, x + w, y + h), "", img.name)
    n_lines = h // LINE_H
    if kind == "text":
        lines = wrap(pools.text.paragraph(rng, int(n_lines * col_w / CHAR_W)), col_w)[:n_lines]
        content = " ".join(lines)
    else:
        items = pools.text.list_items(rng, n_lines)
        lines = [l for item in items for l in wrap(f"- {item}", col_w)][:n_lines]
        content = "\n".join(lines)
    w = max(int(len(l) * CHAR_W) + 1 for l in lines)
    return Placement(kind, (x0, y, x0 + min(w, col_w), y + len(lines) * LINE_H), content,
                     lines=lines)


def fill_column(y_range: tuple[int, int], pools: ColumnPools, rng,
                x_range: tuple[int, int] = (SIDE_MARGIN, PAGE_W - SIDE_MARGIN),
                chart_available: bool = True) -> list[Placement]:
    """Fill a column top to bottom with randomly sized blocks.

    Repeatedly picks a free vertical interval and an element kind, places the
    element at a random offset inside it and splits the interval around it.
    Leftover gaps shorter than ``MIN_H`` stay blank.
    """
    x0, x1 = x_range
    col_w = x1 - x0
    free = [tuple(y_range)] if y_range[1] - y_range[0] >= MIN_H else []
    placed: list[Placement] = []
    chart_left = chart_available and pools.chart is not None
    while True:
        eligible = [iv for iv in free if iv[1] - iv[0] >= MIN_H]
        if not eligible:
            break
        a, b = rng.choice(eligible)
        kinds = ["text", "picture", "list"]
        if chart_left and b - a >= _chart_min_h(col_w, pools):
            kinds.append("chart")
        kind = rng.choices(kinds, weights=[KIND_WEIGHTS[k] for k in kinds])[0]
        if kind == "chart":
            new = _place_chart(a, b, x0, col_w, pools, rng)
            chart_left = False
        else:
            new = [_place_block(kind, a, b, x0, col_w, pools, rng)]
        placed.extend(new)
        top, bottom = new[0].bbox[1], new[-1].bbox[3]
        free.remove((a, b))
        free.extend(iv for iv in ((a, top - PADDING), (bottom + PADDING, b)) if iv[1] > iv[0])
        free.sort()
    return sorted(placed, key=lambda p: p.bbox[1])


def column_bounds(k: int) -> list[tuple[int, int]]:
    usable = PAGE_W - 2 * SIDE_MARGIN - COLUMN_GAP * (k - 1)
    w = usable // k
    return [(SIDE_MARGIN + i * (w + COLUMN_GAP), SIDE_MARGIN + i * (w + COLUMN_GAP) + w)
            for i in range(k)]


def _layout(pools: ColumnPools, rng, columns: int) -> list[DocElement]:
    chart_col = rng.randrange(columns)
    elements = []
    chart_done = False
    # the chart's column is filled first so its placement does not depend on the others
    order = [chart_col] + [c for c in range(columns) if c != chart_col]
    bounds = column_bounds(columns)
    for c in order:
        placed = fill_column((TOP, BOTTOM), pools, rng, bounds[c], chart_available=not chart_done)
        chart_done = chart_done or any(p.kind == "chart_image" for p in placed)
        elements.extend(DocElement(p.kind, p.bbox, p.content, p.payload, c + 1) for p in placed)
        if c == chart_col and not chart_done:
            raise DoesNotFit("chart did not fit its column")
    return sorted(elements, key=lambda e: (e.column, e.bbox[1]))


def compose_page(chart: SvgDoc, info, image_pool: Sequence[ImageAsset], text_provider: TextProvider,
                 rng, doc_id: str, page_number: int | None = None,
                 chart_href: str = "") -> tuple[DocumentRecord, str]:
    if not image_pool:
        raise ValidationError("image pool is empty")
    columns = rng.randint(1, 3)
    figure_no = rng.randint(1, 9)
    pools = ColumnPools(text_provider, image_pool, chart, f"Figure {figure_no}: {info.title}")
    for _ in range(MAX_LAYOUT_RETRIES):
        layout_rng = type(rng)(rng.getrandbits(64))
        try:
            body = _layout(pools, layout_rng, columns)
            break
        except DoesNotFit:
            continue
    else:
        raise DoesNotFit(f"{doc_id}: chart could not be placed in {MAX_LAYOUT_RETRIES} layouts")
    page_no = page_number if page_number is not None else rng.randint(1, 300)
    header = text_provider.header(rng)
    footer = text_provider.footer(rng)
    num = str(page_no)
    margins = [
        DocElement("page_header", _text_box(SIDE_MARGIN, 30, header), header),
        DocElement("page_footer", _text_box(SIDE_MARGIN, PAGE_H - 50, footer), footer),
        DocElement("page_number", _text_box(PAGE_W - SIDE_MARGIN - _w(num), PAGE_H - 50, num), num),
    ]
    elements = tuple(margins[:1] + body + margins[1:])
    record = DocumentRecord(doc_id, (PAGE_W, PAGE_H), columns, elements, info.chart_id,
                            info.table_id, page_no)
    return record, page_svg(record, chart, chart_href)


def _w(s: str) -> int:
    return int(len(s) * CHAR_W) + 1


def _text_box(x: int, y: int, s: str) -> tuple[int, int, int, int]:
    return (x, y, x + _w(s), y + LINE_H)


def check_record(doc: DocumentRecord) -> None:
    """Raise ValidationError unless every layout invariant holds."""
    W, H = doc.page_size
    kinds = [e.kind for e in doc.elements]
    if kinds.count("chart_image") != 1 or kinds.count("caption") != 1:
        raise ValidationError("need exactly one chart_image and one caption")
    for k in ("page_header", "page_footer", "page_number"):
        if kinds.count(k) > 1:
            raise ValidationError(f"more than one {k}")
    for e in doc.elements:
        x1, y1, x2, y2 = e.bbox
        if x1 < 0 or y1 < 0 or x2 > W or y2 > H:
            raise ValidationError(f"{e.kind} bbox {e.bbox} leaves the page")
    by_col: dict[int, list[DocElement]] = {}
    for e in doc.elements:
        by_col.setdefault(e.column, []).append(e)
    for col, els in by_col.items():
        for i, a in enumerate(els):
            for b in els[i + 1:]:
                if a.bbox[0] < b.bbox[2] and b.bbox[0] < a.bbox[2] and \
                        a.bbox[1] < b.bbox[3] and b.bbox[1] < a.bbox[3]:
                    raise ValidationError(f"{a.kind} and {b.kind} overlap in column {col}")
    chart = next(e for e in doc.elements if e.kind == "chart_image")
    cap = next(e for e in doc.elements if e.kind == "caption")
    if cap.column != chart.column or not 0 <= cap.bbox[1] - chart.bbox[3] <= PADDING:
        raise ValidationError("caption is not directly below the chart")


# ---------------------------------------------------------------- page SVG

def page_svg(doc: DocumentRecord, chart: SvgDoc, chart_href: str = "") -> str:
    n = lambda v: str(int(v))  # noqa: E731
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{doc.page_size[0]}" '
           f'height="{doc.page_size[1]}" viewBox="0 0 {doc.page_size[0]} {doc.page_size[1]}" '
           f'font-family="serif">',
           f' <rect x="0" y="0" width="{doc.page_size[0]}" height="{doc.page_size[1]}" fill="#ffffff"/>']
    wrap_w = {}
    for e in doc.elements:
        if e.kind in ("text", "caption", "list"):
            wrap_w[e] = e.bbox[2] - e.bbox[0]
    for e in doc.elements:
        x1, y1, x2, y2 = e.bbox
        kind = escape(e.kind)
        if e.kind == "chart_image":
            out.append(f' <svg class="{kind}" x="{n(x1)}" y="{n(y1)}" width="{n(x2 - x1)}" '
                       f'height="{n(y2 - y1)}" viewBox="0 0 {chart.width:.3f} {chart.height:.3f}" '
                       f'preserveAspectRatio="none" data-source="{escape(chart_href)}">')
            out.extend(chart.body_lines(indent=2))
            out.append(" </svg>")
        elif e.kind == "picture":
            out.append(f' <image class="picture" x="{x1}" y="{y1}" width="{x2 - x1}" '
                       f'height="{y2 - y1}" href="../images/{escape(e.payload)}" '
                       f'preserveAspectRatio="none"/>')
        else:
            lines = e.content.split("\n") if e.kind == "list" else (
                wrap(e.content, wrap_w[e]) if e in wrap_w else [e.content])
            anchor = ' text-anchor="middle"' if e.kind == "caption" else ""
            x = (x1 + x2) // 2 if e.kind == "caption" else x1
            style = ' font-style="italic"' if e.kind == "caption" else ""
            out.append(f' <g class="{kind}" font-size="{FONT}" fill="#222222"{style}>')
            for i, line in enumerate(lines):
                out.append(f'  <text x="{x}" y="{y1 + (i + 1) * LINE_H - 3}"{anchor}>'
                           f'{escape(line, quote=False)}</text>')
            out.append(" </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- annotation XML

def _sub(parent, tag, text=None, **attrs):
    el = ET.SubElement(parent, tag, attrs)
    if text is not None:
        el.text = text
    return el


def write_annotation(doc: DocumentRecord) -> bytes:
    root = ET.Element("annotation")
    _sub(root, "doc_id", doc.doc_id)
    page = _sub(root, "page")
    _sub(page, "width", str(doc.page_size[0]))
    _sub(page, "height", str(doc.page_size[1]))
    _sub(page, "columns", str(doc.column_count))
    _sub(page, "number", str(doc.page_number))
    _sub(root, "chart_id", doc.chart_id)
    _sub(root, "table_id", doc.table_id)
    _sub(root, "split", doc.split)
    table = _sub(root, "table")
    _sub(table, "title", doc.table_title)
    header = _sub(table, "entities")
    for e in doc.entity_names:
        _sub(header, "entity", e)
    for label, row in zip(doc.legend_labels, doc.values):
        r = _sub(table, "row", label=label)
        for v in row:
            _sub(r, "cell", repr(float(v)))
    for e in doc.elements:
        obj = _sub(root, "object")
        _sub(obj, "name", e.kind)
        _sub(obj, "boundingbox", " ".join(str(int(v)) for v in e.bbox))
        _sub(obj, "content", e.content)
        _sub(obj, "column", str(e.column))
        _sub(obj, "source", e.payload)
    qa = _sub(root, "qa_pairs")
    for qid, question, answer in doc.qa:
        pair = _sub(qa, "qa", id=qid)
        _sub(pair, "question", question)
        _sub(pair, "answer", answer)
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def _text(el, tag) -> str:
    node = el.find(tag)
    if node is None:
        raise ValidationError(f"annotation lacks <{tag}>")
    return node.text or ""


def parse_annotation(data: bytes) -> DocumentRecord:
    root = ET.fromstring(data)
    page = root.find("page")
    if page is None:
        raise ValidationError("annotation lacks <page>")
    table = root.find("table")
    elements = []
    for obj in root.findall("object"):
        bbox = tuple(int(v) for v in _text(obj, "boundingbox").split())
        elements.append(DocElement(_text(obj, "name"), bbox, _text(obj, "content"),
                                   _text(obj, "source"), int(_text(obj, "column"))))
    rows = table.findall("row") if table is not None else []
    qa = tuple((p.get("id"), _text(p, "question"), _text(p, "answer"))
               for p in root.find("qa_pairs").findall("qa"))
    return DocumentRecord(
        doc_id=_text(root, "doc_id"),
        page_size=(int(_text(page, "width")), int(_text(page, "height"))),
        column_count=int(_text(page, "columns")),
        elements=tuple(elements),
        chart_id=_text(root, "chart_id"),
        table_id=_text(root, "table_id"),
        page_number=int(_text(page, "number")),
        question_ids=tuple(q[0] for q in qa),
        split=_text(root, "split"),
        table_title=_text(table, "title") if table is not None else "",
        entity_names=tuple(e.text or "" for e in table.find("entities")) if table is not None else (),
        legend_labels=tuple(r.get("label") for r in rows),
        values=tuple(tuple(float(c.text) for c in r.findall("cell")) for r in rows),
        qa=qa,
    )
