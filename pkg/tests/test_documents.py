import random
from collections import Counter
from dataclasses import replace

import pytest
import xmlschema

from chartdoc_forge.charts import all_subtypes
from chartdoc_forge.documents import (
    ELEMENT_KINDS,
    PADDING,
    SCHEMA,
    ColumnPools,
    DocElement,
    FillerText,
    check_record,
    column_bounds,
    compose_page,
    fill_column,
    load_image_pool,
    parse_annotation,
    write_annotation,
)
from chartdoc_forge.errors import ValidationError
from chartdoc_forge.questions import draw_questions
from chartdoc_forge.render import render
from svgtools import parse


@pytest.fixture(scope="module")
def images():
    return load_image_pool()


@pytest.fixture(scope="module")
def pages(chart_maker, registry, images):
    subs = all_subtypes()
    out = []
    for k in range(300):
        table, spec, info = chart_maker(subs[k % len(subs)].name, k)
        svg = render(spec)
        rng = random.Random(k)
        rec, page = compose_page(svg, info, images, FillerText(table.entity_names), rng,
                                 f"doc_{k:06d}", chart_href=f"../charts/{info.chart_id}.svg")
        qs = draw_questions(registry, info, random.Random(k))
        out.append((rec.with_corpus(table, qs, "train"), page, svg))
    return out


def _pools(chart_maker, images):
    table, spec, info = chart_maker("Vertical Bar", 1)
    return ColumnPools(FillerText(table.entity_names), images, render(spec), info.title)


def test_fill_column_empty_and_deterministic(chart_maker, images):
    pools = _pools(chart_maker, images)
    assert fill_column((100, 100), pools, random.Random(0)) == []
    assert fill_column((100, 130), pools, random.Random(0)) == []
    a = fill_column((60, 1060), pools, random.Random(5), column_bounds(2)[0])
    b = fill_column((60, 1060), pools, random.Random(5), column_bounds(2)[0])
    assert a == b and a
    assert sum(p.kind == "chart_image" for p in a) <= 1


def test_records_valid(pages):
    for rec, _, _ in pages:
        check_record(rec)
        assert rec.column_count in (1, 2, 3)
        assert rec.page_size == (794, 1123)
        assert sum(e.kind == "chart_image" for e in rec.elements) == 1


def test_all_kinds_and_column_counts(pages):
    kinds = Counter(e.kind for rec, _, _ in pages for e in rec.elements)
    assert set(kinds) == set(ELEMENT_KINDS)
    assert {rec.column_count for rec, _, _ in pages} == {1, 2, 3}


def test_chart_bbox_matches_page_svg(pages):
    for rec, page, _ in pages:
        root = parse(page)
        nested = [el for el in root if el.get("class") == "chart_image"]
        assert len(nested) == 1
        el = nested[0]
        x, y, w, h = (int(el.get(k)) for k in ("x", "y", "width", "height"))
        chart = next(e for e in rec.elements if e.kind == "chart_image")
        assert chart.bbox == (x, y, x + w, y + h)


def test_chart_keeps_aspect(pages):
    for rec, _, svg in pages:
        x1, y1, x2, y2 = next(e for e in rec.elements if e.kind == "chart_image").bbox
        assert abs((y2 - y1) - (x2 - x1) * svg.height / svg.width) <= 1


def test_caption_below_chart(pages):
    for rec, _, _ in pages:
        chart = next(e for e in rec.elements if e.kind == "chart_image")
        cap = next(e for e in rec.elements if e.kind == "caption")
        assert cap.column == chart.column
        assert 0 <= cap.bbox[1] - chart.bbox[3] <= PADDING
        assert cap.content.startswith("Figure ")


def test_check_record_rejects_overlap(pages):
    rec = pages[0][0]
    text = DocElement("text", (60, 60, 200, 200), "x", column=1)
    bad = replace(rec, elements=rec.elements + (text, text))
    with pytest.raises(ValidationError):
        check_record(bad)
    off = DocElement("text", (700, 60, 900, 100), "x", column=9)
    with pytest.raises(ValidationError):
        check_record(replace(rec, elements=rec.elements + (off,)))
    no_chart = tuple(e for e in rec.elements if e.kind != "chart_image")
    with pytest.raises(ValidationError):
        check_record(replace(rec, elements=no_chart))
    with pytest.raises(ValidationError):
        DocElement("text", (10, 10, 10, 20))


def test_annotation_round_trip_and_schema(pages):
    schema = xmlschema.XMLSchema(str(SCHEMA))
    for rec, _, _ in pages[:60]:
        xml = write_annotation(rec)
        schema.validate(xml.decode("utf-8"))
        assert parse_annotation(xml) == rec
        assert write_annotation(parse_annotation(xml)) == xml


def test_annotation_contents(pages):
    for rec, _, _ in pages:
        for e in rec.elements:
            if e.kind in ("picture", "chart_image"):
                assert e.content == ""
            if e.kind == "page_number":
                assert e.content == str(rec.page_number)
        assert len(rec.qa) == len(rec.question_ids) >= 10
    rec = next(r for r, _, _ in pages if any(e.kind == "picture" for e in r.elements))
    xml = write_annotation(rec).decode()
    block = xml.split("<name>picture</name>", 1)[1].split("</object>", 1)[0]
    assert "<content />" in block or "<content></content>" in block


def test_compose_deterministic(chart_maker, images):
    table, spec, info = chart_maker("Single Line", 4)
    svg = render(spec)
    runs = [compose_page(svg, info, images, FillerText(table.entity_names), random.Random(9), "d")
            for _ in range(2)]
    assert runs[0] == runs[1]
    with pytest.raises(ValidationError):
        compose_page(svg, info, [], FillerText(), random.Random(0), "d")
