import csv
import io
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import config
from helpers import make_dataset
from ingest import (
    DATETIME,
    GEO,
    MISSING,
    NUMBER,
    TEXT,
    IngestError,
    count_significant_digits,
    geo_kind,
    infer_column_type,
    load_dataset,
    load_datasets,
    normalize_variable_name,
    parse_cell,
    parse_datetime,
)


def test_normalize_variable_name():
    assert normalize_variable_name("  Air   Temperature ") == "air_temperature"
    assert normalize_variable_name("TEMP", {"temp": "temperature"}) == "temperature"
    assert normalize_variable_name("Temperature", {"temp": "temperature"}) == "temperature"


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("1200", (4, 0)),
        ("0.00120", (3, 5)),
        ("-12.30", (4, 2)),
        ("0", (1, 0)),
        ("0.000", (1, 3)),
        (".5", (1, 1)),
        ("1.5e-3", (2, 4)),
        ("2.50E2", (3, 0)),
        ("abc", None),
        ("1.2.3", None),
    ],
)
def test_count_significant_digits(raw, expected):
    assert count_significant_digits(raw) == expected


@pytest.mark.parametrize(
    "raw, kind",
    [
        ("2023-04-01 10:00:00", "datetime"),
        ("2023/04/01 10:00", "datetime"),
        ("42", "integer"),
        ("-4.2", "decimal"),
        ("1e3", "decimal"),
        ("Yes", "boolean"),
        ("NA", MISSING),
        ("", MISSING),
        ("09:00-17:00", "text"),
        ("075-123-4567", "text"),
        ("hello", "text"),
        ("inf", "text"),
    ],
)
def test_parse_cell(raw, kind, run_config):
    assert parse_cell(raw, run_config).kind == kind


def test_naive_datetime_is_utc():
    parsed = parse_datetime("1970-01-02 00:00:00", config.DEFAULT_DATETIME_FORMATS)
    assert parsed.epoch_seconds == 86400
    assert parsed.format_id == "%Y-%m-%d %H:%M:%S"


@pytest.mark.parametrize(
    "cells, expected",
    [
        (["1", "2", "x"], "integer"),
        (["1", "1.5"], "decimal"),
        (["true", "x"], "boolean"),
        (["2023-01-01", "5"], "datetime"),
        (["a", "b", "1"], "text"),
        (["", "NA"], "text"),
    ],
)
def test_infer_column_type(cells, expected, run_config):
    column_type, parses = infer_column_type(cells, run_config)
    assert column_type == expected
    assert len(parses) == len(cells)


def test_geo_columns(run_config):
    assert geo_kind("latitude", run_config) == "latitude"
    assert geo_kind("lat", run_config) == "latitude"
    assert geo_kind("lng", run_config) == "longitude"
    assert geo_kind("temperature", run_config) is None
    assert infer_column_type(["35.0", "36.0", "abc"], run_config, "latitude")[0] == "latitude"
    assert infer_column_type(["135.0", "300.0", "400.0"], run_config, "longitude")[0] == "text"


def test_cell_tags():
    dataset = make_dataset({
        "datetime": ["2023-04-01 00:00:00", "2023-04-01 01:00:00", ""],
        "temperature": ["12.5", "oops", "13.0"],
        "latitude": ["35.1", "95.0", "35.2"],
    })
    assert [c.tag for c in dataset.column("datetime").cells] == [DATETIME, DATETIME, MISSING]
    assert [c.tag for c in dataset.column("temperature").cells] == [NUMBER, TEXT, NUMBER]
    assert [c.tag for c in dataset.column("latitude").cells] == [GEO, TEXT, GEO]
    assert dataset.column("datetime").missing_count == 1
    assert dataset.variables == ["datetime", "temperature", "latitude"]


def test_load_dataset(write_csv, run_config):
    path = write_csv("weather.csv", ["Date Time", "Temp"], [["2023-04-01 00:00:00", "1.5"], ["2023-04-01 01:00:00", "NA"]])
    dataset = load_dataset(path, run_config, field_label="meteorology")
    assert dataset.id == "weather"
    assert dataset.field_label == "meteorology"
    assert dataset.row_count == 2
    assert dataset.variables == ["date_time", "temp"]
    assert dataset.column("temp").missing_count == 1


def test_load_dataset_strips_bom(tmp_path, run_config):
    path = tmp_path / "bom.csv"
    path.write_bytes("\ufeffname,value\nx,1\n".encode("utf-8"))
    dataset = load_dataset(str(path), run_config)
    assert dataset.variables == ["name", "value"]


def test_ragged_row(write_csv, run_config):
    path = write_csv("ragged.csv", ["a", "b"], [["1", "2"], ["3"]])
    with pytest.raises(IngestError) as excinfo:
        load_dataset(path, run_config)
    assert excinfo.value.row_index == 2
    assert excinfo.value.path == path


def test_missing_file(tmp_path, run_config):
    path = str(tmp_path / "nope.csv")
    with pytest.raises(IngestError) as excinfo:
        load_dataset(path, run_config)
    assert path in str(excinfo.value)


def test_empty_file(tmp_path, run_config):
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(IngestError):
        load_dataset(str(path), run_config)


def test_non_utf8(tmp_path, run_config):
    path = tmp_path / "latin.csv"
    path.write_bytes("name\ncaf\xe9\n".encode("latin-1"))
    with pytest.raises(IngestError):
        load_dataset(str(path), run_config)


def test_duplicate_normalized_columns(write_csv, run_config):
    path = write_csv("dup.csv", ["Temp", "temp "], [["1", "2"]])
    with pytest.raises(IngestError):
        load_dataset(path, run_config)


def test_synonyms_merge_column_names(write_csv):
    run_config = config.RunConfig(synonym_map={"temp": "temperature"})
    path = write_csv("syn.csv", ["Temp"], [["1"]])
    assert load_dataset(path, run_config).variables == ["temperature"]


def test_load_datasets_keeps_config_order(write_csv, tmp_path):
    b = write_csv("b.csv", ["x"], [["1"]])
    a = write_csv("a.csv", ["y"], [["2"]])
    run_config = config.parse_run_config(
        {"datasets": [{"path": b, "id": "B", "field_label": "f1"}, {"path": a, "id": "A", "field_label": "f2"}]}
    )
    datasets = load_datasets(run_config)
    assert [d.id for d in datasets] == ["B", "A"]
    assert [d.field_label for d in datasets] == ["f1", "f2"]


cell_text = st.text(alphabet=string.ascii_letters + string.digits + " ,.:-\"", max_size=8)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(cell_text, cell_text, cell_text), min_size=1, max_size=15))
def test_csv_text_preserves_raw_cells(rows):
    dataset = make_dataset({name: [row[i] for row in rows] for i, name in enumerate(["a", "b", "c"])})
    parsed = list(csv.reader(io.StringIO(dataset.to_csv_text())))
    assert parsed[0] == ["a", "b", "c"]
    assert [tuple(row) for row in parsed[1:]] == rows


def test_month_name_datetime_formats():
    run_config = config.RunConfig(datetime_formats=["%b %d %Y"])
    assert infer_column_type(["Jan 05 2021", "Feb 06 2021"], run_config)[0] == "datetime"
    parsed = parse_datetime("05 March 2021", ["%d %B %Y"])
    assert parsed is not None and parsed.format_id == "%d %B %Y"
    assert parse_datetime("March", ["%B"]) is None


def test_bare_digits_need_a_bare_format():
    assert parse_datetime("20210305", config.DEFAULT_DATETIME_FORMATS) is None
    assert parse_datetime("20210305", ["%Y%m%d"]).format_id == "%Y%m%d"
    assert infer_column_type(["20210305", "20210306"], config.RunConfig())[0] == "integer"


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=20))
def test_normalize_variable_name_is_idempotent(raw):
    once = normalize_variable_name(raw)
    assert normalize_variable_name(once) == once


missing_cell = st.sampled_from(["", "NA", "na", "N/A", "null", "-", " ", "1", "2.5", "x", "2023-04-01"])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(missing_cell, missing_cell), min_size=1, max_size=20))
def test_missing_count_matches_direct_scan(rows):
    run_config = config.RunConfig()
    columns = {"a": [row[0] for row in rows], "b": [row[1] for row in rows]}
    dataset = make_dataset(columns, run_config=run_config)
    expected = sum(1 for cells in columns.values() for raw in cells if raw == "" or raw in run_config.missing_tokens)
    assert sum(col.missing_count for col in dataset.columns) == expected
