import random
from datetime import datetime, timedelta

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import config
from helpers import make_dataset
from indices import (
    GranularityEntry,
    NotEvaluable,
    NotEvaluableError,
    accuracy,
    column_anomalies,
    completeness,
    compliance,
    granularity,
    missing_grid,
    precision,
    profile_dataset,
    quantity,
    uniqueness,
)
from utils import stats

START = datetime(2023, 4, 1)


def timestamps(offsets_seconds):
    return [(START + timedelta(seconds=s)).strftime("%Y-%m-%d %H:%M:%S") for s in offsets_seconds]


def test_quantity():
    dataset = make_dataset({"a": ["1", "", "3"], "b": ["x", "y", "NA"]})
    result = quantity(dataset)
    assert result.rows == 3
    assert result.non_missing_cells == 4


def test_completeness():
    dataset = make_dataset({"a": ["1", "", "3"], "b": ["x", "y", "NA"]})
    result = completeness(dataset)
    assert result.overall == pytest.approx(4 / 6)
    assert result.per_column == {"a": pytest.approx(2 / 3), "b": pytest.approx(2 / 3)}


def test_completeness_of_empty_dataset():
    with pytest.raises(NotEvaluableError):
        completeness(make_dataset({"a": []}))


def test_missing_grid_blocks():
    values = ["1"] * 100
    values[3] = ""
    grid = missing_grid(make_dataset({"a": values}), blocks=50)
    assert grid["block_size"] == 2
    assert len(grid["columns"]["a"]) == 50
    assert grid["columns"]["a"][1] == 1
    assert sum(grid["columns"]["a"]) == 1


def test_uniqueness_on_raw_text():
    dataset = make_dataset({"a": ["1", "1", "1.0", "2"], "b": ["x", "x", "x", "y"]})
    result = uniqueness(dataset)
    assert result.distinct_row_ratio == pytest.approx(3 / 4)
    assert result.per_column["a"] == pytest.approx(3 / 4)
    assert result.per_column["b"] == pytest.approx(2 / 4)


def test_precision_summary():
    dataset = make_dataset({"value": ["1.20", "3.456", "7"], "label": ["a", "b", "c"]})
    result = precision(dataset)
    assert set(result.per_column) == {"value"}
    assert result.per_column["value"]["significant_digits"] == {"min": 1, "median": 3.0, "max": 4}
    assert result.per_column["value"]["decimal_places"] == {"min": 0, "median": 2.0, "max": 3}
    assert result.headline == 3.0


def test_precision_without_numeric_columns():
    with pytest.raises(NotEvaluableError):
        precision(make_dataset({"label": ["a", "b"]}))


def test_precision_headline_averages_columns():
    dataset = make_dataset({"x": ["1.5", "2.5"], "y": ["10.25", "11.75"]})
    assert precision(dataset).headline == pytest.approx((2 + 4) / 2)


def test_iqr_fence_with_three_times_multiplier():
    values = [str(v) for v in range(1, 100)] + ["10000"]
    low, high = stats.iqr_fences([float(v) for v in values])
    assert high == pytest.approx(223.75)
    assert low == pytest.approx(25.75 - 3 * 49.5)
    result = accuracy(make_dataset({"value": values}), config.RunConfig())
    assert result.per_column["value"] == {"type_violations": 0, "range_outliers": 1, "format_violations": 0}
    assert result.anomalous_cells == 1
    assert result.overall_ratio == pytest.approx(1 / 100)


def test_accuracy_counts_a_cell_once():
    phones = [f"07512345{n:02d}" for n in range(20)] + ["9"]
    result = accuracy(make_dataset({"phone": phones}), config.RunConfig())
    assert result.per_column["phone"] == {"type_violations": 0, "range_outliers": 1, "format_violations": 1}
    assert result.anomalous_cells == 1
    assert result.non_missing_cells == 21
    assert result.overall_ratio == pytest.approx(1 / 21)


def test_accuracy_type_and_format_violations():
    dataset = make_dataset({
        "temperature": ["12.5", "13.0", "oops", "14.5", ""],
        "url": ["https://a.org", "https://b.org", "notaurl", "https://c.org", "https://d.org"],
    })
    result = accuracy(dataset, config.RunConfig())
    assert result.per_column["temperature"]["type_violations"] == 1
    assert result.per_column["url"]["format_violations"] == 1
    assert result.anomalous_cells == 2
    assert result.non_missing_cells == 9


def test_compliance():
    dataset = make_dataset({
        "datetime": ["2023-04-01 00:00:00", "2023-04-01 01:00:00", "2023-04-01 02:00:00", "2023/04/01 03:00"],
        "count": ["1", "2", "x", "4"],
        "label": ["a", "b", "c", "d"],
    })
    result = compliance(dataset, config.RunConfig())
    assert result.per_column == {"datetime": 0.75, "count": 0.75, "label": 1.0}
    assert result.overall == pytest.approx((0.75 + 0.75 + 1.0) / 3)


@pytest.mark.parametrize("period", [60, 3600, 86400])
def test_periodic_granularity(period):
    offsets = [i * period for i in range(12)]
    random.Random(period).shuffle(offsets)
    dataset = make_dataset({"datetime": timestamps(offsets)})
    entry = granularity(dataset, ["datetime"])["datetime"]
    assert entry == GranularityEntry(unit="seconds", median_interval=float(period), samples=12)


def test_granularity_median_interval():
    dataset = make_dataset({"datetime": timestamps([0, 60, 180, 420])})
    assert granularity(dataset, ["datetime"])["datetime"].median_interval == 120.0


def test_geographic_granularity():
    dataset = make_dataset({
        "latitude": ["35.0", "35.0", "35.0"],
        "longitude": ["135.0", "135.1", "135.2"],
    })
    expected = stats.haversine_km(35.0, 135.0, 35.0, 135.1)
    by_column = granularity(dataset, ["latitude"])["latitude"]
    by_token = granularity(dataset, [config.GEO_LOCATION_TOKEN])[config.GEO_LOCATION_TOKEN]
    assert by_column.unit == "kilometers"
    assert by_column.median_interval == pytest.approx(expected, rel=1e-9)
    assert by_token.median_interval == pytest.approx(expected, rel=1e-9)


def test_granularity_edge_cases():
    dataset = make_dataset({"datetime": timestamps([0]), "label": ["a"]})
    result = granularity(dataset, ["datetime", "label", "absent"])
    assert isinstance(result["datetime"], NotEvaluable)
    assert isinstance(result["label"], NotEvaluable)
    assert "absent" not in result


def test_granularity_uses_synonyms():
    dataset = make_dataset({"datetime": timestamps([0, 60])})
    result = granularity(dataset, ["Observed At"], {"observed_at": "datetime"})
    assert result["datetime"].median_interval == 60.0


def test_profile_of_header_only_dataset():
    profile = profile_dataset(make_dataset({"a": []}), config.RunConfig(), important_variables=[])
    payload = profile.to_dict()
    assert payload["quantity"]["rows"] == 0
    assert payload["completeness"]["status"] == "not_evaluable"
    assert payload["uniqueness"]["status"] == "not_evaluable"
    assert profile.headline("completeness") is None


def test_profile_headlines():
    dataset = make_dataset({
        "datetime": timestamps([0, 60, 120, 180]),
        "temperature": ["1.5", "2.5", "", "3.5"],
    })
    profile = profile_dataset(dataset, config.RunConfig(), important_variables=["datetime"])
    assert profile.headline("quantity") == 4.0
    assert profile.headline("completeness") == pytest.approx(7 / 8)
    assert profile.headline("uniqueness") == 1.0
    assert profile.headline("precision") == 2.0
    assert profile.headline("granularity:datetime") == 60.0
    assert profile.headline("granularity:absent") is None
    assert profile.to_dict()["granularity"]["datetime"]["status"] == "ok"


grid_cell = st.sampled_from(["1", "2", "3.5", "x", "", "NA"])


@st.composite
def grids(draw):
    n_rows = draw(st.integers(1, 8))
    n_cols = draw(st.integers(1, 4))
    return [[draw(grid_cell) for _ in range(n_cols)] for _ in range(n_rows)]


def _grid_dataset(rows):
    return make_dataset({f"c{j}": [row[j] for row in rows] for j in range(len(rows[0]))})


@settings(max_examples=200, deadline=None)
@given(grids(), st.data())
def test_blanking_never_increases_completeness(rows, data):
    before = completeness(_grid_dataset(rows)).overall
    r = data.draw(st.integers(0, len(rows) - 1))
    c = data.draw(st.integers(0, len(rows[0]) - 1))
    rows[r][c] = ""
    assert completeness(_grid_dataset(rows)).overall <= before


@settings(max_examples=200, deadline=None)
@given(grids(), st.data())
def test_duplicating_never_increases_distinct_ratio(rows, data):
    before = uniqueness(_grid_dataset(rows)).distinct_row_ratio
    r = data.draw(st.integers(0, len(rows) - 1))
    rows.insert(r, list(rows[r]))
    assert uniqueness(_grid_dataset(rows)).distinct_row_ratio <= before


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=4, max_size=30), st.data())
def test_non_numeric_insert_adds_one_anomaly(values, data):
    run_config = config.RunConfig()
    cells = [str(v) for v in values]
    before = accuracy(make_dataset({"value": cells}), run_config).anomalous_cells
    cells.insert(data.draw(st.integers(0, len(cells))), "not-a-number")
    after = accuracy(make_dataset({"value": cells}), run_config).anomalous_cells
    assert after == before + 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=4, max_size=30), st.data())
def test_extreme_insert_never_decreases_anomalies(values, data):
    run_config = config.RunConfig()
    cells = [str(v) for v in values]
    before = accuracy(make_dataset({"value": cells}), run_config)
    assume(before.anomalous_cells == 0)
    cells.insert(data.draw(st.integers(0, len(cells))), "1000000000")
    after = accuracy(make_dataset({"value": cells}), run_config)
    assert after.anomalous_cells >= before.anomalous_cells
    assert after.per_column["value"]["range_outliers"] >= 1


HEADLINE_INDICES = ["quantity", "completeness", "uniqueness", "precision", "accuracy", "compliance"]


def _per_column(result):
    return None if isinstance(result, NotEvaluable) else result.per_column


@settings(max_examples=200, deadline=None)
@given(grids(), st.data())
def test_row_order_does_not_change_indices(rows, data):
    run_config = config.RunConfig()
    shuffled = data.draw(st.permutations(rows))
    before = profile_dataset(_grid_dataset(rows), run_config, [])
    after = profile_dataset(_grid_dataset(shuffled), run_config, [])
    for index in HEADLINE_INDICES:
        expected = before.headline(index)
        if expected is None:
            assert after.headline(index) is None, index
        else:
            assert after.headline(index) == pytest.approx(expected), index
    for index in ("accuracy", "completeness", "uniqueness"):
        assert _per_column(getattr(after, index)) == _per_column(getattr(before, index)), index


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-500, 500), min_size=4, max_size=30), st.integers(-10000, 10000))
def test_constant_shift_keeps_flagged_cells(values, shift):
    run_config = config.RunConfig()
    original = make_dataset({"value": [str(v) for v in values]}, run_config=run_config)
    shifted = make_dataset({"value": [str(v + shift) for v in values]}, run_config=run_config)
    assert column_anomalies(shifted.column("value"), run_config) == column_anomalies(
        original.column("value"), run_config
    )
    assert accuracy(shifted, run_config) == accuracy(original, run_config)
