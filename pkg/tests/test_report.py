import json

import numpy as np
import pytest

from integral_indicators import IndicatorSeries, Strategy, SyntheticSpec, WindowSpec, generate_synthetic, run_comparison
from integral_indicators.errors import InvalidReport
from integral_indicators.indicators import compare_strategies
from integral_indicators.report import ComparisonReport, build_report, dumps, read_report, write_report


def populated_report():
    base, strat = generate_synthetic(SyntheticSpec(n_base=12, t_max=30, seed=4))
    return run_comparison(base, strat, WindowSpec(6), config={"seeds": [4], "method_label": "TQM"})


def test_report_round_trip(tmp_path):
    report = populated_report()
    write_report(report, tmp_path / "r.json")
    back = read_report(tmp_path / "r.json")
    assert back == report
    assert back.to_dict() == report.to_dict()


def test_report_key_order_is_stable(tmp_path):
    report = populated_report()
    write_report(report, tmp_path / "a.json")
    write_report(read_report(tmp_path / "a.json"), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    keys = list(json.loads((tmp_path / "a.json").read_text()))
    assert keys[:4] == ["format_version", "tool_version", "config", "labels"]


def test_published_delta_in_report(tmp_path):
    a = IndicatorSeries.from_totals([1_229_156.0], [7], label="basic")
    b = IndicatorSeries.from_totals([1_248_571.0], [7], label="fire-safety")
    report = build_report(a, b, compare_strategies(a, b), {"k": 6})
    write_report(report, tmp_path / "r.json")
    assert '"delta_total": -19415' in (tmp_path / "r.json").read_text()


def test_empty_series_rejected(tmp_path):
    report = ComparisonReport(
        config={}, labels=("a", "b"), times=[], g_total={"a": 0.0, "b": 0.0},
        g_step={"a": [], "b": []}, delta_total=0.0, delta_step=[],
    )
    with pytest.raises(InvalidReport):
        write_report(report, tmp_path / "r.json")


def test_same_labels_rejected(tmp_path):
    report = populated_report()
    report.labels = ("x", "x")
    with pytest.raises(InvalidReport):
        write_report(report, tmp_path / "r.json")


def test_read_malformed(tmp_path):
    (tmp_path / "r.json").write_text("{not json")
    with pytest.raises(InvalidReport):
        read_report(tmp_path / "r.json")
    (tmp_path / "r.json").write_text('{"config": {}}')
    with pytest.raises(InvalidReport):
        read_report(tmp_path / "r.json")


@pytest.mark.parametrize("value", [0.1, 1 / 3, 1e-310, 2.0**60 + 1, -19415.0, 1.7976931348623157e308])
def test_float_text_round_trip(value):
    assert float(dumps(value)) == value
    assert len(dumps(1 / 3).replace("0.", "").lstrip("0")) == 17


def test_non_finite_rejected():
    with pytest.raises(InvalidReport):
        dumps({"x": float("nan")})


def test_dumps_is_json():
    obj = {"a": [1, 2.5, None, True], "b": {"c": "d\"e"}, "e": [], "f": {}, "g": [{"h": 1}]}
    assert json.loads(dumps(obj)) == obj
    assert np.isclose(json.loads(dumps({"x": np.float64(0.25)}))["x"], 0.25)


def test_empty_strategy_report(tmp_path):
    from integral_indicators import Dataset

    ds = Dataset(np.random.default_rng(0).standard_normal((20, 3)))
    report = run_comparison(ds, Strategy("noop"), WindowSpec(6))
    write_report(report, tmp_path / "r.json")
    assert read_report(tmp_path / "r.json").delta_total == 0.0
