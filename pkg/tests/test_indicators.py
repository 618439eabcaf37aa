import numpy as np
import pytest

from integral_indicators import (
    CorrelationMatrix,
    Dataset,
    IndicatorSeries,
    Mode,
    WindowSpec,
    compare_strategies,
    express_indicator,
    indicator_series,
)
from integral_indicators.errors import ConfigMismatch, InsufficientData

from conftest import random_dataset
from oracles import system_state


def test_express_identity():
    assert express_indicator(CorrelationMatrix(np.eye(3), 7, Mode.PEARSON)).tolist() == [1.0, 1.0, 1.0]


def test_express_absolute_value():
    r = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert express_indicator(CorrelationMatrix(r, 7, Mode.PEARSON)).tolist() == [2.0, 2.0]


def test_express_random_matches_direct_sum(rng):
    a = rng.uniform(-1, 1, (5, 5))
    r = (a + a.T) / 2
    np.fill_diagonal(r, 1.0)
    want = [sum(abs(v) for v in row) for row in r.tolist()]
    np.testing.assert_allclose(express_indicator(CorrelationMatrix(r, 7, Mode.PEARSON)), want, rtol=1e-15)


@pytest.mark.parametrize("method", ["rolling", "batch", "blocked"])
def test_single_nonconstant_column(method):
    ds = random_dataset(0, 30, 1)
    s = indicator_series(ds, WindowSpec(6), method=method)
    assert s.times.tolist() == list(range(7, 31))
    assert np.all(s.g_rows == 1.0)
    assert s.g_total == 30 - 6


@pytest.mark.parametrize("method", ["rolling", "batch", "blocked"])
def test_all_constant_dataset(method):
    s = indicator_series(Dataset(np.full((20, 4), 7.5)), WindowSpec(6), method=method)
    assert s.g_total == 0.0
    assert s.inactive_counts.tolist() == [4] * 14


@pytest.mark.parametrize("mode", ["pearson", "raw-moment"])
def test_series_matches_naive_reference(mode):
    ds = random_dataset(1, 60, 10)
    total, steps = system_state(ds.values.tolist(), 6, mode)
    for method in ("rolling", "batch", "blocked"):
        s = indicator_series(ds, WindowSpec(6), mode, method=method, block_size=3)
        assert s.g_total == pytest.approx(total, rel=1e-9)
        np.testing.assert_allclose(s.g_step, steps, rtol=1e-9)


def test_series_internal_sums():
    s = indicator_series(random_dataset(2, 40, 7), WindowSpec(4))
    np.testing.assert_allclose(s.g_step, s.g_rows.sum(axis=1), rtol=1e-9)
    assert s.g_total == pytest.approx(s.g_step.sum(), rel=1e-9)
    assert np.all((s.g_rows >= 1.0) & (s.g_rows <= 7.0))


def test_series_insufficient_data():
    with pytest.raises(InsufficientData):
        indicator_series(random_dataset(0, 6, 2), WindowSpec(6))


def test_series_rejects_unknown_method():
    with pytest.raises(ValueError):
        indicator_series(random_dataset(0, 10, 2), WindowSpec(3), method="magic")


def test_threads_do_not_change_output():
    ds = random_dataset(3, 40, 9)
    a = indicator_series(ds, WindowSpec(5), method="blocked", block_size=4, threads=1)
    b = indicator_series(ds, WindowSpec(5), method="blocked", block_size=4, threads=4)
    assert a.g_total == b.g_total
    assert a.g_rows.tobytes() == b.g_rows.tobytes()


def test_duplicate_column_raises_total():
    base = random_dataset(4, 40, 5)
    dup = Dataset(np.column_stack([base.values, base.values[:, 0]]))
    a = indicator_series(base, WindowSpec(6))
    b = indicator_series(dup, WindowSpec(6))
    assert b.g_total > a.g_total
    assert np.all(b.g_step > a.g_step)


def test_copy_replacing_noise_does_not_decrease_total():
    rng = np.random.default_rng(5)
    for _ in range(20):
        v = rng.standard_normal((30, 6))
        w = v.copy()
        w[:, 5] = v[:, 1]
        a = indicator_series(Dataset(v), WindowSpec(6)).g_total
        b = indicator_series(Dataset(w), WindowSpec(6)).g_total
        assert b >= a


# strategy comparison


def test_published_delta_first_pair():
    a = IndicatorSeries.from_totals([1_229_156.0], [7], label="basic")
    b = IndicatorSeries.from_totals([1_248_571.0], [7], label="fire-safety")
    assert compare_strategies(a, b).delta_total == -19_415


def test_published_delta_second_pair():
    a = IndicatorSeries.from_totals([153_080.0], [7])
    b = IndicatorSeries.from_totals([155_896.0], [7])
    assert compare_strategies(a, b).delta_total == -2_816


def test_identical_series_zero_delta():
    s = indicator_series(random_dataset(6, 30, 4), WindowSpec(6))
    res = compare_strategies(s, s)
    assert res.delta_total == 0.0
    assert np.all(res.delta_step == 0.0)


def test_compare_mismatches():
    ds = random_dataset(7, 30, 4)
    s6 = indicator_series(ds, WindowSpec(6))
    with pytest.raises(ConfigMismatch):
        compare_strategies(s6, indicator_series(ds, WindowSpec(5)))
    with pytest.raises(ConfigMismatch):
        compare_strategies(s6, indicator_series(ds, WindowSpec(6), Mode.RAW_MOMENT))
    with pytest.raises(ConfigMismatch):
        compare_strategies(s6, indicator_series(random_dataset(7, 31, 4), WindowSpec(6)))


def test_compare_per_step_delta():
    a = indicator_series(random_dataset(8, 30, 4), WindowSpec(6))
    b = indicator_series(random_dataset(9, 30, 6), WindowSpec(6))
    res = compare_strategies(a, b)
    np.testing.assert_array_equal(res.delta_step, a.g_step - b.g_step)
    assert res.delta_total == a.g_total - b.g_total
