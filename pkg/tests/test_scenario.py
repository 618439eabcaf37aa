import hashlib

import numpy as np
import pytest

from integral_indicators import (
    Dataset,
    ParameterMeta,
    Space,
    Strategy,
    SyntheticSpec,
    WindowSpec,
    apply_strategy,
    generate_synthetic,
    indicator_series,
    run_comparison,
)
from integral_indicators.errors import InvalidSpec, LengthMismatch, OutOfRange, SchemaError, UnknownParameter

from conftest import random_dataset
from oracles import expected_abs_null_r


def digest(ds):
    return hashlib.sha256(ds.values.tobytes() + repr(ds.meta).encode()).hexdigest()


def test_empty_strategy_is_identity():
    base = random_dataset(0, 20, 3)
    out = apply_strategy(base, Strategy("noop"))
    assert out.equals(base)


def test_apply_strategy_edits():
    base = Dataset(np.arange(12.0).reshape(4, 3), tuple(ParameterMeta(p) for p in "abc"))
    s = Strategy(
        "edit",
        added_parameters=[(ParameterMeta("d", space=Space.CONTROL), np.ones(4))],
        overrides=[("b", 2, -1.0)],
        scale_factors=[("a", 2.0), ("b", 10.0)],
    )
    before = digest(base)
    out = apply_strategy(base, s)
    assert digest(base) == before
    assert out.ids == ["a", "b", "c", "d"]
    assert out.t_max == base.t_max
    np.testing.assert_array_equal(out.values[:, 0], 2 * base.values[:, 0])
    assert out.values[1, 1] == -1.0 and out.values[0, 1] == 10.0
    assert out.meta[3].space is Space.CONTROL


def test_apply_strategy_errors():
    base = random_dataset(1, 10, 2)
    with pytest.raises(UnknownParameter):
        apply_strategy(base, Strategy("bad", overrides=[("nope", 1, 0.0)]))
    with pytest.raises(UnknownParameter):
        apply_strategy(base, Strategy("bad", scale_factors=[("nope", 2.0)]))
    with pytest.raises(LengthMismatch):
        apply_strategy(base, Strategy("bad", added_parameters=[(ParameterMeta("z"), np.ones(9))]))
    with pytest.raises(OutOfRange):
        apply_strategy(base, Strategy("bad", overrides=[("x1", 11, 0.0)]))
    with pytest.raises(InvalidSpec):
        apply_strategy(base, Strategy("bad", scale_factors=[("x1", 0.0)]))
    with pytest.raises(SchemaError):
        apply_strategy(base, Strategy("bad", added_parameters=[(ParameterMeta("x1"), np.ones(10))]))


def test_duplicate_column_strategy_increases_total():
    base = random_dataset(2, 40, 6)
    s = Strategy("dup", added_parameters=[(ParameterMeta("copy"), base.values[:, 3].copy())])
    a = indicator_series(base, WindowSpec(6)).g_total
    b = indicator_series(apply_strategy(base, s), WindowSpec(6)).g_total
    assert b > a


def test_duplicate_column_per_step_delta():
    base = random_dataset(3, 50, 8)
    s = Strategy("dup", added_parameters=[(ParameterMeta("copy"), base.values[:, 0].copy())])
    report = run_comparison(base, s, WindowSpec(6))
    g_base = indicator_series(base, WindowSpec(6))
    g_dup = indicator_series(apply_strategy(base, s), WindowSpec(6))
    np.testing.assert_allclose(report.delta_step, g_base.g_step - g_dup.g_step, rtol=0, atol=0)
    assert all(d <= 0 for d in report.delta_step)
    assert report.delta_total < 0


def test_empty_strategy_zero_delta():
    report = run_comparison(random_dataset(4, 30, 5), Strategy("noop"), WindowSpec(6))
    assert report.delta_total == 0.0


def test_generate_is_deterministic():
    spec = SyntheticSpec(n_base=20, t_max=30, seed=7)
    b1, s1 = generate_synthetic(spec)
    b2, s2 = generate_synthetic(spec)
    assert b1.equals(b2)
    assert len(s1.added_parameters) == 5
    for (m1, v1), (m2, v2) in zip(s1.added_parameters, s2.added_parameters):
        assert m1 == m2 and v1.tobytes() == v2.tobytes()
        assert m1.space is Space.CONTROL
    b3, _ = generate_synthetic(SyntheticSpec(n_base=20, t_max=30, seed=8))
    assert not b1.equals(b3)


def test_generate_base_correlation_roughly_hit():
    base, _ = generate_synthetic(SyntheticSpec(n_base=40, t_max=2000, seed=1, base_correlation=0.4))
    r = np.corrcoef(base.values.T)
    mean_off = (r.sum() - 40) / (40 * 39)
    assert mean_off == pytest.approx(0.4, abs=0.05)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"coupling": 2.0},
        {"coupling": -0.1},
        {"base_correlation": 1.0},
        {"n_base": 0},
        {"t_max": 1},
        {"coupled_count": -1},
        {"mix_width": 0},
        {"seed": -5},
        {"n_base": 2.5},
    ],
)
def test_generate_invalid_spec(kwargs):
    with pytest.raises(InvalidSpec):
        generate_synthetic(SyntheticSpec(**kwargs))


def test_full_coupling_copies_source():
    spec = SyntheticSpec(n_base=10, t_max=30, seed=3, coupled_count=1, coupling=1.0)
    base, strat = generate_synthetic(spec)
    ds = apply_strategy(base, strat)
    s = indicator_series(ds, WindowSpec(6))
    # copy of an always-active base column: own diagonal + |r| = 1 with the source
    assert np.all(s.g_rows[:, -1] >= 2.0 - 1e-12)


def test_independent_added_column_contribution():
    """Mean G increase per independent added column per step.

    Under independence each of the n base columns contributes E|r| twice
    (row and column) on top of the added column's own diagonal, where
    E|r| is the null expectation for a window of k samples.
    """
    n_base, k, seeds = 5, 6, 150
    per_step = []
    for seed in range(seeds):
        spec = SyntheticSpec(n_base=n_base, t_max=60, seed=seed, coupled_count=1, coupling=0.0)
        base, strat = generate_synthetic(spec)
        report = run_comparison(base, strat, WindowSpec(k))
        per_step.append(-report.delta_total / len(report.times))
    expected = 1.0 + 2.0 * n_base * expected_abs_null_r(k)
    assert np.mean(per_step) == pytest.approx(expected, abs=0.15)


@pytest.mark.xfail(strict=True, reason="cross terms of an independent column are not near zero for k=6 windows")
def test_independent_added_column_contribution_literal():
    per_step = []
    for seed in range(100):
        spec = SyntheticSpec(n_base=5, t_max=60, seed=seed, coupled_count=1, coupling=0.0)
        base, strat = generate_synthetic(spec)
        report = run_comparison(base, strat, WindowSpec(6))
        per_step.append(-report.delta_total / len(report.times))
    assert np.mean(per_step) == pytest.approx(1.0, abs=0.15)


def test_coupled_strategy_sign():
    for seed in range(20):
        spec = SyntheticSpec(n_base=30, t_max=60, seed=seed, coupled_count=5, coupling=0.9)
        base, strat = generate_synthetic(spec)
        assert run_comparison(base, strat, WindowSpec(6)).delta_total < 0


def test_coupling_trend_is_monotone():
    medians = []
    for coupling in (0.0, 0.5, 0.9):
        totals = []
        for seed in range(15):
            spec = SyntheticSpec(n_base=30, t_max=60, seed=seed, coupled_count=5, coupling=coupling)
            base, strat = generate_synthetic(spec)
            totals.append(indicator_series(apply_strategy(base, strat), WindowSpec(6)).g_total)
        medians.append(np.median(totals))
    assert medians[0] <= medians[1] <= medians[2]


def test_run_comparison_config_echo():
    base = random_dataset(5, 30, 4)
    report = run_comparison(base, Strategy("noop"), WindowSpec(6), "raw-moment", method="batch", config={"seeds": [5]})
    assert report.config["k"] == 6
    assert report.config["mode"] == "raw-moment"
    assert report.config["method"] == "batch"
    assert report.config["seeds"] == [5]
    assert report.labels == ("base", "noop")
