"""Express integral indicator, whole-run system state and strategy deltas.

For each valid step ``t`` the express indicator of parameter ``i`` is the
absolute row sum of the window correlation matrix, diagonal included.
The system state of a run is the sum of those indicators over all
parameters and all steps ``t = k+1 .. t_max`` (earlier steps have no full
window).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, WindowSpec, analysis_range, window_slice
from .correlation import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_REINIT_INTERVAL,
    DEFAULT_VARIANCE_THRESHOLD,
    CorrelationMatrix,
    Mode,
    correlation_at,
    indicator_rows_blocked,
    rolling_init,
)
from .errors import ConfigMismatch

METHODS = ("rolling", "batch", "blocked")


@dataclass(eq=False)
class IndicatorSeries:
    """Per-step indicators for one dataset.

    ``g_rows`` may be ``None`` for series built from externally supplied
    totals (see :meth:`from_totals`).
    """

    times: np.ndarray
    g_step: np.ndarray
    g_total: float
    mode: Mode
    k: int
    g_rows: np.ndarray | None = None
    inactive_counts: np.ndarray | None = None
    label: str = ""

    @classmethod
    def from_totals(cls, g_step, times, mode=Mode.PEARSON, k=6, label="", g_total=None):
        g_step = np.asarray(g_step, dtype=np.float64)
        times = np.asarray(times, dtype=np.int64)
        if g_step.shape != times.shape:
            raise ValueError("g_step and times must have the same length")
        total = math.fsum(g_step) if g_total is None else float(g_total)
        return cls(times, g_step, total, Mode.parse(mode), int(k), label=label)

    @property
    def t_range(self) -> tuple[int, int]:
        return int(self.times[0]), int(self.times[-1])


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    times: np.ndarray
    delta_step: np.ndarray
    delta_total: float
    labels: tuple[str, str] = field(default=("base", "strategy"))


def express_indicator(corr: CorrelationMatrix) -> np.ndarray:
    return np.abs(corr.entries).sum(axis=1)


def _inactive(window: np.ndarray, threshold: float) -> int:
    return int((window.var(axis=0, ddof=1) < threshold).sum())


def indicator_series(
    dataset: Dataset,
    spec: WindowSpec,
    mode=Mode.PEARSON,
    *,
    method: str = "rolling",
    block_size: int = DEFAULT_BLOCK_SIZE,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    reinit_interval: int = DEFAULT_REINIT_INTERVAL,
    threads: int = 1,
    label: str = "",
) -> IndicatorSeries:
    """Compute ``G_i(t)`` for every valid step and accumulate the run total.

    ``method`` selects the evaluation path:

    * ``"rolling"``: incremental compensated moments, one sweep per step;
    * ``"batch"``: full matrix recomputed from the window at every step;
    * ``"blocked"``: matrix-free recomputation in ``block_size`` tiles.

    The recomputing paths evaluate steps on ``threads`` workers; results are
    always reduced in time order, so output does not depend on ``threads``.
    """
    mode = Mode.parse(mode)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    first, last = analysis_range(dataset, spec)
    times = np.arange(first, last + 1, dtype=np.int64)
    pearson = mode is Mode.PEARSON

    if method == "rolling":
        moments = rolling_init(dataset, spec, reinit_interval, variance_threshold)
        rows, counts = [], []
        g, c = moments.row_sums(mode, variance_threshold)
        rows.append(g)
        counts.append(c)
        for t in times[1:]:
            g, c = moments.step_row_sums(dataset.values[t - 2], mode, variance_threshold)
            rows.append(g)
            counts.append(c)
    else:
        def one(t):
            if method == "batch":
                corr = correlation_at(dataset, t, spec, mode, variance_threshold)
                g = express_indicator(corr)
                c = int(dataset.n - corr.active.sum()) if pearson else 0
            else:
                g = indicator_rows_blocked(dataset, t, spec, mode, block_size, variance_threshold)
                c = _inactive(window_slice(dataset, t, spec), variance_threshold) if pearson else 0
            return g, c

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one, times))
        else:
            results = [one(t) for t in times]
        rows = [r[0] for r in results]
        counts = [r[1] for r in results]

    g_rows = np.vstack(rows)
    g_step = g_rows.sum(axis=1)
    return IndicatorSeries(
        times=times,
        g_step=g_step,
        g_total=math.fsum(g_step),
        mode=mode,
        k=spec.k,
        g_rows=g_rows,
        inactive_counts=np.asarray(counts, dtype=np.int64),
        label=label,
    )


def compare_strategies(g_a: IndicatorSeries, g_b: IndicatorSeries) -> ComparisonResult:
    """Delta ``G_a - G_b``; negative when ``b`` is the more interconnected run."""
    if g_a.k != g_b.k:
        raise ConfigMismatch(f"window length differs: k={g_a.k} vs k={g_b.k}")
    if g_a.mode != g_b.mode:
        raise ConfigMismatch(f"mode differs: {g_a.mode.value} vs {g_b.mode.value}")
    if g_a.times.shape != g_b.times.shape or not np.array_equal(g_a.times, g_b.times):
        raise ConfigMismatch(
            f"time ranges differ: {g_a.t_range if len(g_a.times) else ()} vs "
            f"{g_b.t_range if len(g_b.times) else ()}"
        )
    return ComparisonResult(
        times=g_a.times.copy(),
        delta_step=g_a.g_step - g_b.g_step,
        delta_total=g_a.g_total - g_b.g_total,
        labels=(g_a.label or "a", g_b.label or "b"),
    )
