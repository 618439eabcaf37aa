"""Strategies as dataset transformations, and a synthetic scenario generator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, ParameterMeta, Space, WindowSpec
from .correlation import Mode
from .errors import InvalidSpec, LengthMismatch, OutOfRange, UnknownParameter
from .indicators import compare_strategies, indicator_series

RNG_NAME = "numpy.random.Generator(PCG64)"


@dataclass
class Strategy:
    """A management scenario expressed as edits to a base dataset.

    Applied in this order: ``scale_factors`` (multiply a whole column),
    ``overrides`` (set one value at a 1-based time index), then
    ``added_parameters`` appended as new columns.
    """

    id: str
    added_parameters: list[tuple[ParameterMeta, np.ndarray]] = field(default_factory=list)
    overrides: list[tuple[str, int, float]] = field(default_factory=list)
    scale_factors: list[tuple[str, float]] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not (self.added_parameters or self.overrides or self.scale_factors)


def apply_strategy(base: Dataset, strategy: Strategy) -> Dataset:
    """Return a new dataset with ``strategy`` applied; ``base`` is not modified."""
    values = np.array(base.values, order="F", copy=True)
    ids = base.ids

    def col(pid):
        try:
            return ids.index(pid)
        except ValueError:
            raise UnknownParameter(f"strategy {strategy.id!r} targets unknown parameter {pid!r}") from None

    for pid, factor in strategy.scale_factors:
        if not factor > 0:
            raise InvalidSpec(f"scale factor for {pid!r} must be positive, got {factor!r}")
        values[:, col(pid)] *= factor
    for pid, t, value in strategy.overrides:
        c = col(pid)
        if not 1 <= t <= base.t_max:
            raise OutOfRange(f"override of {pid!r} at t={t} outside 1..{base.t_max}")
        values[t - 1, c] = value

    meta = list(base.meta)
    extra = []
    for pm, series in strategy.added_parameters:
        series = np.asarray(series, dtype=np.float64)
        if series.shape != (base.t_max,):
            raise LengthMismatch(
                f"added parameter {pm.id!r} has {series.size} values, dataset has t_max={base.t_max}"
            )
        meta.append(pm)
        extra.append(series)
    if extra:
        values = np.column_stack([values] + extra)
    return Dataset(values, tuple(meta))


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic base/strategy pair.

    ``mix_width`` is the number of base columns each strategy-added column
    mixes; with ``mix_width=1`` and ``coupling=1`` an added column is an
    affine copy of one base column.
    """

    n_base: int = 200
    t_max: int = 60
    seed: int = 0
    base_correlation: float = 0.3
    coupled_count: int = 5
    coupling: float = 0.9
    mix_width: int = 1

    def check(self) -> None:
        def is_int(v):
            return isinstance(v, (int, np.integer)) and not isinstance(v, bool)

        for name in ("n_base", "t_max", "seed", "coupled_count", "mix_width"):
            if not is_int(getattr(self, name)):
                raise InvalidSpec(f"{name} must be an integer, got {getattr(self, name)!r}")
        if self.n_base < 1:
            raise InvalidSpec("n_base must be >= 1")
        if self.t_max < 2:
            raise InvalidSpec("t_max must be >= 2")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")
        if self.coupled_count < 0:
            raise InvalidSpec("coupled_count must be >= 0")
        if not 1 <= self.mix_width <= self.n_base:
            raise InvalidSpec(f"mix_width must be in [1, n_base={self.n_base}]")
        if not 0.0 <= self.base_correlation < 1.0:
            raise InvalidSpec(f"base_correlation must be in [0, 1), got {self.base_correlation!r}")
        if not 0.0 <= self.coupling <= 1.0:
            raise InvalidSpec(f"coupling must be in [0, 1], got {self.coupling!r}")


def _levels(rng, count):
    level = rng.uniform(1e3, 1e5, count)
    scale = level * rng.uniform(0.05, 0.2, count)
    return level, scale


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, Strategy]:
    """Seeded factor-model base dataset plus a coupled strategy.

    Draw order from ``Generator(PCG64(seed))``, all standard normals unless
    noted:

    1. factor ``f``, length ``t_max``;
    2. noise ``e``, shape ``(t_max, n_base)``;
    3. base levels ``uniform(1e3, 1e5)`` and relative scales ``uniform(0.05, 0.2)``;
    4. per added column: source columns (``choice`` without replacement,
       ``mix_width`` of them), weights ``uniform(0.5, 1.5)``, noise of length
       ``t_max``;
    5. added levels and scales as in step 3.

    Base latent ``z = sqrt(rho) f + sqrt(1 - rho) e`` has pairwise
    correlation ``rho = base_correlation``; column ``i`` is
    ``level_i + scale_i * z_i``. An added column's latent is
    ``coupling * (z[:, src] @ w) / ||w|| + (1 - coupling) * noise``.
    The last ``n_base // 10`` base columns are tagged environment, the rest
    actual; added columns are tagged control.
    """
    spec.check()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    t, n = spec.t_max, spec.n_base
    rho = spec.base_correlation

    f = rng.standard_normal(t)
    e = rng.standard_normal((t, n))
    z = np.sqrt(rho) * f[:, None] + np.sqrt(1.0 - rho) * e
    level, scale = _levels(rng, n)
    base_values = level + scale * z

    n_env = n // 10
    meta = tuple(
        ParameterMeta(
            id=f"x{i + 1:04d}",
            name=f"ledger item {i + 1}",
            space=Space.ENVIRONMENT if i >= n - n_env else Space.ACTUAL,
            units="RUB",
        )
        for i in range(n)
    )
    base = Dataset(base_values, meta)

    latents = []
    for _ in range(spec.coupled_count):
        src = rng.choice(n, size=spec.mix_width, replace=False)
        w = rng.uniform(0.5, 1.5, spec.mix_width)
        noise = rng.standard_normal(t)
        mix = z[:, src] @ w / np.linalg.norm(w)
        latents.append(spec.coupling * mix + (1.0 - spec.coupling) * noise)
    add_level, add_scale = _levels(rng, spec.coupled_count)
    added = [
        (
            ParameterMeta(id=f"fs{j + 1:03d}", name=f"fire safety process {j + 1}", space=Space.CONTROL, units="RUB"),
            add_level[j] + add_scale[j] * latents[j],
        )
        for j in range(spec.coupled_count)
    ]
    return base, Strategy(id=f"synthetic-seed{spec.seed}", added_parameters=added)


def run_comparison(
    base: Dataset,
    strategy: Strategy,
    spec: WindowSpec,
    mode=Mode.PEARSON,
    *,
    base_label: str = "base",
    strategy_label: str | None = None,
    config: dict | None = None,
    **series_kwargs,
):
    """Indicator series for ``base`` and the strategy dataset, and their delta.

    Extra keyword arguments go to :func:`indicator_series`; ``config`` entries
    are merged into the report's config echo.
    """
    from .report import build_report

    mode = Mode.parse(mode)
    strategy_label = strategy_label or strategy.id
    altered = apply_strategy(base, strategy)
    g_base = indicator_series(base, spec, mode, label=base_label, **series_kwargs)
    g_strat = indicator_series(altered, spec, mode, label=strategy_label, **series_kwargs)
    cmp = compare_strategies(g_base, g_strat)
    echo = {"k": spec.k, "mode": mode.value}
    echo.update({key: series_kwargs[key] for key in sorted(series_kwargs)})
    echo.update(config or {})
    return build_report(g_base, g_strat, cmp, echo)
