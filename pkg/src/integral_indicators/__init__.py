"""Sliding-window correlation indicators for multivariate dynamic systems."""

__version__ = "0.1.0"

from .core import Dataset, ParameterMeta, Space, WindowSpec, analysis_range, window_slice  # noqa: E402
from .correlation import (  # noqa: E402
    CorrelationMatrix,
    Mode,
    RollingMoments,
    correlation_at,
    correlation_from_moments,
    indicator_rows_blocked,
    rolling_init,
    rolling_step,
)
from .indicators import (  # noqa: E402
    ComparisonResult,
    IndicatorSeries,
    compare_strategies,
    express_indicator,
    indicator_series,
)
from .scenario import Strategy, SyntheticSpec, apply_strategy, generate_synthetic, run_comparison  # noqa: E402

__all__ = [
    "ComparisonResult",
    "CorrelationMatrix",
    "Dataset",
    "IndicatorSeries",
    "Mode",
    "ParameterMeta",
    "RollingMoments",
    "Space",
    "Strategy",
    "SyntheticSpec",
    "WindowSpec",
    "analysis_range",
    "apply_strategy",
    "compare_strategies",
    "correlation_at",
    "correlation_from_moments",
    "express_indicator",
    "generate_synthetic",
    "indicator_rows_blocked",
    "indicator_series",
    "rolling_init",
    "rolling_step",
    "run_comparison",
    "window_slice",
]
