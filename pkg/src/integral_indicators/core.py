"""System identification types: parameters, datasets and window addressing.

Time indices are 1-based throughout the public API, matching the usual
``t = 1..T`` notation; the window for step ``t`` is made of the ``k`` rows
strictly before it, newest first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientData, OutOfRange, SchemaError

DEFAULT_K = 6


class Space(str, enum.Enum):
    """Which parameter space a column belongs to."""

    ACTUAL = "actual"
    CONTROL = "control"
    ENVIRONMENT = "environment"

    @classmethod
    def parse(cls, value) -> "Space":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            allowed = ", ".join(s.value for s in cls)
            raise SchemaError(f"unknown parameter space {value!r} (expected one of {allowed})") from None


@dataclass(frozen=True)
class ParameterMeta:
    id: str
    name: str = ""
    space: Space = Space.ACTUAL
    units: str = ""

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id.strip():
            raise SchemaError("parameter id must be a non-empty string")
        object.__setattr__(self, "space", Space.parse(self.space))
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable ``t_max x n`` table of parameter values plus column metadata.

    Values are copied into a read-only Fortran-ordered float64 array so that
    per-column access is contiguous.
    """

    values: np.ndarray
    meta: tuple[ParameterMeta, ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, order="F", copy=True)
        if values.ndim != 2:
            raise SchemaError(f"values must be 2-D, got shape {values.shape}")
        t_max, n = values.shape
        if t_max < 1 or n < 1:
            raise SchemaError(f"dataset must have at least one row and column, got {values.shape}")
        bad = ~np.isfinite(values)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise SchemaError("non-finite value", row=int(r) + 1, column=int(c) + 1)
        meta = tuple(self.meta) or tuple(ParameterMeta(f"x{i + 1}") for i in range(n))
        if len(meta) != n:
            raise SchemaError(f"meta has {len(meta)} entries for {n} columns")
        seen = set()
        for m in meta:
            if m.id in seen:
                raise SchemaError(f"duplicate parameter id {m.id!r}")
            seen.add(m.id)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "meta", meta)

    @property
    def t_max(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def ids(self) -> list[str]:
        return [m.id for m in self.meta]

    def index_of(self, param_id: str) -> int:
        for i, m in enumerate(self.meta):
            if m.id == param_id:
                return i
        raise KeyError(param_id)

    def row(self, t: int) -> np.ndarray:
        """Row ``x(t)`` for 1-based ``t``."""
        if not 1 <= t <= self.t_max:
            raise OutOfRange(f"t={t} outside 1..{self.t_max}")
        return self.values[t - 1]

    def select(self, columns: Sequence[int]) -> "Dataset":
        cols = list(columns)
        return Dataset(self.values[:, cols], tuple(self.meta[c] for c in cols))

    def equals(self, other: "Dataset") -> bool:
        """Bit-exact equality of values and metadata."""
        return (
            self.meta == other.meta
            and self.values.shape == other.values.shape
            and self.values.tobytes(order="F") == other.values.tobytes(order="F")
        )


@dataclass(frozen=True)
class WindowSpec:
    k: int = DEFAULT_K

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 2:
            raise ValueError(f"window length k must be an integer >= 2, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    def check(self, dataset: Dataset) -> None:
        if dataset.t_max < self.k + 1:
            raise InsufficientData(
                f"t_max={dataset.t_max} leaves no valid step for k={self.k} (need t_max >= {self.k + 1})"
            )


def analysis_range(dataset: Dataset, spec: WindowSpec) -> tuple[int, int]:
    """First and last ``t`` for which a full window exists."""
    spec.check(dataset)
    return spec.k + 1, dataset.t_max


def window_slice(dataset: Dataset, t: int, spec: WindowSpec) -> np.ndarray:
    """Return the ``k x n`` window ``[x(t-1), x(t-2), ..., x(t-k)]``.

    Row ``x(t)`` itself is never read.
    """
    k = spec.k
    if t < k + 1 or t > dataset.t_max:
        raise OutOfRange(f"t={t} outside valid range [{k + 1}, {dataset.t_max}] for k={k}")
    # rows t-k .. t-1 (1-based) are indices t-k-1 .. t-2; reverse for newest first
    return np.ascontiguousarray(dataset.values[t - k - 1 : t - 1][::-1])
