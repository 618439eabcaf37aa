"""Window correlation matrices: batch, rolling and blocked evaluation.

Two modes are supported:

``Mode.PEARSON``
    Sample Pearson correlation over the window. Columns whose window sample
    variance is below ``variance_threshold`` are *inactive*: their whole row
    and column, diagonal included, is zero.
``Mode.RAW_MOMENT``
    The uncentred product sum ``sum_l x_i x_j / (k - 1)``, no scaling and no
    inactive policy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Dataset, WindowSpec, window_slice
from .errors import InsufficientData

DEFAULT_VARIANCE_THRESHOLD = 1e-12
DEFAULT_REINIT_INTERVAL = 256
DEFAULT_BLOCK_SIZE = 64
# Rebuild when a column keeps less than this fraction of its shifted second
# moment after centring, or of its peak second moment since the last rebuild;
# bounds cancellation error in r to roughly eps / COND_TOL.
COND_TOL = 1e-6


class Mode(str, enum.Enum):
    PEARSON = "pearson"
    RAW_MOMENT = "raw-moment"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("_", "-")
        if v in ("raw", "rawmoment"):
            v = "raw-moment"
        return cls(v)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    entries: np.ndarray
    t: int
    mode: Mode

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def active(self) -> np.ndarray:
        """Boolean mask of columns with a non-zero diagonal."""
        return np.diag(self.entries) != 0.0


def _standardize(window: np.ndarray, variance_threshold: float):
    """Centre and scale window columns so that ``Z.T @ Z`` is the Pearson matrix."""
    k = window.shape[0]
    dev = window - window.mean(axis=0)
    m2 = np.einsum("ij,ij->j", dev, dev)
    active = m2 / (k - 1) >= variance_threshold
    scale = np.zeros_like(m2)
    scale[active] = 1.0 / np.sqrt(m2[active])
    return dev * scale, active


def _symmetrize(r: np.ndarray, diag: np.ndarray) -> np.ndarray:
    upper = np.triu(r, 1)
    out = upper + upper.T
    out[np.diag_indices_from(out)] = diag
    return out


def correlation_at(
    dataset: Dataset,
    t: int,
    spec: WindowSpec,
    mode=Mode.PEARSON,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> CorrelationMatrix:
    """Batch correlation matrix for the window ending just before ``t``."""
    mode = Mode.parse(mode)
    window = window_slice(dataset, t, spec)
    if mode is Mode.RAW_MOMENT:
        r = window.T @ window / (spec.k - 1)
        return CorrelationMatrix(_symmetrize(r, np.diag(r).copy()), t, mode)
    z, active = _standardize(window, variance_threshold)
    r = np.clip(z.T @ z, -1.0, 1.0)
    return CorrelationMatrix(_symmetrize(r, active.astype(np.float64)), t, mode)


class RollingMoments:
    """Compensated window sums, advanced one row at a time.

    Sums are stored for data shifted by a per-column reference value (the
    window mean at the last rebuild), which keeps the centred moments well
    conditioned. Rebuilds happen every ``reinit_interval`` steps and whenever
    a column's mean drifts far from its shift or its window second moment
    collapses far below its recent peak, either of which threatens precision.

    The public ``sum_x``/``sum_sq``/``sum_prod`` properties report sums of the
    unshifted data.
    """

    def __init__(
        self,
        rows,
        t: int,
        reinit_interval: int = DEFAULT_REINIT_INTERVAL,
        variance_floor: float = DEFAULT_VARIANCE_THRESHOLD,
    ):
        ring = np.array(rows, dtype=np.float64, order="C")
        if ring.ndim != 2 or ring.shape[0] < 2:
            raise ValueError("need a 2-D block of at least two rows")
        if reinit_interval < 1:
            raise ValueError("reinit_interval must be positive")
        self.k, self.n = ring.shape
        self.t = t
        self.reinit_interval = int(reinit_interval)
        self.variance_floor = float(variance_floor)
        self._ring = ring
        self._head = 0  # index of the oldest row
        self.rebuilds = 0
        self._rebuild()
        self.rebuilds = 0

    def _rebuild(self):
        self.shift = self._ring.mean(axis=0)
        dev = self._ring - self.shift
        self._pair = np.triu(dev.T @ dev)
        self._pair_c = np.zeros_like(self._pair)
        self._col = dev.sum(axis=0)
        self._col_c = np.zeros_like(self._col)
        self._peak = np.diag(self._pair).copy()
        self._since_rebuild = 0
        self.rebuilds += 1

    @property
    def window_rows(self) -> np.ndarray:
        """Rows currently in the window, oldest first."""
        return np.roll(self._ring, -self._head, axis=0)

    @property
    def sum_x(self) -> np.ndarray:
        return self._col + self._col_c + self.k * self.shift

    @property
    def sum_prod(self) -> np.ndarray:
        sc = self._pair + self._pair_c
        sc = np.triu(sc) + np.triu(sc, 1).T
        m = self._col + self._col_c
        a = self.shift
        return sc + np.outer(a, m) + np.outer(m, a) + self.k * np.outer(a, a)

    @property
    def sum_sq(self) -> np.ndarray:
        return np.diag(self.sum_prod).copy()

    def _advance(self, incoming):
        """Rotate the ring; return shifted (new, old) rows or None after a rebuild."""
        x_new = np.asarray(incoming, dtype=np.float64)
        if x_new.shape != (self.n,):
            raise ValueError(f"incoming row has shape {x_new.shape}, expected ({self.n},)")
        x_old = self._ring[self._head].copy()
        self._ring[self._head] = x_new
        self._head = (self._head + 1) % self.k
        self.t += 1
        self._since_rebuild += 1
        if self._since_rebuild >= self.reinit_interval:
            self._rebuild()
            return None
        d_new = x_new - self.shift
        d_old = x_old - self.shift
        _kernels.update_vector(self._col, self._col_c, d_new, d_old)
        ill = _kernels.update_diagonal(
            self._pair, self._pair_c, self._col, self._col_c, self._peak, d_new, d_old,
            self.k, self.variance_floor, COND_TOL,
        )
        if ill:
            self._rebuild()
            return None
        return d_new, d_old

    def step(self, incoming) -> "RollingMoments":
        """Slide the window forward by one row (in place); returns ``self``."""
        d = self._advance(incoming)
        if d is not None:
            _kernels.update_offdiagonal(self._pair, self._pair_c, *d)
        return self

    def _weights(self, mode: Mode, variance_threshold: float):
        m = self._col + self._col_c
        if mode is Mode.RAW_MOMENT:
            return m, np.full(self.n, 1.0 / np.sqrt(self.k - 1)), 0
        m2 = np.diag(self._pair) + np.diag(self._pair_c) - m * m / self.k
        active = m2 / (self.k - 1) >= variance_threshold
        w = np.zeros(self.n)
        w[active] = 1.0 / np.sqrt(m2[active])
        return m, w, int(self.n - active.sum())

    def step_row_sums(self, incoming, mode=Mode.PEARSON, variance_threshold=DEFAULT_VARIANCE_THRESHOLD):
        """Advance one row and return ``(G_i vector, inactive count)`` for the new window.

        Equivalent to ``step`` followed by row sums of
        ``correlation_from_moments`` but done in a single sweep.
        """
        mode = Mode.parse(mode)
        d = self._advance(incoming)
        if d is None:
            return self.row_sums(mode, variance_threshold)
        m, w, inactive = self._weights(mode, variance_threshold)
        g = np.empty(self.n)
        _kernels.update_offdiagonal_row_sums(
            self._pair, self._pair_c, d[0], d[1], mode is Mode.RAW_MOMENT,
            m, self.shift, w, self.k, g,
        )
        return g, inactive

    def row_sums(self, mode=Mode.PEARSON, variance_threshold=DEFAULT_VARIANCE_THRESHOLD):
        mode = Mode.parse(mode)
        m, w, inactive = self._weights(mode, variance_threshold)
        g = np.empty(self.n)
        _kernels.row_sums(self._pair, self._pair_c, mode is Mode.RAW_MOMENT, m, self.shift, w, self.k, g)
        return g, inactive

    def correlation(self, mode=Mode.PEARSON, variance_threshold=DEFAULT_VARIANCE_THRESHOLD) -> CorrelationMatrix:
        mode = Mode.parse(mode)
        m, w, _ = self._weights(mode, variance_threshold)
        r = _kernels.fill_matrix(self._pair, self._pair_c, mode is Mode.RAW_MOMENT, m, self.shift, w, self.k)
        return CorrelationMatrix(r, self.t, mode)


def rolling_init(
    dataset: Dataset,
    spec: WindowSpec,
    reinit_interval: int = DEFAULT_REINIT_INTERVAL,
    variance_floor: float = DEFAULT_VARIANCE_THRESHOLD,
) -> RollingMoments:
    """Moments over rows ``1..k``, i.e. the window for ``t = k + 1``."""
    if dataset.t_max < spec.k + 1:
        raise InsufficientData(f"t_max={dataset.t_max} < k+1={spec.k + 1}")
    return RollingMoments(dataset.values[: spec.k], spec.k + 1, reinit_interval, variance_floor)


def rolling_step(moments: RollingMoments, incoming) -> RollingMoments:
    """Advance ``moments`` in place by the row ``x(t-1)`` of the next step."""
    return moments.step(incoming)


def correlation_from_moments(
    moments: RollingMoments, mode=Mode.PEARSON, variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD
) -> CorrelationMatrix:
    return moments.correlation(mode, variance_threshold)


def indicator_rows_blocked(
    dataset: Dataset,
    t: int,
    spec: WindowSpec,
    mode=Mode.PEARSON,
    block_size: int = DEFAULT_BLOCK_SIZE,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
) -> np.ndarray:
    """Row sums ``sum_j |r_ij|`` without materialising the ``n x n`` matrix.

    Only upper-triangular block pairs are formed; each off-diagonal block
    feeds both its row and column block.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    mode = Mode.parse(mode)
    window = window_slice(dataset, t, spec)
    n = dataset.n
    if mode is Mode.RAW_MOMENT:
        z = window
        scale = 1.0 / (spec.k - 1)
        diag = np.einsum("ij,ij->j", window, window) * scale
    else:
        z, active = _standardize(window, variance_threshold)
        scale = None
        diag = active.astype(np.float64)
    g = np.zeros(n)
    starts = range(0, n, block_size)
    for i0 in starts:
        i1 = min(i0 + block_size, n)
        zi = z[:, i0:i1]
        for j0 in range(i0, n, block_size):
            j1 = min(j0 + block_size, n)
            blk = zi.T @ z[:, j0:j1]
            if mode is Mode.RAW_MOMENT:
                blk *= scale
            else:
                np.clip(blk, -1.0, 1.0, out=blk)
            np.abs(blk, out=blk)
            if j0 == i0:
                upper = np.triu(blk, 1)
                g[i0:i1] += upper.sum(axis=1) + upper.sum(axis=0) + np.abs(diag[i0:i1])
            else:
                g[i0:i1] += blk.sum(axis=1)
                g[j0:j1] += blk.sum(axis=0)
    return g
