"""Dataset, metadata, strategy and plot-series files; dataset validation.

Dataset CSV::

    # format_version=1
    t,rev_01,cost_02
    1,1500.25,-20.0
    2,1510.0,-18.5

The first column is ``t`` with consecutive integers from 1; every other
column is a parameter id. Numbers use a decimal point and no thousands
separators. Optional ``#`` comment lines may precede the header.

Metadata sidecar (JSON, default ``<csv stem>.meta.json``)::

    {"format_version": 1,
     "parameters": {"rev_01": {"name": "Revenue", "space": "actual", "units": "RUB"}}}
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Dataset, ParameterMeta, Space, WindowSpec
from .correlation import DEFAULT_VARIANCE_THRESHOLD
from .errors import EmptyData, InvalidSpec, IoError, ParseError, RangeMismatch, SchemaError
from .report import FORMAT_VERSION, dumps
from .scenario import Strategy, SyntheticSpec

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def default_meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise SchemaError("file not found", path=path) from None
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None


def _load_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, row=exc.lineno) from None


def read_meta(path) -> dict[str, ParameterMeta]:
    doc = _load_json(path)
    params = doc.get("parameters") if isinstance(doc, dict) else None
    if not isinstance(params, dict):
        raise SchemaError('sidecar must be an object with a "parameters" mapping', path=path)
    out = {}
    for pid, entry in params.items():
        if not isinstance(entry, dict):
            raise SchemaError("parameter entry must be an object", path=path, column=pid)
        out[pid] = ParameterMeta(
            id=pid,
            name=str(entry.get("name", pid)),
            space=Space.parse(entry.get("space", "actual")),
            units=str(entry.get("units", "")),
        )
    return out


def write_meta(meta, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "parameters": {m.id: {"name": m.name, "space": m.space.value, "units": m.units} for m in meta},
    }
    _write_text(path, dumps(doc) + "\n")


def _parse_number(cell: str, path, row, column, fill_zero: bool) -> float:
    cell = cell.strip()
    if not cell:
        if fill_zero:
            return 0.0
        raise ParseError("blank cell (use --fill-zero to read blanks as 0)", path, row, column)
    if not _NUMBER.match(cell):
        raise ParseError(f"malformed number {cell!r}", path, row, column)
    return float(cell)


def load_csv(path, meta_path=None, fill_zero: bool = False) -> Dataset:
    """Read a dataset CSV and its metadata sidecar."""
    text = _read_text(path)
    lines = text.splitlines()
    first = 0
    while first < len(lines) and (lines[first].startswith("#") or not lines[first].strip()):
        first += 1
    if first == len(lines):
        raise EmptyData(f"{path}: no header row")
    reader = csv.reader(lines[first:])
    header = [h.strip() for h in next(reader)]
    if not header or header[0] != "t":
        raise SchemaError("first column must be named 't'", path, row=first + 1, column=header[0] if header else None)
    ids = header[1:]
    if not ids:
        raise SchemaError("no parameter columns", path, row=first + 1)
    for j, pid in enumerate(ids):
        if not pid:
            raise SchemaError("empty parameter id", path, row=first + 1, column=j + 2)
    if len(set(ids)) != len(ids):
        dupes = sorted({p for p in ids if ids.count(p) > 1})
        raise SchemaError(f"duplicate parameter ids {dupes}", path, row=first + 1)

    rows = []
    for offset, cells in enumerate(reader):
        lineno = first + 2 + offset
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(cells)}", path, row=lineno)
        try:
            t = int(cells[0])
        except ValueError:
            raise ParseError(f"time index {cells[0]!r} is not an integer", path, lineno, "t") from None
        if t != len(rows) + 1:
            raise SchemaError(f"time index {t} breaks the sequence (expected {len(rows) + 1})", path, lineno, "t")
        rows.append([_parse_number(c, path, lineno, pid, fill_zero) for c, pid in zip(cells[1:], ids)])
    if not rows:
        raise EmptyData(f"{path}: no data rows")
    values = np.array(rows, dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ParseError("value overflows to infinity", path, row=first + 2 + int(r), column=ids[c])

    meta_path = default_meta_path(path) if meta_path is None else meta_path
    meta = read_meta(meta_path)
    if set(meta) != set(ids):
        missing = sorted(set(ids) - set(meta))
        extra = sorted(set(meta) - set(ids))
        raise SchemaError(
            f"ids differ between data and sidecar: missing from sidecar {missing}, missing from data {extra}",
            path=meta_path,
        )
    return Dataset(values, tuple(meta[pid] for pid in ids))


def write_csv(dataset: Dataset, path, meta_path=None) -> None:
    """Write ``dataset`` so that :func:`load_csv` restores it bit for bit."""
    out = [f"# format_version={FORMAT_VERSION}", ",".join(["t"] + dataset.ids)]
    for t, row in enumerate(dataset.values, start=1):
        out.append(",".join([str(t)] + [repr(float(v)) for v in row]))
    _write_text(path, "\n".join(out) + "\n")
    write_meta(dataset.meta, default_meta_path(path) if meta_path is None else meta_path)


def _series_items(series):
    if isinstance(series, dict):
        return list(series.items())
    if not isinstance(series, (list, tuple)):
        series = [series]
    return [(s.label or f"s{i + 1}", s) for i, s in enumerate(series)]


def write_series_csv(series, path) -> None:
    """Per-step totals ``G(t)`` as ``t,G_<label>...`` columns.

    ``series`` is one IndicatorSeries, a sequence of them (labels taken from
    ``.label``) or a ``{label: series}`` mapping.
    """
    items = _series_items(series)
    times = items[0][1].times
    for label, s in items[1:]:
        if not np.array_equal(s.times, times):
            raise RangeMismatch(f"series {label!r} covers {s.t_range}, expected {items[0][1].t_range}")
    out = [f"# format_version={FORMAT_VERSION}", ",".join(["t"] + [f"G_{label}" for label, _ in items])]
    for i, t in enumerate(times):
        out.append(",".join([str(int(t))] + [repr(float(s.g_step[i])) for _, s in items]))
    _write_text(path, "\n".join(out) + "\n")


def read_series_csv(path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    lines = [ln for ln in _read_text(path).splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise EmptyData(f"{path}: empty series file")
    header = lines[0].split(",")
    if header[0] != "t" or not all(h.startswith("G_") for h in header[1:]):
        raise SchemaError("series header must be t,G_<label>...", path, row=1)
    data = [ln.split(",") for ln in lines[1:]]
    times = np.array([int(r[0]) for r in data], dtype=np.int64)
    cols = {h[2:]: np.array([float(r[j + 1]) for r in data]) for j, h in enumerate(header[1:])}
    return times, cols


def load_strategy(path) -> Strategy:
    """Strategy definition file.

    ``{"format_version": 1, "id": "...", "added_parameters": [{"id", "name",
    "space", "units", "values": [...]}], "overrides": [{"id", "t", "value"}],
    "scale_factors": [{"id", "factor"}]}``
    """
    doc = _load_json(path)
    try:
        added = [
            (
                ParameterMeta(a["id"], a.get("name", a["id"]), Space.parse(a.get("space", "control")), a.get("units", "")),
                np.array([float(v) for v in a["values"]]),
            )
            for a in doc.get("added_parameters", [])
        ]
        overrides = [(o["id"], int(o["t"]), float(o["value"])) for o in doc.get("overrides", [])]
        scales = [(s["id"], float(s["factor"])) for s in doc.get("scale_factors", [])]
        return Strategy(str(doc["id"]), added, overrides, scales)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed strategy definition: {exc!r}", path=path) from None


def write_strategy(strategy: Strategy, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "id": strategy.id,
        "added_parameters": [
            {"id": m.id, "name": m.name, "space": m.space.value, "units": m.units, "values": [float(v) for v in vals]}
            for m, vals in strategy.added_parameters
        ],
        "overrides": [{"id": pid, "t": int(t), "value": float(v)} for pid, t, v in strategy.overrides],
        "scale_factors": [{"id": pid, "factor": float(f)} for pid, f in strategy.scale_factors],
    }
    _write_text(path, dumps(doc) + "\n")


_SPEC_FIELDS = ("n_base", "t_max", "seed", "base_correlation", "coupled_count", "coupling", "mix_width")


def load_synthetic_spec(path, **overrides) -> SyntheticSpec:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise InvalidSpec(f"{path}: synthetic spec must be a JSON object")
    unknown = sorted(set(doc) - set(_SPEC_FIELDS) - {"format_version"})
    if unknown:
        raise InvalidSpec(f"{path}: unknown fields {unknown}")
    fields = {k: doc[k] for k in _SPEC_FIELDS if k in doc}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    spec = SyntheticSpec(**fields)
    spec.check()
    return spec


def write_synthetic_spec(spec: SyntheticSpec, path) -> None:
    doc = {"format_version": FORMAT_VERSION}
    doc.update({k: getattr(spec, k) for k in _SPEC_FIELDS})
    _write_text(path, dumps(doc) + "\n")


@dataclass
class ValidationSummary:
    """Diagnostics for a dataset under a window length. Never raises."""

    t_max: int
    n: int
    k: int
    feasible: bool
    activity: dict[str, float] = field(default_factory=dict)
    duplicate_pairs: list[tuple[str, str]] = field(default_factory=list)
    value_min: float = float("nan")
    value_max: float = float("nan")
    findings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.feasible

    @property
    def never_active(self) -> list[str]:
        return [pid for pid, frac in self.activity.items() if frac == 0.0]

    def to_text(self) -> str:
        lines = [
            f"t_max={self.t_max} n={self.n} k={self.k} feasible={'yes' if self.feasible else 'no'}",
            f"value range [{self.value_min:.6g}, {self.value_max:.6g}]",
        ]
        if self.activity:
            fr = np.array(list(self.activity.values()))
            lines.append(f"column activity: min {fr.min():.0%}, mean {fr.mean():.0%}")
        lines += [f"finding: {f}" for f in self.findings]
        return "\n".join(lines)


def validate(
    dataset: Dataset, spec: WindowSpec, variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD
) -> ValidationSummary:
    v = dataset.values
    k = spec.k
    feasible = dataset.t_max >= k + 1
    s = ValidationSummary(
        t_max=dataset.t_max, n=dataset.n, k=k, feasible=feasible,
        value_min=float(v.min()), value_max=float(v.max()),
    )
    if not feasible:
        s.findings.append(f"InsufficientData: t_max={dataset.t_max} < k+1={k + 1}")
    else:
        # windows for t = k+1..t_max are rows [t-k-1, t-1) -> the first t_max-k sliding windows
        windows = np.lib.stride_tricks.sliding_window_view(v[:-1], k, axis=0)
        active = windows.var(axis=-1, ddof=1) >= variance_threshold
        frac = active.mean(axis=0)
        s.activity = {pid: float(f) for pid, f in zip(dataset.ids, frac)}
        for pid in s.never_active:
            s.findings.append(f"column {pid!r} is never active (0% of windows)")

    groups: dict[bytes, list[int]] = {}
    for j in range(dataset.n):
        groups.setdefault(v[:, j].tobytes(), []).append(j)
    ids = dataset.ids
    for members in groups.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                s.duplicate_pairs.append((ids[members[a]], ids[members[b]]))
    s.duplicate_pairs.sort()
    for a, b in s.duplicate_pairs:
        s.findings.append(f"columns {a!r} and {b!r} are identical")
    return s
