"""Comparison reports and their JSON serialisation.

Floats are written with 17 significant digits so that a report parsed back
compares equal to the one written. Keys keep their insertion order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidReport, IoError

FORMAT_VERSION = 1


def _num(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        raise InvalidReport(f"non-finite number {v!r} cannot be serialised")
    return format(v, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with fixed-precision floats; scalar lists stay on one line."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq):
            return "[" + ", ".join(dumps(x, indent, _level + 1) for x in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(x, indent, _level + 1) for x in seq) + "\n" + end + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise InvalidReport(f"cannot serialise {type(obj).__name__}")


def _floats(seq):
    return [float(x) for x in seq]


@dataclass
class ComparisonReport:
    config: dict
    labels: tuple[str, str]
    times: list[int]
    g_total: dict[str, float]
    g_step: dict[str, list[float]]
    delta_total: float
    delta_step: list[float]
    inactive_counts: dict[str, list[int]] = field(default_factory=dict)
    tool_version: str = __version__
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "tool_version": self.tool_version,
            "config": self.config,
            "labels": list(self.labels),
            "g_total": {k: float(v) for k, v in self.g_total.items()},
            "delta_total": float(self.delta_total),
            "times": [int(t) for t in self.times],
            "g_step": {k: _floats(v) for k, v in self.g_step.items()},
            "delta_step": _floats(self.delta_step),
            "validation": {"inactive_counts": {k: [int(c) for c in v] for k, v in self.inactive_counts.items()}},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        try:
            return cls(
                config=d["config"],
                labels=tuple(d["labels"]),
                times=[int(t) for t in d["times"]],
                g_total={k: float(v) for k, v in d["g_total"].items()},
                g_step={k: _floats(v) for k, v in d["g_step"].items()},
                delta_total=float(d["delta_total"]),
                delta_step=_floats(d["delta_step"]),
                inactive_counts={
                    k: [int(c) for c in v] for k, v in d.get("validation", {}).get("inactive_counts", {}).items()
                },
                tool_version=d["tool_version"],
                format_version=int(d["format_version"]),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidReport(f"malformed report: {exc!r}") from None

    def check(self) -> None:
        if not self.times:
            raise InvalidReport("report has an empty per-step series")
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise InvalidReport(f"report needs two distinct labels, got {self.labels!r}")
        for label in self.labels:
            if len(self.g_step.get(label, ())) != len(self.times):
                raise InvalidReport(f"series {label!r} does not cover every reported step")
        if len(self.delta_step) != len(self.times):
            raise InvalidReport("delta series length differs from time axis")


def build_report(g_a, g_b, comparison, config: dict) -> ComparisonReport:
    labels = (g_a.label or "a", g_b.label or "b")
    counts = {}
    for label, s in zip(labels, (g_a, g_b)):
        if s.inactive_counts is not None:
            counts[label] = [int(c) for c in s.inactive_counts]
    return ComparisonReport(
        config=dict(config),
        labels=labels,
        times=[int(t) for t in comparison.times],
        g_total={labels[0]: float(g_a.g_total), labels[1]: float(g_b.g_total)},
        g_step={labels[0]: _floats(g_a.g_step), labels[1]: _floats(g_b.g_step)},
        delta_total=float(comparison.delta_total),
        delta_step=_floats(comparison.delta_step),
        inactive_counts=counts,
    )


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None


def write_report(report: ComparisonReport, path) -> None:
    report.check()
    _write_text(path, dumps(report.to_dict()))


def read_report(path) -> ComparisonReport:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidReport(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    report = ComparisonReport.from_dict(d)
    report.check()
    return report


def indicator_report(series, config: dict) -> dict:
    """Single-run counterpart of :class:`ComparisonReport`, as a plain dict."""
    if len(series.times) == 0:
        raise InvalidReport("indicator series is empty")
    d = {
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "config": dict(config),
        "label": series.label,
        "g_total": float(series.g_total),
        "times": [int(t) for t in series.times],
        "g_step": _floats(series.g_step),
    }
    if series.inactive_counts is not None:
        d["validation"] = {"inactive_counts": [int(c) for c in series.inactive_counts]}
    return d


def write_indicator_report(series, config: dict, path) -> None:
    _write_text(path, dumps(indicator_report(series, config)))
