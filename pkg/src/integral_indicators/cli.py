"""Command-line interface.

Exit codes: 0 success, 1 internal error, 2 user or data error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .core import DEFAULT_K, Dataset, WindowSpec
from .correlation import DEFAULT_BLOCK_SIZE, DEFAULT_REINIT_INTERVAL, DEFAULT_VARIANCE_THRESHOLD, Mode
from .errors import IndicatorError, InvalidSpec
from .indicators import compare_strategies, indicator_series
from .ingest import (
    load_csv,
    load_strategy,
    load_synthetic_spec,
    validate,
    write_csv,
    write_series_csv,
    write_strategy,
    write_synthetic_spec,
)
from .report import build_report, write_indicator_report, write_report
from .scenario import RNG_NAME, SyntheticSpec, apply_strategy, generate_synthetic

EXIT_OK, EXIT_INTERNAL, EXIT_USER = 0, 1, 2


@dataclass
class RunConfig:
    k: int = DEFAULT_K
    mode: str = Mode.PEARSON.value
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD
    block_size: int = DEFAULT_BLOCK_SIZE
    reinit_interval: int = DEFAULT_REINIT_INTERVAL
    threads: int = 0  # 0 = auto
    seed: int | None = None
    fill_zero: bool = False
    no_rolling: bool = False
    out_dir: str = "."
    method_label: str = ""

    def check(self) -> None:
        try:
            self.mode = Mode.parse(self.mode).value
        except ValueError:
            raise InvalidSpec(f"mode must be pearson or raw-moment, got {self.mode!r}") from None
        for name in ("k", "block_size", "reinit_interval"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v <= 0:
                raise InvalidSpec(f"{name} must be a positive integer, got {v!r}")
        if self.k < 2:
            raise InvalidSpec(f"k must be >= 2, got {self.k}")
        if not self.variance_threshold > 0:
            raise InvalidSpec(f"variance_threshold must be positive, got {self.variance_threshold!r}")
        if self.threads < 0:
            raise InvalidSpec("threads must be positive (or 0 for auto)")

    @property
    def effective_threads(self) -> int:
        return self.threads or os.cpu_count() or 1

    @property
    def method(self) -> str:
        return "blocked" if self.no_rolling else "rolling"

    def series_kwargs(self) -> dict:
        return {
            "method": self.method,
            "block_size": self.block_size,
            "variance_threshold": self.variance_threshold,
            "reinit_interval": self.reinit_interval,
            "threads": self.effective_threads,
        }

    def echo(self) -> dict:
        d = {
            "k": self.k,
            "mode": self.mode,
            "method": self.method,
            "variance_threshold": self.variance_threshold,
            "block_size": self.block_size,
            "reinit_interval": self.reinit_interval,
            "fill_zero": self.fill_zero,
            "rng": RNG_NAME,
        }
        if self.seed is not None:
            d["seeds"] = [self.seed]
        if self.method_label:
            d["method_label"] = self.method_label
        return d


def _config_from_args(args) -> RunConfig:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InvalidSpec(f"cannot read config {args.config}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"{args.config}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(cfg, dict):
            raise InvalidSpec("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        cfg = {key.replace("-", "_"): v for key, v in cfg.items()}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise InvalidSpec(f"unknown config keys {unknown}")
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and v is not False:
            cfg[f.name] = v
    rc = RunConfig(**cfg)
    rc.check()
    return rc


def _out(cfg: RunConfig, name: str) -> Path:
    d = Path(cfg.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def cmd_validate(args, cfg: RunConfig) -> int:
    try:
        ds = load_csv(args.data, args.meta, cfg.fill_zero)
    except IndicatorError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return EXIT_USER
    summary = validate(ds, WindowSpec(cfg.k), cfg.variance_threshold)
    print(summary.to_text())
    return EXIT_OK if summary.ok else EXIT_USER


def cmd_compute(args, cfg: RunConfig) -> int:
    ds = load_csv(args.data, args.meta, cfg.fill_zero)
    series = indicator_series(ds, WindowSpec(cfg.k), cfg.mode, label=args.label, **cfg.series_kwargs())
    write_indicator_report(series, cfg.echo(), _out(cfg, "indicators.json"))
    write_series_csv(series, _out(cfg, "series.csv"))
    print(f"g_total = {series.g_total:.17g}")
    print(f"steps t={series.t_range[0]}..{series.t_range[1]}, n={ds.n}, k={cfg.k}, mode={cfg.mode}")
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    base = load_csv(args.base, args.base_meta, cfg.fill_zero)
    if args.strategy is not None:
        strategy = load_strategy(args.strategy)
        other = apply_strategy(base, strategy)
        label = args.strategy_label or strategy.id
    else:
        other = load_csv(args.strategy_data, args.strategy_meta, cfg.fill_zero)
        label = args.strategy_label or Path(args.strategy_data).stem
    if label == args.base_label:
        label = f"{label}-strategy"
    spec = WindowSpec(cfg.k)
    g_a = indicator_series(base, spec, cfg.mode, label=args.base_label, **cfg.series_kwargs())
    g_b = indicator_series(other, spec, cfg.mode, label=label, **cfg.series_kwargs())
    result = compare_strategies(g_a, g_b)
    report = build_report(g_a, g_b, result, cfg.echo())
    write_report(report, _out(cfg, "report.json"))
    write_series_csv([g_a, g_b], _out(cfg, "series.csv"))
    print(f"G[{g_a.label}] = {g_a.g_total:.17g}")
    print(f"G[{g_b.label}] = {g_b.g_total:.17g}")
    print(f"delta_total = {result.delta_total:.17g}")
    return EXIT_OK


def cmd_generate(args, cfg: RunConfig) -> int:
    if args.spec:
        spec = load_synthetic_spec(args.spec, seed=cfg.seed)
    else:
        spec = SyntheticSpec(**({"seed": cfg.seed} if cfg.seed is not None else {}))
        spec.check()
    base, strategy = generate_synthetic(spec)
    write_csv(base, _out(cfg, "base.csv"))
    write_strategy(strategy, _out(cfg, "strategy.json"))
    write_csv(apply_strategy(base, strategy), _out(cfg, "strategy_data.csv"))
    write_synthetic_spec(spec, _out(cfg, "synthetic_spec.json"))
    print(f"generated n_base={spec.n_base} t_max={spec.t_max} seed={spec.seed} rng={RNG_NAME}")
    print(f"wrote base.csv, strategy.json, strategy_data.csv to {cfg.out_dir}")
    return EXIT_OK


def bench_sizes(sizes, t_max: int, k: int, seed: int = 0, repeats: int = 1, mode=Mode.PEARSON):
    """Time rolling vs per-step batch recomputation; one dict per size."""
    spec = WindowSpec(k)
    rng = np.random.Generator(np.random.PCG64(seed))
    # compile kernels outside the timed region
    indicator_series(Dataset(rng.standard_normal((k + 3, 3))), spec, mode)
    rows = []
    for n in sizes:
        ds = Dataset(rng.standard_normal((t_max, n)))
        steps = t_max - k
        timings = {}
        for method in ("rolling", "batch"):
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                indicator_series(ds, spec, mode, method=method)
                best = min(best, time.perf_counter() - t0)
            timings[method] = best
        speedup = timings["batch"] / timings["rolling"]
        check = "ok" if n < 100 or timings["rolling"] <= timings["batch"] else "FAIL"
        rows.append({
            "n": n, "t_max": t_max, "k": k, "steps": steps,
            "rolling_s": timings["rolling"], "naive_s": timings["batch"],
            "rolling_ms_per_step": 1e3 * timings["rolling"] / steps,
            "naive_ms_per_step": 1e3 * timings["batch"] / steps,
            "speedup": speedup, "check": check,
        })
    return rows


BENCH_COLUMNS = ("n", "t_max", "k", "steps", "rolling_s", "naive_s",
                 "rolling_ms_per_step", "naive_ms_per_step", "speedup", "check")


def cmd_bench(args, cfg: RunConfig) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise InvalidSpec(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    if not sizes or min(sizes) < 1:
        raise InvalidSpec("--sizes needs at least one positive size")
    if args.t_max < cfg.k + 1:
        raise InvalidSpec(f"--t-max must be >= k+1 = {cfg.k + 1}")
    rows = bench_sizes(sizes, args.t_max, cfg.k, cfg.seed or 0, args.repeats, Mode.parse(cfg.mode))
    header = f"{'n':>7} {'rolling ms/step':>16} {'naive ms/step':>14} {'speedup':>8}  check"
    print(header)
    for r in rows:
        print(f"{r['n']:>7} {r['rolling_ms_per_step']:>16.3f} {r['naive_ms_per_step']:>14.3f} {r['speedup']:>8.2f}  {r['check']}")
    lines = [
        f"# format_version=1 tool_version={__version__} platform={platform.platform()} "
        f"cpu_count={os.cpu_count()} (timings and speedup thresholds are hardware-dependent)",
        f"# config={json.dumps(cfg.echo(), sort_keys=True)}",
        ",".join(BENCH_COLUMNS),
    ]
    for r in rows:
        lines.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in BENCH_COLUMNS))
    _out(cfg, "bench.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    failed = [r["n"] for r in rows if r["check"] != "ok"]
    if failed:
        print(f"rolling path slower than naive recomputation at n={failed}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (flags override --config)")
    g.add_argument("--config", help="JSON file with run configuration keys")
    g.add_argument("--k", type=int, help=f"window length (default {DEFAULT_K})")
    g.add_argument("--mode", choices=[m.value for m in Mode], help="correlation mode (default pearson)")
    g.add_argument("--variance-threshold", type=float, help="inactive-column variance threshold (default 1e-12)")
    g.add_argument("--block-size", type=int, help="tile size for --no-rolling evaluation (default 64)")
    g.add_argument("--reinit-interval", type=int, help="rolling rebuild period in steps (default 256)")
    g.add_argument("--threads", type=int, help="worker threads for recomputing paths (default: all cores)")
    g.add_argument("--seed", type=int, help="RNG seed (generate, bench)")
    g.add_argument("--fill-zero", action="store_true", default=None, help="read blank cells as 0")
    g.add_argument("--no-rolling", action="store_true", default=None,
                   help="recompute every window (blocked, matrix-free) instead of rolling moments")
    g.add_argument("--out-dir", help="directory for output files (default .)")
    g.add_argument("--method-label", help="free-text label of the control method, echoed in reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="integral-indicators", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check that a dataset can be analysed")
    p.add_argument("--data", required=True)
    p.add_argument("--meta", help="metadata sidecar (default <data stem>.meta.json)")
    _common(p)

    p = sub.add_parser("compute", help="indicator series and system state for one dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--meta")
    p.add_argument("--label", default="base")
    _common(p)

    p = sub.add_parser("compare", help="compare a base dataset with a strategy")
    p.add_argument("--base", required=True)
    p.add_argument("--base-meta")
    p.add_argument("--base-label", default="base")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--strategy", help="strategy definition JSON applied to the base dataset")
    src.add_argument("--strategy-data", help="strategy dataset CSV")
    p.add_argument("--strategy-meta")
    p.add_argument("--strategy-label")
    _common(p)

    p = sub.add_parser("generate", help="write a synthetic base dataset and coupled strategy")
    p.add_argument("--spec", help="synthetic spec JSON (defaults used when omitted)")
    _common(p)

    p = sub.add_parser("bench", help="time rolling vs naive per-step recomputation")
    p.add_argument("--sizes", default="100,1000", help="comma-separated parameter counts")
    p.add_argument("--t-max", type=int, default=60)
    p.add_argument("--repeats", type=int, default=1)
    _common(p)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "compute": cmd_compute,
    "compare": cmd_compare,
    "generate": cmd_generate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except IndicatorError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
