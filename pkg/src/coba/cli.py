"""Command-line benchmark runner.

Configuration comes from an optional flat key=value text file plus
command-line overrides.  Subcommands:

  run    execute one configured run, writing CSV + JSON summary
  grid   sweep the (M, a) cross product and report the best cell
  plot   render SVG comparison charts from previously written run CSVs

The exit code is nonzero iff any enabled theory check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .bench import ConfigError, RunConfig, grid_search, parse_csv, run

_ALIASES = {
    "opt": "optimizer",
    "lambda": "hz_lambda",
    "theory": "theory_checks",
    "out": "out_dir",
}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key in ("problem", "optimizer", "schedule", "feasible", "out_dir"):
        return raw
    if key in ("T", "epochs", "seed", "dim", "k", "hidden", "accuracy_every"):
        return int(raw)
    if key == "theory_checks":
        return raw.lower() in ("1", "true", "yes", "on")
    return float(raw)


def load_config_file(path: str) -> dict:
    """Parse a flat key=value file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = (s.strip() for s in line.split("=", 1))
            key = _ALIASES.get(key, key)
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--opt", dest="optimizer")
    p.add_argument("--problem")
    p.add_argument("--T", type=int, dest="T")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--schedule", choices=("constant", "sqrt"))
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--M", type=float, dest="M")
    p.add_argument("--a", type=float, dest="a")
    p.add_argument("--lambda", type=float, dest="hz_lambda")
    p.add_argument("--feasible", choices=("box", "full", "ball"))
    p.add_argument("--box-bound", type=float, dest="box_bound")
    p.add_argument("--theory", action="store_true", dest="theory_checks",
                   default=None)
    p.add_argument("--out", dest="out_dir")


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values)


def _cmd_run(args) -> int:
    cfg = build_config(args)
    if cfg.out_dir is None:
        cfg = dataclasses.replace(cfg, out_dir=".")
    record = run(cfg)  # writes CSV + JSON since out_dir is set
    print(json.dumps(record.summary, indent=2, default=str))
    if record.summary.get("theory_checks") and not record.summary["theory_ok"]:
        return 1
    return 0


def _cmd_grid(args) -> int:
    base = build_config(args)
    M_grid = [float(v) for v in args.M_grid.split(",")]
    a_grid = [float(v) for v in args.a_grid.split(",")]
    best, table = grid_search(base, M_grid, a_grid, jobs=args.jobs)
    print(f"{'M':>12} {'a':>14} {'final_loss':>14}")
    for row in table:
        print(f"{row['M']:>12g} {row['a']:>14.8g} {row['final_loss']:>14.8g}")
    print(f"best: M={best.M:g} a={best.a:.8g}")
    return 0


def _cmd_plot(args) -> int:
    from .plots import emit_plots

    records = []
    for path in args.csv:
        with open(path) as fh:
            rec = parse_csv(fh.read())
        rec.summary["optimizer"] = os.path.basename(path).rsplit(".", 1)[0]
        records.append(rec)
    paths = emit_plots(records, args.out or ".")
    for p in paths:
        print(p)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="coba-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one benchmark run")
    _add_run_args(p_run)

    p_grid = sub.add_parser("grid", help="grid search over (M, a)")
    _add_run_args(p_grid)
    p_grid.add_argument("--M-grid", default="1e-2,1e-3,1e-4", dest="M_grid")
    p_grid.add_argument(
        "--a-grid",
        default="1.0001,1.00001,1.000001,1.0000001",
        dest="a_grid",
    )
    p_grid.add_argument("--jobs", type=int, default=1)

    p_plot = sub.add_parser("plot", help="render SVG charts from run CSVs")
    p_plot.add_argument("csv", nargs="+", help="run CSV files")
    p_plot.add_argument("--out", help="output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "grid":
            return _cmd_grid(args)
        return _cmd_plot(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
