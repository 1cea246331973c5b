"""Command-line front end.

Subcommands::

    hierlin table1  [--seed S] [--replicates M] [--methods a,b,...] [--lasso]
    hierlin turlach [--c-values 0,0.25,...] [--replicates M] [--n N]
    hierlin prop2   [--n-big N] [--p P] [--rho R]
    hierlin custom  --config FILE

Common flags: ``--threads`` (default ``$HIERLIN_THREADS`` or the CPU count),
``--output-dir``, ``--format csv|json``. Every run writes its result file and
a JSON manifest (configuration, seed, package versions, wall time) into the
output directory.

Exit status: 0 on success, 1 on a numerical failure, 2 on bad arguments or
an invalid config file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import time
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config, serialize_config, table1_config
from .criteria import CriterionKind
from .data_gen import turlach_spec
from .evaluation import METHODS, METRIC_COLUMNS, mains_only_fit, monte_carlo, prop2_check, turlach_curve

log = logging.getLogger("hierlin")

DEFAULT_METHODS = ("two_stage_fs", "iform", "oracle")
LASSO_METHODS = ("two_stage_lasso", "iform_lasso")


def default_threads():
    env = os.environ.get("HIERLIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring HIERLIN_THREADS=%r", env)
    return os.cpu_count() or 1


def format_table(reports):
    """Table-shaped CSV text; rates to 2 decimals, iCor0 to 4."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("method",) + METRIC_COLUMNS)
    for rep in reports:
        cells = [f"{v:.2f}" for v in rep.row()]
        cells[5] = f"{rep.icor0:.4f}"
        w.writerow([rep.method] + cells)
    return buf.getvalue()


def _versions():
    out = {"python": platform.python_version(), "hierlin": __version__, "numpy": np.__version__}
    for pkg in ("scipy", "scikit-learn", "threadpoolctl"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            pass
    return out


def _write_manifest(out_dir, name, argv, payload, started):
    manifest = {
        "command": name,
        "argv": list(argv),
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - started,
        **payload,
    }
    path = out_dir / f"{name}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    return path


def _run_reports(cfgs, threads):
    return [monte_carlo(cfg, threads=threads) for cfg in cfgs]


def _emit_reports(args, name, cfgs, reports, argv, started):
    out_dir = Path(args.output_dir)
    if args.format == "csv":
        text = format_table(reports)
    else:
        text = json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
    result_path = out_dir / f"{name}.{args.format}"
    result_path.write_text(text)
    _write_manifest(
        out_dir,
        name,
        argv,
        {
            "seed": cfgs[0].base_seed,
            "threads": args.threads,
            "result_file": result_path.name,
            "configs": {cfg.method: serialize_config(cfg) for cfg in cfgs},
            "reports": [r.to_dict() for r in reports],
        },
        started,
    )
    sys.stdout.write(format_table(reports))
    for r in reports:
        if r.failed:
            log.warning("%s: %d replicate(s) failed", r.method, r.failed)
        if r.hierarchy_violations:
            log.warning("%s: %d non-hierarchical selection(s)", r.method, r.hierarchy_violations)


def cmd_table1(args, argv, started):
    methods = list(DEFAULT_METHODS) if args.methods is None else _split(args.methods)
    if args.lasso:
        methods += [m for m in LASSO_METHODS if m not in methods]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError(f"unknown method(s): {', '.join(unknown)}", field="--methods")
    criterion = _criterion(args)
    cfgs = [table1_config(m, args.replicates, args.seed, criterion) for m in methods]
    _emit_reports(args, "table1", cfgs, _run_reports(cfgs, args.threads), argv, started)


def cmd_custom(args, argv, started):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.replicates is not None:
        cfg = replace(cfg, replicates=args.replicates)
    _emit_reports(args, "custom", [cfg], _run_reports([cfg], args.threads), argv, started)


def cmd_turlach(args, argv, started):
    c_values = [float(v) for v in _split(args.c_values)]
    criterion = _criterion(args)
    results = []
    freq = turlach_curve(c_values, args.replicates, args.n, criterion=criterion, base_seed=args.seed,
                         results=results)
    out_dir = Path(args.output_dir)
    rows = [{"c": c, "frequency": f} for c, f in freq.items()]
    if args.format == "csv":
        text = "c,frequency\n" + "".join(f"{c!r},{f:.4f}\n" for c, f in freq.items())
    else:
        text = json.dumps(rows, indent=2) + "\n"
    (out_dir / f"turlach.{args.format}").write_text(text)
    violations = sum(not r.is_hierarchical() for r in results)
    _write_manifest(
        out_dir,
        "turlach",
        argv,
        {"seed": args.seed, "n": args.n, "replicates": args.replicates, "criterion": criterion.label(),
         "frequencies": rows, "hierarchy_violations": violations},
        started,
    )
    sys.stdout.write(text)


def cmd_prop2(args, argv, started):
    dev = prop2_check(args.p, args.rho, n_big=args.n_big, seed=args.seed)
    turlach_beta1 = float(mains_only_fit(turlach_spec(), args.n_big, "uniform01", 0.0, args.seed)[0])
    line = (f"prop2 p={args.p} rho={args.rho:g} n_big={args.n_big} max_deviation={dev:.6f} "
            f"turlach_beta1_hat={turlach_beta1:.6f}\n")
    out_dir = Path(args.output_dir)
    payload = {"seed": args.seed, "p": args.p, "rho": args.rho, "n_big": args.n_big,
               "max_deviation": dev, "turlach_beta1_hat": turlach_beta1, "turlach_beta1": -1.0}
    if args.format == "json":
        (out_dir / "prop2.json").write_text(json.dumps(payload, indent=2) + "\n")
    else:
        (out_dir / "prop2.csv").write_text(
            "p,rho,n_big,max_deviation,turlach_beta1_hat\n"
            f"{args.p},{args.rho!r},{args.n_big},{dev!r},{turlach_beta1!r}\n")
    _write_manifest(out_dir, "prop2", argv, payload, started)
    sys.stdout.write(line)


def _criterion(args):
    try:
        return CriterionKind(args.criterion, args.gamma_e)
    except ValueError as exc:
        raise ConfigError(str(exc), field="--gamma-e") from None


def _split(s):
    return [v.strip() for v in s.split(",") if v.strip()]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: $HIERLIN_THREADS or CPU count)")
    common.add_argument("--output-dir", default=".", help="directory for results and manifest")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    crit = argparse.ArgumentParser(add_help=False)
    crit.add_argument("--criterion", choices=("bic", "ebic"), default="ebic")
    crit.add_argument("--gamma-e", type=float, default=CriterionKind.gamma_e)

    parser = argparse.ArgumentParser(prog="hierlin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common, crit], help="simulation table, n=200, p=1000")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--methods", default=None, help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--lasso", action="store_true", help="also run the LASSO variants")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("turlach", parents=[common, crit], help="stage-one selection frequency of X1")
    p.add_argument("--c-values", default="0,0.25,0.5,0.75,1")
    p.add_argument("--replicates", type=int, default=200)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_turlach)

    p = sub.add_parser("prop2", parents=[common], help="mains-only fit under a symmetric design")
    p.add_argument("--n-big", type=int, default=500_000)
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_prop2)

    p = sub.add_parser("custom", parents=[common], help="experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override base_seed")
    p.add_argument("--replicates", type=int, default=None)
    p.set_defaults(func=cmd_custom)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        args.threads = default_threads()
    if args.threads < 1:
        print("hierlin: --threads must be at least 1", file=sys.stderr)
        return 2
    out_dir = Path(args.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"hierlin: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    started = time.perf_counter()
    try:
        args.func(args, argv, started)
    except ConfigError as exc:
        print(f"hierlin: config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"hierlin: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"hierlin: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
