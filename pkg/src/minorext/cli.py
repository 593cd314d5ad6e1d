"""Command-line driver: ``minorext {scan,mc,wigner,src,netcheck,moddev}``.

Exit codes: 0 success, 2 input error, 3 budget error, 4 internal invariant
violation.  The resolved configuration of every run goes to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .distributions import SeedSpec
from .errors import (BudgetError, CombinatorialExplosionError, ConstructionError, MinorExtError,
                     NonConvergenceError, ParameterError)
from .harness import ExperimentConfig, fmt_float, records_to_csv
from .matgen import DataMatrix, SymMatrix, gram, mirror_upper, read_matrix
from .minor_scan import EXHAUSTIVE, PRUNED, scan
from .statistics import src_certificate
from .theory_checks import build_eps_net, moddev_check, net_check, random_symmetric

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INTERNAL = 0, 2, 3, 4
SYM_TOL = 1e-12
MATRIX_STREAM = 1 << 32  # netcheck matrices; net construction uses low stream ids


def default_workers() -> int:
    env = os.environ.get("MINOREXT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _emit_config(name, **cfg):
    print(f"[{name}] " + " ".join(f"{k}={v}" for k, v in cfg.items()), file=sys.stderr)


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def _print_dataclass_rows(rows):
    names = [f.name for f in dataclasses.fields(rows[0])]
    print(",".join(names))
    for r in rows:
        print(",".join(_fmt(getattr(r, k)) for k in names))


def _mode(text):
    try:
        return {"exact": EXHAUSTIVE, "exhaustive": EXHAUSTIVE, "pruned": PRUNED}[text]
    except KeyError:
        raise ValueError(text) from None


# --- subcommands -------------------------------------------------------------

def _interpret(a: np.ndarray, as_gram):
    """Return the symmetric matrix to scan and a label for how ``a`` was read."""
    square = a.shape[0] == a.shape[1]
    sym = square and np.max(np.abs(a - a.T), initial=0.0) <= SYM_TOL * max(1.0, np.max(np.abs(a)))
    if as_gram is None:
        as_gram = not sym
    if as_gram:
        return gram(DataMatrix(a)), "X"
    if not sym:
        raise ParameterError("--no-gram needs a square symmetric matrix")
    return SymMatrix(mirror_upper(a)), "W"


def cmd_scan(args):
    a = read_matrix(args.input)
    W, read_as = _interpret(a, args.gram)
    _emit_config("scan", input=args.input, read_as=read_as, p=W.dim, m=args.m, le_m=args.le_m,
                 mode=args.mode, workers=args.workers, budget=args.budget)
    res = scan(W, args.m, le_m=args.le_m, mode=args.mode, workers=args.workers, budget=args.budget)
    print(res.csv_line())
    print(f"T={res.T:.10g} at {list(res.argmax_set)}; V={res.V:.10g} at {list(res.argmin_set)}; "
          f"{res.subsets_visited} minors solved, {res.subsets_pruned} pruned", file=sys.stderr)
    return EXIT_OK


def _write_records(records, cfg, out, timing):
    text = records_to_csv(records, cfg, timing=timing)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _run_and_write(cfg, args, name):
    _emit_config(name, **cfg.resolved(), out=args.out or "-", timing=args.timing)
    try:
        records, summary = harness.run_experiment(cfg)
    except harness.ReplicationError as exc:
        _write_records(exc.records, cfg, args.out, args.timing)
        raise exc.__cause__ from exc
    _write_records(records, cfg, args.out, args.timing)
    if summary.get("empty"):
        print(f"[{name}] no replications", file=sys.stderr)
    else:
        print(f"[{name}] coverage T={summary['frac_T']:.3f} V={summary['frac_V']:.3f} "
              f"joint={summary['frac_joint']:.3f} (slack {summary['slack']})"
              + (" [outside asymptotic regime]" if summary["outside_asymptotic_regime"] else ""),
              file=sys.stderr)
    return EXIT_OK


def cmd_mc(args):
    text = Path(args.config).read_text()
    cfg = harness.parse_config(text, workers=args.workers)
    if args.workers is None and "workers" not in cfg.given:
        cfg = dataclasses.replace(cfg, workers=default_workers())
    return _run_and_write(cfg, args, "mc")


def cmd_wigner(args):
    cfg = ExperimentConfig(ensemble=harness.WIGNER, dist=None, eta=args.eta, p=args.p, m=args.m,
                           le_m=args.le_m, reps=args.reps, master_seed=args.seed,
                           workers=args.workers, scan_mode=args.mode, slack=args.slack)
    return _run_and_write(cfg, args, "wigner")


def cmd_src(args):
    x = DataMatrix(read_matrix(args.input))
    n = args.n_override if args.n_override is not None else x.n
    _emit_config("src", input=args.input, n=n, p=x.p, m=args.m, mode=args.mode,
                 workers=args.workers)
    cert = src_certificate(x, args.m, mode=args.mode, workers=args.workers, n=n, budget=args.budget)
    print(",".join([fmt_float(cert.c1), fmt_float(cert.c2), str(cert.m), str(n), str(x.p)]))
    return EXIT_OK


def cmd_netcheck(args):
    _emit_config("netcheck", m=args.m, eps=args.eps, trials=args.trials, seed=args.seed)
    net = build_eps_net(args.m, args.eps, seed=args.seed)
    rng = SeedSpec(args.seed, MATRIX_STREAM).generator()
    reports = [net_check(random_symmetric(args.m, rng), args.eps, net) for _ in range(args.trials)]
    if reports:
        _print_dataclass_rows(reports)
    failed = sum(not r.holds for r in reports)
    print(f"[netcheck] net_size={len(net)} holds on {len(reports) - failed}/{len(reports)}",
          file=sys.stderr)
    return EXIT_INTERNAL if failed else EXIT_OK


def cmd_moddev(args):
    _emit_config("moddev", n=args.n, exp=args.exp, mu=args.mu, reps=args.reps, seed=args.seed,
                 direct=args.direct)
    report = moddev_check(args.n, args.exp, args.mu, args.reps, seed=args.seed, direct=args.direct,
                          workers=args.workers)
    _print_dataclass_rows([report])
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minorext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    workers = dict(type=int, default=None, help="worker threads (default: $MINOREXT_THREADS or CPU count)")
    mode = dict(type=_mode, default=EXHAUSTIVE, choices=[EXHAUSTIVE, PRUNED],
                help="exact (exhaustive) or pruned scan")

    p = sub.add_parser("scan", help="extreme eigenvalues over principal minors of a matrix file")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--le-m", action="store_true", help="scan all sizes 1..m")
    p.add_argument("--mode", **mode)
    p.add_argument("--workers", **workers)
    p.add_argument("--budget", type=int, default=None, help="refuse scans with more subsets")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gram", dest="gram", action="store_true", default=None,
                   help="treat input as the data matrix X and scan X^T X")
    g.add_argument("--no-gram", dest="gram", action="store_false", help="treat input as W")
    p.set_defaults(func=cmd_scan)

    for name, fn, help_ in (("mc", cmd_mc, "Monte Carlo run from a config file"),
                            ("wigner", cmd_wigner, "Monte Carlo run on Wigner matrices")):
        p = sub.add_parser(name, help=help_)
        if name == "mc":
            p.add_argument("--config", required=True)
        else:
            p.add_argument("--p", type=int, required=True)
            p.add_argument("--m", type=int, required=True)
            p.add_argument("--eta", type=float, required=True)
            p.add_argument("--reps", type=int, required=True)
            p.add_argument("--seed", type=int, required=True)
            p.add_argument("--le-m", action="store_true")
            p.add_argument("--slack", type=float, default=harness.DEFAULT_SLACK)
            p.add_argument("--mode", **mode)
        p.add_argument("--out", default=None, help="CSV path (default stdout)")
        p.add_argument("--workers", **workers)
        p.add_argument("--timing", action="store_true", help="fill the wall_time_s column")
        p.set_defaults(func=fn)

    p = sub.add_parser("src", help="sparse Riesz condition constants of a design matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n-override", type=int, default=None)
    p.add_argument("--mode", **mode)
    p.add_argument("--workers", **workers)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_src)

    p = sub.add_parser("netcheck", help="epsilon-net spectral norm bound on random matrices")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_netcheck)

    p = sub.add_parser("moddev", help="moderate deviation tail rate estimate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--exp", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--direct", action="store_true", help="sum explicit normals")
    p.add_argument("--workers", **workers)
    p.set_defaults(func=cmd_moddev)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 0) is None and args.command != "mc":
        args.workers = default_workers()
    try:
        return args.func(args)
    except (CombinatorialExplosionError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NonConvergenceError, ConstructionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (MinorExtError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
