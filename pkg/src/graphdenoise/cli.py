"""Command-line front end.

Three subcommands: ``denoise`` flags bridges in a graph file,
``swissroll`` runs the pruning-error study, ``tomo`` runs the
blind-angle reconstruction pipeline.  Exit codes: 0 success, 1
numerical failure, 2 input error.  Every output file is written to a
temporary name and renamed into place, so readers never observe a
partial file.
"""

import argparse
import math
import os
import sys
import tempfile
import time

import numpy as np

from .errors import (
    ConvergenceFailureError,
    InsufficientDataError,
    InvalidGraphError,
    InvalidParameterError,
    SingularMatrixError,
    UndefinedSimilarityError,
)
from .graph import read_graph
from .rules import run_rule, write_bridge_set
from .swissroll import BenchmarkConfig, run_benchmark
from . import tomography as tomo


def _epsilon_arg(text):
    if text == "inf":
        return math.inf
    if text == "median-half":
        return None
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "epsilon must be a number, 'inf', or 'median-half'"
        )
    if not val > 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return val


def _atomic_write(path, writer):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parser():
    top = argparse.ArgumentParser(
        prog="graphdenoise",
        description="bridge detection and geodesic repair on neighbor graphs",
    )
    sub = top.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="flag bridge edges in a graph file")
    d.add_argument("graph", help="edge-list file: 'n m' header then 'i j d' lines")
    d.add_argument("--rule", required=True, choices=["ldr", "jdr", "ecdr", "npdr"])
    d.add_argument("--q", type=float, default=0.95)
    d.add_argument("--p", type=float, default=0.01)
    d.add_argument("--epsilon", type=_epsilon_arg, default=None)
    d.add_argument("--K", type=int, default=15)
    d.add_argument("--J", type=int, default=None)
    d.add_argument("--out", default=".")
    d.set_defaults(func=_cmd_denoise)

    s = sub.add_parser("swissroll", help="noisy-surface pruning-error study")
    s.add_argument("--mu", type=float, action="append", default=None)
    s.add_argument("--rule", choices=["sp", "ldr", "jdr", "ecdr", "npdr"], default=None)
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--p", type=float, default=0.01)
    s.add_argument("--epsilon", type=_epsilon_arg, default=None)
    s.add_argument("--K", type=int, default=15)
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--delta", type=float, default=4.0)
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--envelopes", action="store_true")
    s.add_argument(
        "--table",
        action="store_true",
        help="also write mean errors as a mu-by-estimator text table",
    )
    s.add_argument("--out", default=".")
    s.set_defaults(func=_cmd_swissroll)

    t = sub.add_parser("tomo", help="blind-angle tomography pipeline")
    t.add_argument("--side", type=int, default=128)
    t.add_argument("--n", type=int, default=256)
    t.add_argument("--r", type=int, default=128)
    t.add_argument("--k", type=int, default=32)
    t.add_argument("--snr-db", type=float, default=-2.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--rule", choices=["none", "jdr", "npdr"], default=None)
    t.add_argument("--q", type=float, default=None)
    t.add_argument("--p", type=float, default=0.01)
    t.add_argument("--epsilon", type=_epsilon_arg, default=math.inf)
    t.add_argument("--out", default=".")
    t.set_defaults(func=_cmd_tomo)
    return top


def _cmd_denoise(args):
    started = time.perf_counter()
    graph = read_graph(args.graph)
    bridges = run_rule(
        graph,
        args.rule,
        args.q,
        K=args.K,
        p=args.p,
        epsilon=args.epsilon,
        J=args.J,
        mode="auto",
    )
    os.makedirs(args.out, exist_ok=True)
    dest = os.path.join(args.out, "bridges_%s.txt" % args.rule)
    extra = {"p": args.p, "K": args.K} if args.rule in ("npdr", "ecdr") else None
    _atomic_write(dest, lambda p: write_bridge_set(p, bridges, extra))
    print(
        "nodes=%d edges=%d rule=%s q=%g bridges=%d out=%s elapsed=%.2fs"
        % (
            graph.n,
            graph.m,
            args.rule,
            args.q,
            len(bridges),
            dest,
            time.perf_counter() - started,
        )
    )
    return 0


def _default_estimators(rule, q):
    if rule is None:
        return BenchmarkConfig().estimators
    if rule == "sp":
        return (("sp", None),)
    qs = [q] if q is not None else [0.92, 0.95, 0.99]
    return (("sp", None),) + tuple((rule, qq) for qq in qs)


def _write_error_table(path, report):
    """Mean error per noise level, one column per estimator."""
    agg = {(r["mu"], r["rule"], r["q"]): r["mean_err_mean"] for r in report.aggregate()}
    cols = list(report.config.estimators)
    labels = ["SP" if r == "sp" else "%s,q=%.2f" % (r.upper(), q) for r, q in cols]
    with open(path, "w") as fh:
        fh.write("%-8s" % "mu" + "".join("%12s" % lab for lab in labels) + "\n")
        for mu in report.config.mu_values:
            cells = []
            for rule, q in cols:
                val = agg.get((mu, rule, q))
                cells.append("%12s" % ("-" if val is None else "%.2f" % val))
            fh.write("%-8g" % mu + "".join(cells) + "\n")


def _cmd_swissroll(args):
    started = time.perf_counter()
    cfg = BenchmarkConfig(
        mu_values=tuple(args.mu) if args.mu else BenchmarkConfig().mu_values,
        estimators=_default_estimators(args.rule, args.q),
        trials=args.trials,
        seed=args.seed,
        n=args.n,
        delta=args.delta,
        K=args.K,
        p=args.p,
        epsilon=args.epsilon,
        collect_envelopes=args.envelopes,
    )
    report = run_benchmark(cfg)
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(
        os.path.join(args.out, "swissroll_trials.csv"), report.write_trials_csv
    )
    _atomic_write(
        os.path.join(args.out, "swissroll_aggregate.csv"), report.write_aggregate_csv
    )
    _atomic_write(
        os.path.join(args.out, "swissroll_bridge_counts.dat"),
        report.write_bridge_counts_dat,
    )
    if cfg.collect_envelopes:
        _atomic_write(
            os.path.join(args.out, "swissroll_envelopes.dat"), report.write_envelopes
        )
    if args.table:
        _atomic_write(
            os.path.join(args.out, "swissroll_table.txt"),
            lambda p, rep=report: _write_error_table(p, rep),
        )
    for row in report.aggregate():
        print(
            "mu=%-5g rule=%-4s q=%-4s E=%8.3f flagged~%g true~%g"
            % (
                row["mu"],
                row["rule"],
                "-" if row["q"] is None else "%g" % row["q"],
                row["mean_err_mean"],
                row["flagged_median"],
                row["true_bridges_median"],
            )
        )
    print("elapsed=%.2fs" % (time.perf_counter() - started))
    return 0


def _cmd_tomo(args):
    started = time.perf_counter()
    phantom = tomo.shepp_logan(args.side)
    sino = tomo.random_sinogram(phantom, args.n, args.r, args.snr_db, args.seed)
    os.makedirs(args.out, exist_ok=True)
    _atomic_write(
        os.path.join(args.out, "sinogram.bin"), lambda p: tomo.write_sinogram(p, sino)
    )
    _atomic_write(
        os.path.join(args.out, "phantom.pgm"), lambda p: tomo.write_pgm(p, phantom)
    )
    # reconstruction from the true angular order bounds what any blind
    # ordering of the same rows can achieve
    sanity = tomo.fbp_from_rows(sino.noisy[np.argsort(sino.theta)], args.side)
    print("true-order rho=%.4f" % tomo.similarity_rho(phantom, sanity))
    if args.rule is None:
        rules = ["none", "jdr", "npdr"]
    else:
        rules = [args.rule]
    for name in rules:
        rule = None if name == "none" else name
        q = args.q
        if q is None:
            q = 0.78 if name == "jdr" else 0.80
        ordering = tomo.prune_and_order(
            sino, k=args.k, rule=rule, q=q, p=args.p, epsilon=args.epsilon
        )
        recon = tomo.fbp_reconstruct(ordering, sino, args.side)
        rho = tomo.similarity_rho(phantom, recon)
        agreement = tomo.ordering_agreement(ordering, sino.theta)
        run_cfg = {
            "side": args.side,
            "n": args.n,
            "r": args.r,
            "k": args.k,
            "snr_db": "%g" % args.snr_db,
            "seed": args.seed,
            "rule": name,
            "q": "%g" % q,
            "p": "%g" % args.p,
            "epsilon": "%g" % args.epsilon,
        }
        _atomic_write(
            os.path.join(args.out, "tomo_ordering_%s.csv" % name),
            lambda p, o=ordering, c=run_cfg: tomo.write_ordering_csv(p, o, sino, c),
        )
        _atomic_write(
            os.path.join(args.out, "tomo_recon_%s.pgm" % name),
            lambda p, im=recon: tomo.write_pgm(p, im),
        )
        print(
            "rule=%-4s survivors=%d discarded=%d rho=%.4f agreement=%.4f"
            % (name, ordering.permutation.size, ordering.n_discarded, rho, agreement)
        )
    print("elapsed=%.2fs" % (time.perf_counter() - started))
    return 0


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InvalidParameterError, InvalidGraphError, OSError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return 2
    except (
        SingularMatrixError,
        ConvergenceFailureError,
        InsufficientDataError,
        UndefinedSimilarityError,
        FloatingPointError,
        np.linalg.LinAlgError,
    ) as exc:
        print("numerical error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
