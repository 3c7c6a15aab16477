"""Command line interface: ``spatialsign <subcommand> ...``.

Exit status is 0 on success, 2 for invalid input or configuration and 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import (
    AmbiguousAlignment,
    DegenerateEigenvalue,
    DegenerateObservation,
    IncompatibleGrids,
    InsufficientRank,
    InvalidArgument,
    NotSelfAdjoint,
    NumericalFailure,
)
from .experiment import load_config, run_experiment
from .hilbert import hs_norm
from .location import spatial_median_asgd, spatial_median_weiszfeld
from .signcov import sign_cov
from .simgen import SimDesign, gen_samples
from .spca import eigendecompose
from .twosample import run_test

EXIT_INVALID = 2
EXIT_NUMERICAL = 3

_NUMERICAL = (
    NumericalFailure,
    DegenerateObservation,
    NotSelfAdjoint,
    InsufficientRank,
    DegenerateEigenvalue,
    AmbiguousAlignment,
    np.linalg.LinAlgError,
)
_INVALID = (InvalidArgument, IncompatibleGrids, FileNotFoundError, IsADirectoryError)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _center(sample, args):
    if getattr(args, "center", None):
        return io.read_curve_csv(args.center, sample.grid)
    return spatial_median_weiszfeld(sample).estimate


def cmd_median(args) -> dict:
    sample = io.read_sample_csv(args.sample)
    if args.method == "asgd":
        res = spatial_median_asgd(sample, args.step_c, args.step_gamma, seed=args.seed)
    else:
        res = spatial_median_weiszfeld(sample, tol=args.tol, max_iter=args.max_iter)
    out = _out_dir(args)
    io.write_curve_csv(out / "median.csv", res.estimate)
    record = {
        "iterations": res.iterations,
        "converged": res.converged,
        "objective": res.objective,
        "final_step": res.final_step,
        "method": args.method,
    }
    io.write_json(out / "median.json", record)
    return record


def cmd_signcov(args) -> dict:
    sample = io.read_sample_csv(args.sample)
    res = sign_cov(sample, _center(sample, args))
    out = _out_dir(args)
    io.write_kernel_csv(out / "signcov_kernel.csv", res.operator)
    io.write_curve_csv(out / "signcov_center.csv", res.center)
    record = {
        "trace": res.trace,
        "hs_norm": hs_norm(res.operator),
        "n_zero_residuals": res.n_zero_residuals,
    }
    io.write_json(out / "signcov.json", record)
    return record


def cmd_spca(args) -> dict:
    sample = io.read_sample_csv(args.sample)
    res = sign_cov(sample, _center(sample, args))
    system = eigendecompose(res.operator, args.k)
    out = _out_dir(args)
    np.savetxt(out / "eigenvalues.csv", system.values[None, :], delimiter=",", fmt="%.17g")
    np.savetxt(out / "eigenfunctions.csv", system.vectors, delimiter=",", fmt="%.17g")
    record = {
        "trace": system.op_trace,
        "eigenvalues": system.values,
        "explained_fraction": system.explained_fraction(),
    }
    io.write_json(out / "spca.json", record)
    return record


def cmd_test2(args) -> dict:
    s1 = io.read_sample_csv(args.sample1)
    s2 = io.read_sample_csv(args.sample2)
    res = run_test(s1, s2, M=args.M, N_b=args.nb, mode=args.mode, seed=args.seed, threads=args.threads)
    record = {
        "statistic": res.statistic,
        "statistic_full": res.statistic_full,
        "p_value": res.p_value,
        "thetas": res.spectrum.thetas,
        "M": res.spectrum.M,
        "q_n": res.spectrum.q_n,
        "n1": res.n1,
        "n2": res.n2,
        "mode": res.mode,
        "explained_fraction": res.explained_fraction,
    }
    out = _out_dir(args)
    io.write_json(out / "test2.json", record)
    if args.null_draws:
        np.savetxt(args.null_draws, res.null_draws, delimiter=",", fmt="%.17g")
    return record


def cmd_simulate(args) -> dict:
    design = SimDesign(
        model="null_bm" if args.model == "null" else args.model,
        delta=args.delta,
        n1=args.n1,
        n2=args.n2,
        m=args.m,
        contaminated=args.contaminate > 0,
        epsilon=args.contaminate,
        seed=args.seed if args.seed is not None else 0,
    )
    x1, x2 = gen_samples(design, args.replication)
    out = _out_dir(args)
    p1 = io.write_sample_csv(out / "sample1.csv", x1)
    p2 = io.write_sample_csv(out / "sample2.csv", x2)
    return {"sample1": str(p1), "sample2": str(p2), "delta_n": design.delta_n}


def cmd_experiment(args) -> dict:
    config = load_config(args.config)
    if config.output_dir is None or args.out_given:
        config.output_dir = args.out
    if args.seed is not None:
        config.design = config.design.with_(seed=args.seed)
    table = run_experiment(config, threads=args.threads)
    return {"output_dir": config.output_dir, "cells": len(table.rows)}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master random seed")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker count")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: .)")

    parser = argparse.ArgumentParser(prog="spatialsign", description=__doc__, parents=[common])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("median", parents=[common], help="spatial median of a sample CSV")
    p.add_argument("sample")
    p.add_argument("--method", choices=("weiszfeld", "asgd"), default="weiszfeld")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--step-c", type=float, default=1.0)
    p.add_argument("--step-gamma", type=float, default=0.6)
    p.set_defaults(func=cmd_median)

    p = sub.add_parser("signcov", parents=[common], help="sample sign covariance operator")
    p.add_argument("sample")
    p.add_argument("--center", help="one-row CSV; default is the Weiszfeld median")
    p.set_defaults(func=cmd_signcov)

    p = sub.add_parser("spca", parents=[common], help="spherical principal components")
    p.add_argument("sample")
    p.add_argument("--center")
    p.add_argument("-k", type=int, default=None, help="number of components (default: all)")
    p.set_defaults(func=cmd_spca)

    p = sub.add_parser("test2", parents=[common], help="two-sample operator test")
    p.add_argument("sample1")
    p.add_argument("sample2")
    p.add_argument("--mode", choices=("sign", "classical", "classical-gauss"), default="sign")
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--nb", type=int, default=5000)
    p.add_argument("--null-draws", help="write the bootstrap null draws to this CSV")
    p.set_defaults(func=cmd_test2)

    p = sub.add_parser("simulate", parents=[common], help="draw one replication of a design")
    p.add_argument("--model", choices=("null", "model1", "model2"), default="null")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--n1", type=int, default=100)
    p.add_argument("--n2", type=int, default=100)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--contaminate", type=float, default=0.0, metavar="EPS")
    p.add_argument("--replication", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", parents=[common], help="rejection-frequency tables")
    p.add_argument("--config", required=True, help="JSON or TOML configuration")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.out_given = hasattr(args, "out")
    for name, default in (("seed", None), ("threads", 1), ("out", ".")):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        record = args.func(args)
    except _INVALID as exc:
        print(f"spatialsign: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NUMERICAL as exc:
        print(f"spatialsign: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(io.dumps(record))
    return 0


if __name__ == "__main__":
    sys.exit(main())
