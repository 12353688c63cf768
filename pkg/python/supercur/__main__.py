# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
"""Command line entry: ``python -m supercur <gen|cur|bench|ks|norms> ...``

example::

    python -m supercur gen --variant factor_gaussian -m 256 -n 256 --rank 8 --out W.mtx
    python -m supercur cur --matrix W.mtx --pipeline cross_approx -r 8 -k 8 -l 8
    python -m supercur bench pipelines --trials 100 --out pipelines.csv
"""
import argparse
import sys
from supercur_utils import LOG
from .errors import CurError
from .generators import GeneratorSpec, RngState, generate
from .matcore import CountingMatrix
from .matio import save_matrix
from .pipelines import PipelineSpec
from .bench import (ExperimentConfig, ExperimentReport, load_config,
    report_write, run_experiment, run_ks_suite, run_norm_suite, run_suite)
from .bench.experiment import run_cur
from .skeleton import audit_error

def _add_common(p, seed=0):
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", default=None, help="output path, stdout when omitted")
    p.add_argument("--format", default="table", choices=("csv", "table"))

def _add_generator(p):
    p.add_argument("--variant", dest="gen_variant", default="factor_gaussian")
    p.add_argument("-m", type=int, default=256)
    p.add_argument("-n", type=int, default=256)
    p.add_argument("--rank", type=int, default=8, help="rank of factor-Gaussian inputs")
    p.add_argument("--nz", type=int, default=0)
    p.add_argument("--kind", default="scaled")
    p.add_argument("--eps", type=float, default=0.0)

def _seed(args):
    return 0 if args.seed is None else args.seed

def _gen_spec(args):
    return GeneratorSpec(args.gen_variant, args.m, args.n, args.rank, args.nz,
        args.kind, eps=args.eps)

def build_parser():
    parser = argparse.ArgumentParser(prog="supercur",
        description="Superfast CUR low-rank approximation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit a test matrix to a file")
    _add_generator(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default=None, choices=("raw", "array", "coordinate"))

    p = sub.add_parser("cur", help="run one pipeline and print its error report")
    _add_common(p, seed=None)
    _add_generator(p)
    p.add_argument("--matrix", default=None, help="Matrix Market or raw input file")
    p.add_argument("--config", default=None)
    p.add_argument("--pipeline", default="cross_approx")
    p.add_argument("-r", type=int, default=8)
    p.add_argument("-k", type=int, default=8)
    p.add_argument("-l", type=int, default=8)
    p.add_argument("-q", type=int, default=32)
    p.add_argument("-s", type=int, default=32)
    p.add_argument("--loops", type=int, default=5)
    p.add_argument("--subalg", default="lu")
    p.add_argument("--save-cur", default=None)

    p = sub.add_parser("bench", help="run a named suite or a config file")
    _add_common(p, seed=None)
    p.add_argument("suite", nargs="?", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--procs", type=int, default=None)
    p.add_argument("--paper-scale", "--full-scale", dest="full_scale", action="store_true",
        help="n = 1024 inputs and 1000 trials per row")

    p = sub.add_parser("ks", help="KS normality of bidiagonal products")
    _add_common(p)
    p.add_argument("-n", type=int, default=256)
    p.add_argument("--T", dest="T_list", default="1,2,5,10,20")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--procs", type=int, default=None)

    p = sub.add_parser("norms", help="Gaussian and NZ-Gaussian norm corridors")
    _add_common(p)
    p.add_argument("--trials", type=int, default=200)
    return parser


def cmd_gen(args):
    W = generate(_gen_spec(args), RngState(args.seed))
    save_matrix(args.out, W, args.format)
    LOG.i(f"wrote {W.shape[0]}x{W.shape[1]} matrix to {args.out}")
    return []

def cmd_cur(args):
    if args.config:
        config = load_config(args.config)
        if args.seed is not None:
            config.seed = args.seed
    else:
        gen = GeneratorSpec("from_file", path=args.matrix) if args.matrix else _gen_spec(args)
        pipe = PipelineSpec(args.pipeline, args.r, args.k, args.l, args.q, args.s,
            args.loops, args.subalg)
        config = ExperimentConfig("cur", 1, _seed(args), generator=gen, pipeline=pipe)
    rng = RngState(config.seed)
    W = generate(config.generator, rng.spawn(0))
    A = CountingMatrix(W)
    approx = run_cur(A, config, rng.spawn(1).generator())
    err = audit_error(W, approx, "spectral")
    if args.save_cur:
        getattr(approx, "cur", approx).save(args.save_cur)
    p = config.pipeline
    rep = ExperimentReport(config.pipeline.variant, W.shape[0], W.shape[1], p.r, p.k, p.l, 1,
        errors=[err.relative], entries=[A.touched])
    rep.extra["absolute"] = err.absolute
    return [rep]

def cmd_bench(args):
    if args.config:
        config = load_config(args.config)
        if args.trials is not None:
            config.trials = args.trials
        if args.seed is not None:
            config.seed = args.seed
        return [run_experiment(config, args.procs)]
    if not args.suite:
        raise CurError("bench needs a suite name or --config")
    return run_suite(args.suite, args.trials or 100, _seed(args), args.full_scale, args.procs)

def cmd_ks(args):
    T_list = [int(t) for t in args.T_list.split(",")]
    return run_ks_suite(args.n, T_list, args.trials, args.seed, procs=args.procs)

def cmd_norms(args):
    return run_norm_suite(args.trials, args.seed)

COMMANDS = {"gen": cmd_gen, "cur": cmd_cur, "bench": cmd_bench, "ks": cmd_ks, "norms": cmd_norms}

def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        reports = COMMANDS[args.command](args)
    except (CurError, OSError) as e:
        LOG.e(f"{type(e).__name__}: {e}")
        return 1
    if args.command != "gen":
        report_write(reports, args.out, args.format)
    return 0

if __name__ == "__main__":
    sys.exit(main())
