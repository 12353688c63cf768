# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass, field
import time
import numpy as np
from supercur_utils import LOG, run_pool
from ..errors import ArgumentError, CurError
from ..generators import RngState, generate
from ..matcore import CountingMatrix, norm
from ..pipelines import run_pipeline
from ..preprocess import (MultiplierSpec, build_multiplier,
    cur_with_gaussian_sampling, cur_with_multiplier_and_pinv, progressive_cur)
from ..skeleton import audit_error

@dataclass
class ExperimentReport:
    """Per-trial outcomes of one experiment. ``errors`` holds the relative
    spectral errors of the successful trials only; ``failures`` counts the
    trials whose pipeline raised."""
    experiment: str
    m: int
    n: int
    r: int
    k: int
    l: int
    trials: int
    errors: list = field(default_factory=list)
    failures: int = 0
    entries: list = field(default_factory=list)
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def mean(self):
        return float(np.mean(self.errors)) if self.errors else float("nan")

    @property
    def std(self):
        return float(np.std(self.errors)) if self.errors else float("nan")

    @property
    def entries_touched(self):
        return int(max(self.entries)) if self.entries else 0

    def row(self):
        row = dict(experiment=self.experiment, m=self.m, n=self.n, r=self.r,
            k=self.k, l=self.l, trials=self.trials, mean=self.mean, std=self.std,
            failures=self.failures, entries_touched=self.entries_touched,
            seconds=self.seconds)
        row.update(sorted(self.extra.items()))
        return row


def run_cur(W, config, rng):
    p = config.pipeline
    mult = config.multiplier
    if p.variant == "multiplier_pinv":
        return cur_with_multiplier_and_pinv(W, p.r, mult or MultiplierSpec("gaussian"), rng, p.k, p.l)
    if p.variant == "gaussian_sampling":
        return cur_with_gaussian_sampling(W, p.r, p.k, p.l, p.s, rng, mult, p.subalg)
    if p.variant == "progressive":
        return progressive_cur(W, p.r, rng, mult.kind if mult else "arht", k=p.k, l=p.l)
    return run_pipeline(W, p, rng)

def run_trial(args):
    """One trial on its own stream (seed, trial index); picklable for the pool."""
    config, i = args
    trial = RngState(config.seed).spawn(i)
    W = generate(config.generator, trial.spawn(0))
    rng = trial.spawn(1).generator()
    shape = W.shape
    op = None
    if config.preprocess == "premultiply":
        mult = config.multiplier
        op = build_multiplier(MultiplierSpec(mult.kind, W.shape[1], mult.u, mult.l, mult.d, mult.T),
            trial.spawn(2))
        W0, W = W, op.sketch(W)
    A = CountingMatrix(W)
    res = {"index": i, "failure": None, "shape": shape}
    try:
        approx = run_cur(A, config, rng)
    except ArgumentError:
        raise
    except CurError as e:
        LOG.v(f"{config.name} trial {i} failed: {type(e).__name__}: {e}")
        res["failure"] = type(e).__name__
        return res
    res["entries"] = A.touched
    res["error"] = audit_error(W, approx, "spectral").relative
    if op is not None:
        back = op.pinv_right(approx.reconstruct(W))
        res["error_original"] = norm(W0 - back, "spectral") / norm(W0, "spectral")
    depth = getattr(approx, "meta", {}).get("depth")
    if depth is not None:
        res["depth"] = depth
    return res

def run_experiment(config, procs=None, progress=True):
    """Run ``config.trials`` independent trials and summarize them."""
    if config.trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {config.trials}")
    config = config.validate()
    p = config.pipeline
    start = time.time()
    results = run_pool(run_trial, [(config, i) for i in range(config.trials)], procs,
        desc=config.name if progress else None)
    results.sort(key=lambda res: res["index"])
    ok = [res for res in results if res["failure"] is None]
    # from_file inputs carry their own shape
    m, n = results[0]["shape"]
    report = ExperimentReport(config.name, m, n, p.r, p.k, p.l, config.trials,
        errors=[res["error"] for res in ok],
        failures=len(results) - len(ok),
        entries=[res["entries"] for res in ok],
        seconds=time.time() - start)
    for key in ("error_original", "depth"):
        vals = [res[key] for res in ok if key in res]
        if vals:
            report.extra[f"{key}_mean"] = float(np.mean(vals))
    LOG.i(f"{config.name}: mean={report.mean:.3e} std={report.std:.3e} "
        f"failures={report.failures}/{config.trials}")
    return report
