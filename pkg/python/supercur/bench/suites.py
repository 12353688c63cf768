# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import time
import numpy as np
import scipy.stats
from supercur_utils import LOG, run_pool
from ..errors import ArgumentError
from ..generators import (GeneratorSpec, RngState, gen_factor_gaussian,
    gen_nz_gaussian, make_rng)
from ..matcore import svdvals
from ..pipelines import PipelineSpec, leverage_score_error
from ..preprocess import MultiplierSpec, build_quasi_gaussian
from .config import ExperimentConfig
from .experiment import ExperimentReport, run_experiment

KS_SAMPLE_CAP = 10**5

def ks_normality(M, rng=None, cap=KS_SAMPLE_CAP):
    """(statistic, p-value) of the one-sample KS test of the column-standardized
    entries of M against N(0, 1); at most ``cap`` entries are tested."""
    M = np.asarray(M, dtype=np.float64)
    sd = M.std(axis=0)
    sd[sd == 0] = 1
    x = ((M - M.mean(axis=0)) / sd).ravel()
    if x.size > cap:
        x = make_rng(rng).choice(x, cap, replace=False)
    res = scipy.stats.kstest(x, "norm", method="asymp")
    return float(res.statistic), float(res.pvalue)

def _ks_trial(args):
    n, T, seed, t, cap = args
    rng = RngState(seed, T).spawn(t)
    op = build_quasi_gaussian(n, T, rng.spawn(0))
    return ks_normality(op.dense(), rng.spawn(1).generator(), cap)

def run_ks_suite(n=256, T_list=(1, 2, 5, 10, 20), trials=100, seed=0, alpha=0.01,
        cap=KS_SAMPLE_CAP, procs=None):
    """KS normality of densified bidiagonal products, one report per T:
    ``mean`` is the mean KS statistic, ``failures`` the rejections at ``alpha``
    and ``extra['pass_rate']`` the share of accepted trials."""
    if n & (n - 1):
        raise ArgumentError(f"n={n} is not a power of two")
    reports = []
    for T in T_list:
        start = time.time()
        res = run_pool(_ks_trial, [(n, T, seed, t, cap) for t in range(trials)], procs,
            desc=f"ks T={T}")
        stats = [s for s, _ in res]
        passed = sum(p >= alpha for _, p in res)
        rep = ExperimentReport(f"ks_T{T}", n, n, 0, 0, 0, trials, errors=stats,
            failures=trials - passed, seconds=time.time() - start)
        rep.extra["pass_rate"] = passed / trials
        LOG.i(f"ks T={T}: mean statistic {rep.mean:.4f}, pass rate {passed}/{trials}")
        reports.append(rep)
    return reports

def run_norm_suite(trials=200, seed=0, shapes=((32, 8),), nz_shape=(16, 8, 48),
        xs=(0.1, 0.01)):
    """Empirical ‖G‖, ‖G⁺‖ of Gaussian p×q matrices with their analytic
    bounds, and tail frequencies of ‖W⁺‖ for NZ-Gaussian W."""
    reports = []
    for p, q in shapes:
        start = time.time()
        rng = RngState(seed, p * 1000 + q).generator()
        s = np.array([svdvals(rng.standard_normal((p, q))) for _ in range(trials)])
        top, inv = s[:, 0], 1 / s[:, -1]
        for name, vals, bound in (("gaussian_norm", top, np.sqrt(p) + np.sqrt(q)),
                ("gaussian_pinv_norm", inv, np.e * np.sqrt(p) / (p - q))):
            rep = ExperimentReport(f"{name}_{p}x{q}", p, q, 0, 0, 0, trials,
                errors=list(vals), seconds=time.time() - start)
            rep.extra["bound"] = float(bound)
            reports.append(rep)
    m, n, nz = nz_shape
    start = time.time()
    rng = RngState(seed, 7).generator()
    inv = []
    for _ in range(trials):
        smin = svdvals(gen_nz_gaussian(m, n, nz, rng))[-1]
        inv.append(np.inf if smin == 0 else 1 / smin)
    inv = np.array(inv)
    for x in xs:
        rep = ExperimentReport(f"nz_pinv_tail_{m}x{n}_x{x:g}", m, n, 0, 0, 0, trials,
            errors=[float(np.mean(inv >= 1 / x))], seconds=time.time() - start)
        rep.extra["bound"] = float(np.sqrt(2 * n / np.pi) * x)
        reports.append(rep)
    return reports

def run_leverage_suite(trials=100, seed=0, m=256, n=256, r=8, eps_list=(1e-8, 1e-6, 1e-4, 1e-2)):
    """max_j |p_j(W + E) − p_j(W)| for rank-r factor-Gaussian W and ‖E‖ = eps·‖W‖."""
    reports = []
    for eps in eps_list:
        start = time.time()
        errs = []
        for t in range(trials):
            rng = RngState(seed, 11).spawn(t)
            W, G, H = gen_factor_gaussian(GeneratorSpec("factor_gaussian", m, n, r, eps=0.0), rng.spawn(0))
            E = rng.spawn(1).generator().standard_normal((m, n))
            E *= eps * svdvals(W)[0] / svdvals(E)[0]
            errs.append(leverage_score_error(W + E, G, H, r))
        reports.append(ExperimentReport(f"leverage_eps{eps:g}", m, n, r, 0, 0, trials,
            errors=errs, seconds=time.time() - start))
    return reports


def _pipelines(trials, seed, full_scale):
    n = 1024 if full_scale else 256
    r = 8
    gen = GeneratorSpec("factor_gaussian", n, n, r, eps=1e-10)
    tests = (
        ("primitive", PipelineSpec("primitive", r, r, r)),
        ("cross_approx", PipelineSpec("cross_approx", r, r, r, loops=5)),
        ("cynical", PipelineSpec("cynical", r, r, r, q=4 * r, s=4 * r)),
        ("ca_cynical", PipelineSpec("ca_cynical", r, r, r, q=4 * r, s=4 * r)),
    )
    return [ExperimentConfig(name, trials, seed, generator=gen, pipeline=p) for name, p in tests]

def _laplacian(trials, seed, full_scale):
    n = 1024 if full_scale else 256
    gen = GeneratorSpec("laplacian", n, n, 1)
    mult = MultiplierSpec("quasi_gaussian", T=20)
    return [ExperimentConfig(f"laplacian_r{r}", trials, seed, preprocess="premultiply",
        generator=gen, pipeline=PipelineSpec("ca_cynical", r, r, r, q=min(4 * r, n), s=min(4 * r, n)),
        multiplier=mult) for r in (31, 35, 39)]

def _transforms(trials, seed, full_scale):
    n = 1024 if full_scale else 256
    r = 8
    gen = GeneratorSpec("factor_gaussian", n, n, r, eps=1e-10)
    return [ExperimentConfig(f"cross_approx_{kind}_d{d}", trials, seed, preprocess="premultiply",
        generator=gen, pipeline=PipelineSpec("cross_approx", r, r, r, loops=5),
        multiplier=MultiplierSpec(kind, d=d))
        for kind in ("arht", "arft") for d in (1, 3)]

def _dmm(trials, seed, full_scale):
    n = 1024 if full_scale else 256
    r = 8
    gen = GeneratorSpec("factor_gaussian", n, n, r, eps=1e-10)
    return [
        ExperimentConfig("ca_dmm", trials, seed, generator=gen,
            pipeline=PipelineSpec("cross_approx", r, 4 * r, 4 * r, loops=5, subalg="dmm")),
        ExperimentConfig("leverage_cur", trials, seed, generator=gen,
            pipeline=PipelineSpec("leverage", r, 4 * r, 4 * r, scores="svd_based")),
    ]

SUITES = {"pipelines": _pipelines, "laplacian": _laplacian, "transforms": _transforms, "dmm": _dmm}

def suite_configs(name, trials=100, seed=0, full_scale=False):
    if name not in SUITES:
        raise ArgumentError(f"Unknown suite: {name}, expected one of {sorted(SUITES) + ['leverage']}")
    if full_scale:
        trials = max(trials, 1000)
    return SUITES[name](trials, seed, full_scale)

def run_suite(name, trials=100, seed=0, full_scale=False, procs=None):
    if name == "leverage":
        return run_leverage_suite(1000 if full_scale else trials, seed,
            *((1024, 1024, 16) if full_scale else (256, 256, 8)))
    return [run_experiment(c, procs) for c in suite_configs(name, trials, seed, full_scale)]
