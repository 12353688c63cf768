# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass
import numpy as np
import scipy.integrate
import scipy.linalg
from supercur_utils import LOG, flags
from .errors import ArgumentError, NumericalFailure
from .matcore import norm
from .matio import load_matrix

@dataclass(frozen=True)
class RngState:
    """(seed, stream, path) triple; identical triples replay identical draws.
    ``path`` records the chain of spawn indices below the stream."""
    seed: int = 0
    stream: int = 0
    path: tuple = ()

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,) + self.path)
        return np.random.Generator(np.random.PCG64(ss))

    def spawn(self, i):
        # disjoint child stream for trial i
        return RngState(self.seed, self.stream, self.path + (int(i),))

def make_rng(rng=None):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    return RngState(0 if rng is None else int(rng)).generator()


FACTOR_KINDS = ("scaled", "diagonally_scaled", "left", "right")
VARIANTS = ("gaussian", "nz_gaussian", "factor_gaussian", "plus_minus_delta",
    "laplacian", "from_file")

@dataclass
class GeneratorSpec:
    variant: str = "factor_gaussian"
    m: int = 256
    n: int = 256
    r: int = 8
    nz: int = 0
    kind: str = "scaled"
    sigma: float = 1.0
    rho: float = 0.5
    cond_cap: float = 1e6
    eps: float = 1e-10
    i: int = 0
    j: int = 0
    sign: int = 1
    dense: bool = False
    path: str = ""

    def validate(self):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"Unknown generator variant: {self.variant}")
        if self.variant == "from_file":
            return self
        if self.m < 1 or self.n < 1:
            raise ArgumentError(f"Bad dimensions {self.m}x{self.n}")
        if self.variant == "factor_gaussian":
            if not 1 <= self.r <= min(self.m, self.n):
                raise ArgumentError(f"r={self.r} outside [1, min(m,n)]")
            if self.kind not in FACTOR_KINDS:
                raise ArgumentError(f"Unknown factor kind: {self.kind}")
        if self.variant == "nz_gaussian" and not max(self.m, self.n) <= self.nz <= self.m*self.n:
            raise ArgumentError(f"NZ={self.nz} outside [max(m,n), m*n]")
        return self


def gen_gaussian(m, n, rng):
    return make_rng(rng).standard_normal((m, n))

def _cover(m, n):
    # max(m,n) positions meeting every row and column
    p = max(m, n)
    return np.arange(p) % m * n + np.arange(p) % n

def gen_nz_gaussian(m, n, nz, rng, max_redraw=1000):
    if nz < max(m, n) or nz > m * n:
        raise ArgumentError(f"NZ={nz} must be in [max(m,n)={max(m,n)}, m*n={m*n}]")
    rng = make_rng(rng)
    for attempt in range(max_redraw):
        pos = rng.choice(m * n, size=nz, replace=False)
        rows, cols = np.divmod(pos, n)
        if len(np.unique(rows)) == m and len(np.unique(cols)) == n:
            break
    else:
        LOG.v(f"nz_gaussian {m}x{n} NZ={nz}: {max_redraw} redraws failed, repairing")
        cover = _cover(m, n)
        rest = np.setdiff1d(np.arange(m * n), cover)
        pos = np.concatenate([cover, rng.choice(rest, size=nz - len(cover), replace=False)])
        # shuffle rows and columns so the cover is not always a diagonal
        pr, pc = rng.permutation(m), rng.permutation(n)
        rows, cols = np.divmod(pos, n)
        pos = pr[rows] * n + pc[cols]
    W = np.zeros(m * n)
    W[pos] = rng.standard_normal(nz)
    return W.reshape(m, n)

def geometric_spectrum(r, sigma=1.0, rho=0.5, cond_cap=1e6):
    """σ_i = σ·ρ^i, floored so that σ_1/σ_r ≤ cond_cap."""
    if not 0 < rho <= 1:
        raise ArgumentError(f"rho must be in (0, 1], got {rho}")
    s = sigma * rho ** np.arange(r)
    return np.maximum(s, sigma / cond_cap)

def _fixed_factor(p, q):
    # deterministic well-conditioned factor with orthonormal rows or columns
    A = RngState(20200101, 7).generator().standard_normal((max(p, q), min(p, q)))
    Q = np.linalg.qr(A)[0]
    return Q if p >= q else Q.T

def gen_factor_gaussian(spec, rng):
    """Returns (W, G, H) with W = G·H + eps·E. For the diagonally scaled
    kind the spectrum is folded into G."""
    spec = spec.validate()
    rng = make_rng(rng)
    m, n, r = spec.m, spec.n, spec.r
    if spec.kind == "left":
        G, H = rng.standard_normal((m, r)), _fixed_factor(r, n)
    elif spec.kind == "right":
        G, H = _fixed_factor(m, r), rng.standard_normal((r, n))
    else:
        G, H = rng.standard_normal((m, r)), rng.standard_normal((r, n))
        if spec.kind == "scaled":
            G = spec.sigma * G
        else:
            G = G * geometric_spectrum(r, spec.sigma, spec.rho, spec.cond_cap)
    W = G @ H
    if spec.eps:
        W = W + spec.eps * rng.standard_normal((m, n))
    return W, G, H

def gen_plus_minus_delta(m, n, i, j, sign=1, dense=False):
    if not (0 <= i < m and 0 <= j < n):
        raise ArgumentError(f"({i}, {j}) outside {m}x{n}")
    if sign not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sign}")
    W = np.ones((m, n)) if dense else np.zeros((m, n))
    W[i, j] += sign
    return W

def _arc_integral(i, j, n, tol):
    z = 2 * np.exp(2j * np.pi * i / n)
    f = lambda t: np.log(np.abs(z - np.exp(1j * t)))
    a, b = 2 * np.pi * j / n, 2 * np.pi * (j + 1) / n
    val, err, info = scipy.integrate.quad(f, a, b, epsabs=tol, epsrel=0,
        limit=200, full_output=1)[:3]
    if err > tol * 10:
        raise NumericalFailure(f"quadrature over arc {j} did not converge: err={err:g}")
    return val

def gen_laplacian(n, tol=None):
    """Discretized single-layer potential between the circles of radii 2 and 1.

    Entry (i, j) integrates log|2ω^i − y| over arc j of the unit circle
    (ω = exp(2πi/n)); the matrix is circulant and scaled to unit spectral norm.
    """
    if n < 4:
        raise ArgumentError(f"Laplacian needs n >= 4, got {n}")
    tol = flags.quad_tol if tol is None else tol
    # w[i, j] depends on (j - i) mod n only
    row = np.array([_arc_integral(0, j, n, tol) for j in range(n)])
    LOG.v(f"laplacian n={n}: {n} arc integrals")
    W = scipy.linalg.circulant(row[(-np.arange(n)) % n])
    return W / norm(W, "spectral")

def generate(spec, rng=None):
    """Matrix for ``spec``; factor-Gaussian factors are dropped."""
    spec = spec.validate()
    v = spec.variant
    if v == "gaussian":
        return gen_gaussian(spec.m, spec.n, rng)
    if v == "nz_gaussian":
        return gen_nz_gaussian(spec.m, spec.n, spec.nz, rng)
    if v == "factor_gaussian":
        return gen_factor_gaussian(spec, rng)[0]
    if v == "plus_minus_delta":
        return gen_plus_minus_delta(spec.m, spec.n, spec.i, spec.j, spec.sign, spec.dense)
    if v == "laplacian":
        return gen_laplacian(spec.n)
    return load_matrix(spec.path)
