# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass
import numpy as np
from .errors import ArgumentError
from .generators import make_rng
from .matcore import as_mat, herm, index_set, svd

@dataclass(frozen=True)
class LeverageScores:
    p: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64).reshape(-1)
        if p.size == 0 or (p < 0).any():
            raise ArgumentError("leverage scores must be a nonempty nonnegative vector")
        if abs(p.sum() - 1) > 1e-12 * max(1, p.size / 1e3):
            raise ArgumentError(f"leverage scores sum to {p.sum():.17g}, not 1")
        if not 0 < self.beta <= 1:
            raise ArgumentError(f"beta must be in (0, 1], got {self.beta}")
        object.__setattr__(self, "p", p)

    @property
    def n(self):
        return self.p.size

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n), 1.0)


@dataclass(frozen=True)
class SamplingPair:
    """Sampled indices (with multiplicity, in draw order) and their rescale factors."""
    indices: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        if len(self.indices) != len(self.scales):
            raise ArgumentError("indices and scales differ in length")


def leverage_scores_from_basis(V, beta=1.0):
    """p_j = β·‖row_j(V)‖²/r + (1−β)/n for V (n×r) with orthonormal columns."""
    V = as_mat(V)
    n, r = V.shape
    if np.linalg.norm(herm(V) @ V - np.eye(r)) > 1e-8:
        raise ArgumentError("basis columns are not orthonormal")
    p = np.sum(np.abs(V)**2, axis=1) / r
    p = p / p.sum()
    if beta < 1:
        p = beta * p + (1 - beta) / n
    return LeverageScores(p, beta)

def sample_exactly_l(scores, l, rng):
    if l < 1:
        raise ArgumentError(f"l must be positive, got {l}")
    rng = make_rng(rng)
    p = scores.p
    idx = rng.choice(p.size, size=l, replace=True, p=p)
    return SamplingPair(idx, 1 / np.sqrt(l * p[idx]))

def sample_expected_l(scores, l, rng):
    if l < 1:
        raise ArgumentError(f"l must be positive, got {l}")
    rng = make_rng(rng)
    lp = l * scores.p
    idx = np.flatnonzero(rng.random(lp.size) < np.minimum(1, lp))
    return SamplingPair(idx, 1 / np.minimum(1, np.sqrt(lp[idx])))

SAMPLERS = {"exactly_l": sample_exactly_l, "expected_l": sample_expected_l}

def get_sampler(name):
    if name not in SAMPLERS:
        raise ArgumentError(f"Unknown sampler: {name}, expected one of {tuple(SAMPLERS)}")
    return SAMPLERS[name]

def leverage_select(sketch, r, count, rng):
    """``count`` distinct columns of a small sketch drawn without replacement
    with probabilities given by its rank-r leverage scores."""
    sketch = as_mat(sketch)
    n = sketch.shape[1]
    rng = make_rng(rng)
    s = svd(sketch)
    p = np.sum(np.abs(s.T[:, :r])**2, axis=1)
    p = p / p.sum() if p.sum() > 0 else np.full(n, 1.0 / n)
    nz = np.flatnonzero(p > 0)
    if len(nz) >= count:
        picked = rng.choice(n, size=count, replace=False, p=p)
    else:
        rest = np.setdiff1d(np.arange(n), nz)[:count - len(nz)]
        picked = np.concatenate([nz, rest])
    return index_set(picked, n)
