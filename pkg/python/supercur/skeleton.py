# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass, field
from typing import Optional
import numpy as np
import scipy.stats
from supercur_utils import LOG, flags
from .errors import (ArgumentError, BoundUnavailable, ParseError,
    SingularGeneratorError)
from .matcore import (as_counting, as_mat, index_set, is_rank_deficient, norm,
    pinv, svd, truncate)

@dataclass(frozen=True)
class CurLra:
    """W ≈ C·U·R with C = W[:, cols], R = W[rows, :] and the l×k nucleus U.

    ``meta`` carries run diagnostics (retries, entries touched, ...) and
    takes no part in equality.
    """
    rows: np.ndarray
    cols: np.ndarray
    nucleus: np.ndarray
    rank: int
    shape: tuple
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        m, n = self.shape
        object.__setattr__(self, "rows", index_set(self.rows, m))
        object.__setattr__(self, "cols", index_set(self.cols, n))
        k, l = len(self.rows), len(self.cols)
        if not (0 < self.rank <= k <= m and self.rank <= l <= n):
            raise ArgumentError(f"need 0 < r <= k <= m, r <= l <= n; "
                f"got r={self.rank}, k={k}, l={l}, shape={self.shape}")
        if np.shape(self.nucleus) != (l, k):
            raise ArgumentError(f"nucleus must be {l}x{k}, got {np.shape(self.nucleus)}")

    @property
    def k(self):
        return len(self.rows)

    @property
    def l(self):
        return len(self.cols)

    def __eq__(self, other):
        if not isinstance(other, CurLra):
            return NotImplemented
        return (self.rank == other.rank and tuple(self.shape) == tuple(other.shape)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.nucleus, other.nucleus))

    def factors(self, W):
        W = as_counting(W)
        return W.cols(self.cols), self.nucleus, W.rows(self.rows)

    def reconstruct(self, W):
        C, U, R = self.factors(W)
        return C @ (U @ R)

    def matvec(self, W, x):
        C, U, R = self.factors(W)
        return C @ (U @ (R @ x))

    def entries(self, W, I, J):
        """Values of C·U·R on the grid I×J, reading (|I|+|J|)·(k+l)-ish entries."""
        W = as_counting(W)
        C_I = W.block(I, self.cols)
        R_J = W.block(self.rows, J)
        return C_I @ self.nucleus @ R_J

    def save(self, path):
        U = np.asarray(self.nucleus)
        cplx = int(np.iscomplexobj(U))
        with open(path, "w", encoding="utf8") as f:
            f.write("%%SuperCUR CurLra 1\n")
            f.write(f"{self.shape[0]} {self.shape[1]} {self.k} {self.l} {self.rank} {cplx}\n")
            f.write(" ".join(map(str, self.rows.tolist())) + "\n")
            f.write(" ".join(map(str, self.cols.tolist())) + "\n")
            flat = np.column_stack([U.real.ravel(), U.imag.ravel()]).ravel() if cplx else U.ravel()
            np.savetxt(f, flat.reshape(self.l, -1), fmt="%.17g")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf8") as f:
            lines = f.read().splitlines()
        if not lines or lines[0].strip() != "%%SuperCUR CurLra 1":
            raise ParseError("missing CurLra header", path, 1)
        try:
            m, n, k, l, r, cplx = map(int, lines[1].split())
        except ValueError as e:
            raise ParseError(f"bad size line: {e}", path, 2) from e
        try:
            rows = [int(t) for t in lines[2].split()]
            cols = [int(t) for t in lines[3].split()]
        except (ValueError, IndexError) as e:
            raise ParseError(f"bad index line: {e}", path, 3) from e
        body = lines[4:4 + l]
        width = k * (2 if cplx else 1)
        vals = []
        for lineno, line in enumerate(body, start=5):
            try:
                toks = [float(t) for t in line.split()]
            except ValueError as e:
                raise ParseError(str(e), path, lineno) from e
            if len(toks) != width:
                raise ParseError(f"expected {width} values, got {len(toks)}", path, lineno)
            vals.append(toks)
        if len(vals) != l:
            raise ParseError(f"expected {l} nucleus rows, got {len(vals)}", path, len(lines))
        U = np.array(vals)
        if cplx:
            U = U[:, 0::2] + 1j * U[:, 1::2]
        return cls(rows, cols, U.reshape(l, k), r, (m, n))


@dataclass(frozen=True)
class ErrorReport:
    kind: str
    absolute: float
    relative: float
    sigma_tail: Optional[float] = None


@dataclass(frozen=True)
class SampledErrorReport:
    q: int
    s: int
    mean: float
    mean_abs: float
    variance: float
    frobenius_estimate: float
    chebyshev_observed: float
    statistic: Optional[float] = None
    threshold: Optional[float] = None
    passed: Optional[bool] = None


@dataclass(frozen=True)
class AprioriBound:
    bound: float
    mu: float
    eta: float
    xi: float
    theta: float


def canonical_nucleus(W_kl, r, exact_inverse=None):
    """(rank-r truncation of W_kl)⁺, shape l×k.

    With k = l = r the generator is inverted directly and a numerically
    singular generator raises SingularGeneratorError.
    """
    W_kl = as_mat(W_kl)
    k, l = W_kl.shape
    if not 1 <= r <= min(k, l):
        raise ArgumentError(f"r={r} outside [1, min(k,l)={min(k, l)}]")
    if exact_inverse is None:
        exact_inverse = k == l == r
    if exact_inverse:
        if k != l or r != k:
            raise ArgumentError("exact inverse needs a square r x r generator")
        if is_rank_deficient(W_kl, r):
            raise SingularGeneratorError(f"{k}x{l} generator is numerically singular")
        return np.linalg.inv(W_kl)
    if r == min(k, l):
        return pinv(W_kl)
    t = truncate(svd(W_kl), r)
    s = t.sigma
    keep = s > flags.pinv_rtol * s[0] if s[0] > 0 else np.zeros(r, bool)
    return (t.T[:, keep] / s[keep]) @ t.S[:, keep].conj().T

def reconstruct(cur, W):
    return cur.reconstruct(W)

def nucleus_md09(W, C, R):
    """U = C⁺·W·R⁺. Reads all of W."""
    return pinv(C) @ as_mat(W) @ pinv(R)

def audit_error(W, approx, kind="spectral", sigma_tail=None):
    """Dense audit: evaluates W − approx over all m·n entries."""
    W = as_counting(W)
    full = W.dense()
    E = full - approx.reconstruct(W)
    absolute = norm(E, kind)
    scale = norm(full, kind)
    return ErrorReport(kind, absolute, absolute / scale if scale else 0.0, sigma_tail)

def apriori_error_bound(cur, norm_C, norm_R, sigma_tail, kind="spectral", norm_U=None):
    """Upper bound on ‖W − CUR‖ from the norms of the factors and σ̃_{r+1}.

    η = 1 when r = min(k,l) and 2 otherwise. μ is (1+√5)/2 (r < min(k,l)) or
    √2 (r = min(k,l)) in the spectral norm and 1 in the Frobenius norm.
    θ = ‖U‖·η·σ̃_{r+1} must stay below 1; ξ = 1/(1−θ), times √(kl) for the
    Frobenius norm.
    """
    if min(norm_C, norm_R, sigma_tail) < 0:
        raise ArgumentError("norms must be nonnegative")
    if kind not in ("spectral", "frobenius"):
        raise ArgumentError(f"Unknown norm kind: {kind}")
    k, l, r = cur.k, cur.l, cur.rank
    full = r == min(k, l)
    eta = 1.0 if full else 2.0
    if kind == "spectral":
        mu = np.sqrt(2.0) if full else (1 + np.sqrt(5.0)) / 2
    else:
        mu = 1.0
    U_spec = norm(cur.nucleus, "spectral")
    if norm_U is None:
        norm_U = norm(cur.nucleus, kind)
    theta = U_spec * eta * sigma_tail
    if theta >= 1:
        raise BoundUnavailable(f"theta = {theta:g} >= 1, bound unavailable", theta)
    xi = 1 / (1 - theta)
    if kind == "frobenius":
        xi *= np.sqrt(k * l)
    bound = sigma_tail * ((norm_R + norm_C + sigma_tail + mu * eta * norm_C * norm_R * norm_U)
        * xi * norm_U + 1)
    return AprioriBound(float(bound), float(mu), eta, float(xi), float(theta))

def apriori_error_bound_for(W, cur, sigma_tail, kind="spectral"):
    C, _, R = cur.factors(W)
    return apriori_error_bound(cur, norm(C, kind), norm(R, kind), sigma_tail, kind)

def volume_error_bound(k, l, r, h, sigma_next):
    """Chebyshev-norm error bound of a CUR whose generator has h-maximal
    (r-projective) volume: h·f·σ_{r+1}."""
    if not 1 <= r <= min(k, l):
        raise ArgumentError(f"r={r} outside [1, min(k,l)]")
    if r == min(k, l):
        f = np.sqrt((k + 1) * (l + 1) / (abs(l - k) + 1))
    else:
        f = np.sqrt((k + 1) * (l + 1) / ((k - r + 1) * (l - r + 1)))
    return float(h * f * sigma_next)

def posterior_error_sampled(W, approx, q, s, rng, tolerance=None, alpha=0.01):
    """Estimate the error of ``approx`` from a random q×s grid of W − approx.

    With ``tolerance`` (a variance σ₀²) the one-sided χ² test of the
    hypothesis "entry variance ≤ σ₀²" is run at level ``alpha``.
    """
    from .generators import make_rng
    W = as_counting(W)
    m, n = W.shape
    if q * s < 100:
        raise ArgumentError(f"q*s = {q*s} < 100 sampled entries")
    if not (1 <= q <= m and 1 <= s <= n):
        raise ArgumentError(f"grid {q}x{s} does not fit {m}x{n}")
    rng = make_rng(rng)
    I = np.sort(rng.choice(m, q, replace=False))
    J = np.sort(rng.choice(n, s, replace=False))
    E = W.block(I, J) - approx.entries(W, I, J)
    K = q * s
    mean = E.mean()
    variance = float(np.sum(np.abs(E - mean)**2) / K)
    stat = thr = passed = None
    if tolerance is not None:
        if tolerance > 0:
            stat = float(K * variance / tolerance)
        else:
            stat = 0.0 if variance == 0 else np.inf
        thr = float(scipy.stats.chi2.ppf(1 - alpha, K - 1))
        passed = bool(stat <= thr)
    report = SampledErrorReport(q, s, float(np.abs(mean)) if np.iscomplexobj(E) else float(mean),
        float(np.abs(E).mean()), variance,
        float(np.sqrt(m * n / K) * np.linalg.norm(E)), float(np.abs(E).max()),
        stat, thr, passed)
    LOG.v(f"sampled error {q}x{s}: var={variance:.3e} frob~{report.frobenius_estimate:.3e}")
    return report
