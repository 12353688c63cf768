# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass
import numpy as np
import scipy.linalg
from supercur_utils import LOG, flags
from .errors import ArgumentError, NumericalFailure

NORM_KINDS = ("spectral", "frobenius", "chebyshev")

def as_mat(data, field=None):
    """Validate and convert ``data`` into a dense 2-d matrix.

    The field is float64 unless the data (or ``field="complex"``) is complex.
    Empty or non-finite input raises ArgumentError.
    """
    a = np.asarray(data)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ArgumentError(f"Matrix must be 2-d, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ArgumentError(f"Matrix must be nonempty, got shape {a.shape}")
    if field is None:
        field = "complex" if np.iscomplexobj(a) else "real"
    if field == "complex":
        a = a.astype(np.complex128, copy=False)
    elif field == "real":
        if np.iscomplexobj(a):
            raise ArgumentError("complex data for a real matrix")
        a = a.astype(np.float64, copy=False)
    else:
        raise ArgumentError(f"Unknown field: {field}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("Matrix has NaN or Inf entries")
    return a

def field_of(W):
    return "complex" if np.iscomplexobj(W) else "real"

def herm(W):
    return W.conj().T if np.iscomplexobj(W) else W.T

def index_set(indices, bound):
    """Sorted, duplicate-free, bounded index set (int64 read-only array)."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= bound):
        raise ArgumentError(f"Index out of range [0, {bound}): {idx.tolist()}")
    out = np.unique(idx)
    if out.size != idx.size:
        raise ArgumentError(f"Duplicate indices: {idx.tolist()}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TopSvd:
    S: np.ndarray
    sigma: np.ndarray
    T: np.ndarray

    @property
    def r(self):
        return len(self.sigma)

    def reconstruct(self):
        return (self.S * self.sigma) @ herm(self.T)

    def orthonormality_defect(self):
        r = self.r
        return max(np.linalg.norm(herm(self.S) @ self.S - np.eye(r)),
                   np.linalg.norm(herm(self.T) @ self.T - np.eye(r)))


def svd(W):
    """Compact SVD. LAPACK gesdd first, then the Golub-Kahan plus
    implicit-shift QR driver (gesvd) if the divide-and-conquer driver does
    not converge."""
    W = as_mat(W)
    for driver in ("gesdd", "gesvd"):
        try:
            S, sigma, Vh = scipy.linalg.svd(W, full_matrices=False,
                lapack_driver=driver, check_finite=False)
            return TopSvd(S, sigma, herm(Vh))
        except np.linalg.LinAlgError as e:
            LOG.w(f"svd driver {driver} failed on {W.shape}: {e}")
    raise NumericalFailure(f"SVD did not converge for a {W.shape} matrix")

def svdvals(W):
    W = as_mat(W)
    try:
        return scipy.linalg.svdvals(W, check_finite=False)
    except np.linalg.LinAlgError:
        return svd(W).sigma

def truncate(s, r):
    if not (isinstance(r, (int, np.integer)) and 1 <= r <= s.r):
        raise ArgumentError(f"Truncation rank must be in [1, {s.r}], got {r}")
    return TopSvd(s.S[:, :r], s.sigma[:r], s.T[:, :r])

def norm(W, kind="spectral"):
    W = np.asarray(W)
    if kind == "spectral":
        return float(svdvals(W)[0])
    if kind == "frobenius":
        return float(np.linalg.norm(W))
    if kind == "chebyshev":
        return float(np.abs(W).max())
    raise ArgumentError(f"Unknown norm kind: {kind}, expected one of {NORM_KINDS}")

def pinv(W, rel_tol=None):
    W = as_mat(W)
    rel_tol = flags.pinv_rtol if rel_tol is None else rel_tol
    s = svd(W)
    if s.sigma[0] == 0:
        return np.zeros(W.shape[::-1], dtype=W.dtype)
    keep = s.sigma > rel_tol * s.sigma[0]
    return (s.T[:, keep] / s.sigma[keep]) @ herm(s.S[:, keep])

def numerical_rank(W, tol=None):
    tol = flags.rank_tol if tol is None else tol
    return int(np.sum(svdvals(W) > tol))

def is_rank_deficient(W, r, rtol=None):
    """True when σ_r(W) ≤ rtol·σ_1(W) (or W is zero or too small for rank r)."""
    rtol = flags.generator_rtol if rtol is None else rtol
    if min(W.shape) < r:
        return True
    sv = svdvals(W)
    return bool(sv[0] == 0 or sv[r-1] <= rtol * sv[0])

def sigma_tail(W, r, kind="spectral"):
    """Eckart-Young floor σ̃_{r+1}: the smallest error of a rank-r approximant."""
    sv = svdvals(W)
    if kind == "spectral":
        return float(sv[r]) if r < len(sv) else 0.0
    if kind == "frobenius":
        return float(np.sqrt(np.sum(sv[r:]**2)))
    raise ArgumentError(f"sigma_tail supports spectral or frobenius, got {kind}")

def volume(W):
    return float(np.prod(svdvals(W)))

def projective_volume(W, r):
    if not 1 <= r <= min(np.shape(W)):
        raise ArgumentError(f"r={r} outside [1, {min(np.shape(W))}]")
    return float(np.prod(svdvals(W)[:r]))

def log_volume(W):
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(svdvals(W))))

def log_projective_volume(W, r):
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(svdvals(W)[:r])))

def pinv_product_bound_check(G, Sigma, H, rtol=None):
    """‖(GΣH)⁺‖ ≤ ‖G⁺‖·‖Σ⁺‖·‖H⁺‖ for full-rank factors."""
    G, Sigma, H = as_mat(G), as_mat(Sigma), as_mat(H)
    r = Sigma.shape[0]
    if Sigma.shape != (r, r) or G.shape[1] != r or H.shape[0] != r:
        raise ArgumentError(f"Inconsistent shapes {G.shape}, {Sigma.shape}, {H.shape}")
    rtol = 1e-14 if rtol is None else rtol
    for name, M in (("G", G), ("Sigma", Sigma), ("H", H)):
        if is_rank_deficient(M, r, rtol):
            raise ArgumentError(f"{name} is not of full rank {r}")
    lhs = 1 / svdvals(G @ Sigma @ H)[r-1]
    rhs = 1 / (svdvals(G)[r-1] * svdvals(Sigma)[r-1] * svdvals(H)[r-1])
    return bool(lhs <= rhs * (1 + 1e-10))


class CountingMatrix:
    """Read access to a matrix with an entry counter.

    Pipelines read W only through ``rows``, ``cols``, ``block`` and
    ``entries``, so ``touched`` is the number of entries a run looked at.
    ``dense()`` returns the whole matrix and counts all m·n entries.

    example::

        A = CountingMatrix(W)
        C = A.cols([0, 3])
        print(A.touched)  # 2*m
    """
    def __init__(self, W):
        self.W = as_mat(W)
        self.shape = self.W.shape
        self.dtype = self.W.dtype
        self.touched = 0

    @property
    def field(self):
        return field_of(self.W)

    def rows(self, I):
        I = np.asarray(I, dtype=np.int64)
        self.touched += len(I) * self.shape[1]
        return self.W[I, :]

    def cols(self, J):
        J = np.asarray(J, dtype=np.int64)
        self.touched += self.shape[0] * len(J)
        return self.W[:, J]

    def block(self, I, J):
        I = np.asarray(I, dtype=np.int64)
        J = np.asarray(J, dtype=np.int64)
        self.touched += len(I) * len(J)
        return self.W[np.ix_(I, J)]

    entries = block

    def dense(self):
        LOG.vv(f"dense read of a {self.shape} matrix")
        self.touched += self.shape[0] * self.shape[1]
        return self.W

    def reset(self):
        self.touched = 0

def as_counting(W):
    return W if isinstance(W, CountingMatrix) else CountingMatrix(W)
