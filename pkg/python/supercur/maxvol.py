# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass, field
import itertools
import numpy as np
import scipy.linalg
from supercur_utils import LOG, flags
from .errors import ArgumentError, RankMismatchError
from .matcore import (as_mat, herm, index_set, is_rank_deficient, log_volume,
    log_projective_volume, svdvals)

@dataclass(frozen=True)
class MaxvolResult:
    """``certificate`` is max|B⁻¹A| at termination; ``converged`` is False
    when the iteration cap stopped the search (best-so-far set returned)."""
    selected: np.ndarray
    iterations: int
    log_volume: float
    certificate: float
    converged: bool = True
    order: tuple = field(default=(), compare=False)


def t_factor(p, r, h):
    return float(np.sqrt((p - r) * r * h * h + 1))

def _pick(scores, rtol=None):
    """argmax with the smallest index winning among near-ties."""
    rtol = flags.tie_rtol if rtol is None else rtol
    best = scores.max()
    return int(np.flatnonzero(scores >= best * (1 - rtol))[0])

def _pick_entry(absC, rtol=None):
    # smallest column first, then smallest row
    rtol = flags.tie_rtol if rtol is None else rtol
    best = absC.max()
    i, j = np.nonzero(absC >= best * (1 - rtol))
    t = np.lexsort((i, j))[0]
    return int(i[t]), int(j[t])

def dominant_submatrix(A, start, swap_tol=None, max_iter=None):
    A = as_mat(A)
    r, n = A.shape
    swap_tol = flags.swap_tol if swap_tol is None else swap_tol
    max_iter = 10 * n * r if max_iter is None else max_iter
    J = [int(j) for j in start]
    index_set(J, n)
    if len(J) != r:
        raise ArgumentError(f"start must have {r} columns, got {len(J)}")
    if is_rank_deficient(A[:, J], r, 1e-14):
        raise ArgumentError(f"start block {J} is singular")
    C = scipy.linalg.solve(A[:, J], A)
    logv = log_volume(A[:, J])
    it = 0
    converged = True
    while True:
        absC = np.abs(C)
        cmax = absC.max()
        if cmax <= 1 + swap_tol:
            break
        if it >= max_iter:
            LOG.w(f"dominant_submatrix hit the iteration cap {max_iter}, |c|max={cmax:g}")
            converged = False
            break
        i, j = _pick_entry(absC)
        cij = C[i, j]
        gain = np.log(np.abs(cij))
        assert gain >= np.log1p(swap_tol / 2), f"swap does not increase volume: {gain}"
        u = C[:, j].copy()
        u[i] -= 1
        C -= np.outer(u, C[i, :] / cij)
        LOG.vv(f"swap {it}: column {J[i]} -> {j}, |c|={abs(cij):.6g}, log-volume {logv:.6g} -> {logv+gain:.6g}")
        J[i] = j
        logv += gain
        it += 1
        if it % (4 * r) == 0:
            # refresh against rounding drift
            C = scipy.linalg.solve(A[:, J], A)
    return MaxvolResult(index_set(J, n), it, log_volume(A[:, J]),
        float(np.abs(C).max()), converged, tuple(J))

def lup_ca(A, max_iter=None):
    """Dominant r×r block of a rank-r matrix A (r×n), started from the
    column pivots of an LU factorization."""
    A = as_mat(A)
    r, n = A.shape
    if r > n or is_rank_deficient(A, r, 1e-10):
        raise ArgumentError(f"lup_ca needs numerical rank {r} for a {r}x{n} matrix")
    P = scipy.linalg.lu(A.T, check_finite=False)[0]
    start = P.argmax(axis=0)[:r]
    return dominant_submatrix(A, start, max_iter=max_iter)


class GreedyState:
    """Greedy column growth of an r×n matrix by Householder updates.

    ``work`` holds Q·W where Q is the accumulated orthogonal factor, so the
    selected columns of ``work`` form an upper triangular factor with a
    positive diagonal.
    """
    def __init__(self, W):
        W = as_mat(W)
        self.W = W
        self.r, self.n = W.shape
        self.work = W.copy()
        self.Q = np.eye(self.r, dtype=W.dtype)
        self.cols = []
        self.diag = []
        self._steps = []
        self.flops = 0
        self.degenerate = False

    @property
    def g(self):
        return len(self.cols)

    @property
    def R(self):
        return self.work[:self.g, self.cols]

    @property
    def log_volume(self):
        with np.errstate(divide="ignore"):
            return float(np.sum(np.log(self.diag)))

    def step(self):
        g, r = self.g, self.r
        assert g < r, "greedy growth is limited to r columns"
        rest = np.setdiff1d(np.arange(self.n), self.cols)
        sub = self.work[g:, rest]
        scores = np.sum(np.abs(sub)**2, axis=0)
        self.flops += 2 * (r - g) * len(rest)
        if scores.max() == 0:
            self.degenerate = True
            j = int(rest[0])
        else:
            j = int(rest[_pick(scores)])
        x = self.work[g:, j].copy()
        alpha = np.linalg.norm(x)
        v = phase = None
        if alpha > 0:
            s = x[0] / abs(x[0]) if x[0] != 0 else 1.0
            v = x
            v[0] += s * alpha
            v /= np.linalg.norm(v)
            for M in (self.work, self.Q):
                M[g:, :] -= 2 * np.outer(v, v.conj() @ M[g:, :])
            self.flops += 4 * (r - g) * (self.n - g)
            phase = self.work[g, j] / alpha
            self.work[g, :] /= phase
            self.Q[g, :] /= phase
        self._steps.append((v, phase))
        self.cols.append(j)
        self.diag.append(alpha)
        return j

    def pop(self):
        """Drop the last column; the volume shrinks by exactly its diagonal entry."""
        g = self.g - 1
        v, phase = self._steps.pop()
        if v is not None:
            self.work[g, :] *= phase
            self.Q[g, :] *= phase
            for M in (self.work, self.Q):
                M[g:, :] -= 2 * np.outer(v, v.conj() @ M[g:, :])
        self.diag.pop()
        return self.cols.pop()

def greedy_grow_tall(W, q, return_state=False):
    W = as_mat(W)
    r, n = W.shape
    if not 1 <= q <= min(r, n):
        raise ArgumentError(f"q={q} outside [1, min(r,n)={min(r, n)}]")
    state = GreedyState(W)
    for _ in range(q):
        state.step()
    if state.degenerate:
        LOG.w(f"greedy_grow_tall: degenerate {r}x{n} input, zero residual reached")
    out = index_set(state.cols, n)
    if return_state:
        return out, dict(order=tuple(state.cols), log_volume=state.log_volume,
            degenerate=state.degenerate)
    return out

def _wide_scores(W, cols, rest):
    C = W[:, cols]
    L = scipy.linalg.cholesky(C @ herm(C), lower=True)
    M = scipy.linalg.solve_triangular(L, W[:, rest], lower=True)
    return np.sum(np.abs(M)**2, axis=0)

def greedy_grow_wide(W, start, q, return_state=False):
    """Append columns to the nonsingular r×r block W[:, start] one at a
    time, each maximizing v₂²(B) = v₂²(A)·(1 + b*(AA*)⁻¹b)."""
    W = as_mat(W)
    r, n = W.shape
    cols = [int(j) for j in start]
    index_set(cols, n)
    if len(cols) != r:
        raise ArgumentError(f"start must have {r} columns, got {len(cols)}")
    if not r < q <= n:
        raise ArgumentError(f"q={q} outside ({r}, {n}]")
    if is_rank_deficient(W[:, cols], r, 1e-14):
        raise ArgumentError(f"start block {cols} is singular")
    logv = log_volume(W[:, cols])
    degenerate = False
    while len(cols) < q:
        rest = np.setdiff1d(np.arange(n), cols)
        scores = _wide_scores(W, cols, rest)
        if scores.max() == 0:
            degenerate = True
            j = int(rest[0])
        else:
            j = int(rest[_pick(scores)])
        logv += 0.5 * np.log1p(scores.max())
        cols.append(j)
    if degenerate:
        LOG.w("greedy_grow_wide: remaining columns are zero, volume unchanged")
    out = index_set(cols, n)
    if return_state:
        return out, dict(order=tuple(cols), log_volume=logv, degenerate=degenerate)
    return out

def wide_contract(W, cols, j):
    """Remove column ``j`` from the wide block W[:, cols].

    Returns the remaining columns and log(v₂(A)/v₂(B)) = ½·log(1 − ‖B⁺b‖²).
    """
    W = as_mat(W)
    cols = [int(c) for c in cols]
    if j not in cols:
        raise ArgumentError(f"column {j} not in {cols}")
    B = W[:, cols]
    b = W[:, j]
    lev = np.real(b.conj() @ scipy.linalg.solve(B @ herm(B), b, assume_a="pos"))
    rest = [c for c in cols if c != j]
    with np.errstate(divide="ignore"):
        return rest, 0.5 * float(np.log(max(1 - lev, 0.0)))

def _revealed_block(W, r):
    # r×n triangular factor of a rank-revealing QRP, columns in original order
    k = W.shape[0]
    if k == r:
        return W
    _, R, P = scipy.linalg.qr(W, mode="economic", pivoting=True, check_finite=False)
    return R[:r, np.argsort(P)]

def _core_select(A, core):
    """r columns of the rank-r matrix A (r×n) with locally maximal volume."""
    if core == "lu":
        return lup_ca(A).order
    if core == "greedy":
        start = GreedyState(A)
        for _ in range(A.shape[0]):
            start.step()
        return dominant_submatrix(A, start.cols).order
    if core == "qr":
        return tuple(_strong_rrqr(A, A.shape[0], flags.select_h))
    raise ArgumentError(f"Unknown selection core: {core}")

def projective_maxvol(W, r, l, core="lu", check_rank=True):
    """l columns of W (k×n) with locally maximal r-projective volume.

    A rank-revealing QRP reduces W to its r×n triangular factor R′, whose
    column volumes are proportional to the r-projective volumes of W; R′ then
    gets an r×r maximal-volume block which is grown greedily to l columns.
    """
    W = as_mat(W)
    k, n = W.shape
    if not (1 <= r <= k and r <= l <= n):
        raise ArgumentError(f"need r <= k and r <= l <= n, got r={r}, k={k}, l={l}, n={n}")
    if check_rank:
        sv = svdvals(W)
        found = int(np.sum(sv > flags.select_rank_rtol * sv[0])) if sv[0] > 0 else 0
        if found != r:
            raise RankMismatchError(f"numerical rank {found} != {r}", r, found)
    A = _revealed_block(W, r)
    order = _core_select(A, core)
    if l == r:
        return index_set(order, n)
    return greedy_grow_wide(A, order, l)

def projective_maxvol_rows(W, r, k, core="lu", check_rank=True):
    return projective_maxvol(as_mat(W).T, r, k, core, check_rank)

select_cols = projective_maxvol
select_rows = projective_maxvol_rows

def _strong_rrqr(A, r, h, max_swaps=None):
    """Column indices of A (p×N) for a strong rank-revealing QR:
    |R11⁻¹R12|_ij² + (γ_j(R22)·‖row_i(R11⁻¹)‖)² ≤ h² for all i, j."""
    p, N = A.shape
    _, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True, check_finite=False)
    if r >= N:
        return perm[:r]
    max_swaps = 10 * N * r if max_swaps is None else max_swaps
    for it in range(max_swaps):
        R11 = R[:r, :r]
        if np.abs(np.diag(R11)).min() <= 1e-14 * np.abs(R11[0, 0]):
            break
        AB = scipy.linalg.solve_triangular(R11, R[:r, r:])
        if R.shape[0] > r:
            gamma = np.linalg.norm(R[r:, r:], axis=0)
        else:
            gamma = np.zeros(N - r)
        omega = np.linalg.norm(scipy.linalg.solve_triangular(R11, np.eye(r)), axis=1)
        score = np.sqrt(np.abs(AB)**2 + np.outer(omega, gamma)**2)
        if score.max() <= h:
            break
        i, j = _pick_entry(score)
        LOG.vv(f"rrqr swap {it}: {perm[i]} <-> {perm[r+j]}, score {score[i, j]:.6g}")
        perm[i], perm[r + j] = perm[r + j], perm[i]
        R = scipy.linalg.qr(A[:, perm], mode="r", check_finite=False)[0]
    return perm[:r]

def rrqr_select(W, r, h=None, backend=None):
    """r rows of W (m×l) with σ_r(W[I, :]) ≥ σ_r(W)/t_{m,r,h} (checked
    empirically). ``backend`` is "qr" (strong RRQR) or "lu" (dominant rows
    of an orthonormal basis)."""
    W = as_mat(W)
    m, l = W.shape
    h = flags.select_h if h is None else h
    backend = backend or "qr"
    if not 1 <= r <= min(m, l):
        raise ArgumentError(f"r={r} outside [1, min(m,l)={min(m, l)}]")
    if r == m:
        return index_set(np.arange(m), m)
    if backend == "qr":
        return index_set(_strong_rrqr(herm(W), r, h), m)
    if backend == "lu":
        Q = scipy.linalg.qr(W, mode="economic", pivoting=True, check_finite=False)[0]
        return lup_ca(Q[:, :r].T).selected
    raise ArgumentError(f"Unknown rrqr backend: {backend}")

def rrqr_select_cols(W, r, h=None, backend=None):
    return rrqr_select(as_mat(W).T, r, h, backend)

def exhaustive_maxvol(W, k=None, l=None, r=None):
    """Brute-force (rows, cols, volume) of the k×l submatrix with maximal
    r-projective volume. Small matrices only."""
    W = as_mat(W)
    m, n = W.shape
    k = m if k is None else k
    l = n if l is None else l
    r = min(k, l) if r is None else r
    best = (None, None, -np.inf)
    for I in itertools.combinations(range(m), k):
        for J in itertools.combinations(range(n), l):
            v = log_projective_volume(W[np.ix_(I, J)], r)
            if best[0] is None or v > best[2] + 1e-12:
                best = (I, J, v)
    return best[0], best[1], float(np.exp(best[2]))
