# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass
import numpy as np
import scipy.linalg
from supercur_utils import LOG, flags
from .errors import (ArgumentError, CurError, RankMismatchError,
    SingularGeneratorError, UnluckySamplingError)
from .generators import make_rng
from .matcore import (TopSvd, as_counting, as_mat, herm, index_set,
    is_rank_deficient, svd, truncate)
from .maxvol import projective_maxvol, t_factor
from .sampling import (LeverageScores, SamplingPair, get_sampler,
    leverage_scores_from_basis, leverage_select, sample_exactly_l,
    sample_expected_l)
from .skeleton import CurLra, canonical_nucleus

__all__ = ["PipelineSpec", "LeverageScores", "SamplingPair", "primitive_cur",
    "cynical_cur", "cross_approximation", "ca_cynical_cur",
    "leverage_scores_from_basis", "sample_exactly_l", "sample_expected_l",
    "cur_via_leverage", "lra_to_top_svd", "top_svd_to_cur", "refine_lra",
    "leverage_score_error", "run_pipeline"]

VARIANTS = ("primitive", "cynical", "cross_approx", "ca_cynical", "leverage", "svd_to_cur")
SUBALGS = ("lu", "qr", "greedy", "dmm")

class DegenerateSample(CurError):
    pass

@dataclass
class PipelineSpec:
    variant: str = "primitive"
    r: int = 8
    k: int = 8
    l: int = 8
    q: int = 32
    s: int = 32
    loops: int = 5
    subalg: str = "lu"
    sampler: str = "exactly_l"
    scores: str = "uniform"
    beta: float = 1.0
    beta_bar: float = 1.0
    nucleus: str = "dmm"
    mode: str = "deterministic"

    def validate(self, m, n):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"Unknown pipeline variant: {self.variant}")
        if self.subalg not in SUBALGS:
            raise ArgumentError(f"Unknown sub-algorithm: {self.subalg}")
        if self.variant in ("cynical", "ca_cynical"):
            _check_chain(self.r, self.k, self.l, m, n, self.q, self.s)
        else:
            _check_chain(self.r, self.k, self.l, m, n)
        if self.loops < 1:
            raise ArgumentError(f"loops must be >= 1, got {self.loops}")
        return self


def _check_chain(r, k, l, m, n, q=None, s=None):
    q = m if q is None else q
    s = n if s is None else s
    if not (0 < r <= k <= q <= m and r <= l <= s <= n):
        raise ArgumentError(f"need 0 < r <= k <= q <= m and r <= l <= s <= n; "
            f"got r={r}, k={k}, l={l}, q={q}, s={s}, m={m}, n={n}")

def _retry(name, attempts, fn):
    attempts = flags.max_retries if attempts is None else attempts
    reasons = []
    for a in range(attempts):
        try:
            return fn(a)
        except (DegenerateSample, SingularGeneratorError) as e:
            reasons.append(str(e))
            LOG.v(f"{name}: attempt {a} drew a degenerate generator: {e}")
    raise UnluckySamplingError(f"{name}: {attempts} attempts drew degenerate generators",
        {"attempts": attempts, "reasons": reasons})

def _generator_cur(W, I, J, r, **meta):
    I, J = np.sort(I), np.sort(J)
    Wkl = W.block(I, J)
    if is_rank_deficient(Wkl, r):
        raise DegenerateSample(f"{len(I)}x{len(J)} generator has numerical rank below {r}")
    U = canonical_nucleus(Wkl, r)
    return CurLra(I, J, U, r, W.shape, meta)

def _select(sketch, r, count, subalg, rng):
    """``count`` columns of a numerically rank-r sketch."""
    n = sketch.shape[1]
    if count == n:
        return np.arange(n)
    if subalg == "dmm":
        return leverage_select(sketch, r, count, rng)
    try:
        return projective_maxvol(sketch, r, count, core=subalg, check_rank=False)
    except (ArgumentError, np.linalg.LinAlgError) as e:
        raise DegenerateSample(f"selection on a {sketch.shape} sketch failed: {e}") from e

def _select_rows(sketch, r, count, subalg, rng):
    return _select(sketch.T, r, count, subalg, rng)

def _finish_meta(cur, W, **extra):
    cur.meta.update(entries=W.touched, **extra)
    return cur


def primitive_cur(W, r, k, l, rng=None, attempts=None):
    """Uniformly random k rows and l columns, canonical nucleus."""
    W = as_counting(W)
    m, n = W.shape
    _check_chain(r, k, l, m, n)
    rng = make_rng(rng)
    def attempt(a):
        I = rng.choice(m, k, replace=False)
        J = rng.choice(n, l, replace=False)
        return _generator_cur(W, I, J, r, attempts=a + 1)
    return _finish_meta(_retry("primitive", attempts, attempt), W)

def cynical_cur(W, r, q, s, k, l, rng=None, subalg=None, attempts=None):
    """Random q×s sketch, then a k×l generator of locally maximal volume inside it."""
    W = as_counting(W)
    m, n = W.shape
    _check_chain(r, k, l, m, n, q, s)
    subalg = subalg or flags.subalg
    rng = make_rng(rng)
    def attempt(a):
        K = np.sort(rng.choice(m, q, replace=False))
        L = np.sort(rng.choice(n, s, replace=False))
        S = W.block(K, L)
        rows = _select_rows(S, r, k, subalg, rng)
        cols = _select(S[rows, :], r, l, subalg, rng)
        return _generator_cur(W, K[rows], L[cols], r, attempts=a + 1)
    return _finish_meta(_retry("cynical", attempts, attempt), W)

def cross_approximation(W, r, k, l, loops=None, rng=None, subalg=None,
        start_rows=None, attempts=None):
    """Alternating C-A loops: J from the k×n strip W[I, :], then I from the
    m×l strip W[:, J]. Stops at a fixed point of the row set."""
    W = as_counting(W)
    m, n = W.shape
    _check_chain(r, k, l, m, n)
    loops = flags.ca_loops if loops is None else loops
    if loops < 1:
        raise ArgumentError(f"loops must be >= 1, got {loops}")
    subalg = subalg or flags.subalg
    rng = make_rng(rng)
    def attempt(a):
        if start_rows is not None and a == 0:
            I = index_set(start_rows, m)
            if len(I) != k:
                raise ArgumentError(f"start_rows must hold {k} rows")
        else:
            I = np.sort(rng.choice(m, k, replace=False))
        J = None
        reseeds = 0
        stable_after = None
        for loop in range(loops):
            try:
                J = np.sort(_select(W.rows(I), r, l, subalg, rng))
            except DegenerateSample as e:
                reseeds += 1
                LOG.w(f"C-A loop {loop}: row strip collapsed ({e}), reseeding rows")
                I = np.sort(rng.choice(m, k, replace=False))
                continue
            try:
                I_new = np.sort(_select_rows(W.cols(J), r, k, subalg, rng))
            except DegenerateSample as e:
                reseeds += 1
                LOG.w(f"C-A loop {loop}: column strip collapsed ({e}), reseeding columns")
                J = np.sort(rng.choice(n, l, replace=False))
                try:
                    I_new = np.sort(_select_rows(W.cols(J), r, k, subalg, rng))
                except DegenerateSample:
                    J = None
                    I = np.sort(rng.choice(m, k, replace=False))
                    continue
            if np.array_equal(I_new, I):
                stable_after = loop + 1
                LOG.v(f"C-A fixed point after {loop + 1} loops")
                break
            I = I_new
        if J is None:
            raise DegenerateSample("no admissible column set after all loops")
        return _generator_cur(W, I, J, r, attempts=a + 1, reseeds=reseeds,
            loops_run=loop + 1, stable_after=stable_after)
    return _finish_meta(_retry("cross_approximation", attempts, attempt), W)

def ca_cynical_cur(W, r, q, s, k=None, l=None, rng=None, subalg=None, attempts=None):
    """One C-A pass on q×s-sized strips from random columns, then a k×l
    generator of locally maximal volume inside the q×s intersection."""
    W = as_counting(W)
    m, n = W.shape
    k = r if k is None else k
    l = r if l is None else l
    _check_chain(r, k, l, m, n, q, s)
    subalg = subalg or flags.subalg
    rng = make_rng(rng)
    def attempt(a):
        L = np.sort(rng.choice(n, s, replace=False))
        K = np.sort(_select_rows(W.cols(L), r, q, subalg, rng))
        H = W.rows(K)
        L = np.sort(_select(H, r, s, subalg, rng))
        S = H[:, L]
        rows = _select_rows(S, r, k, subalg, rng)
        cols = _select(S[rows, :], r, l, subalg, rng)
        return _generator_cur(W, K[rows], L[cols], r, attempts=a + 1)
    return _finish_meta(_retry("ca_cynical", attempts, attempt), W)


def _collapse(U, row_idx, col_idx):
    # C·U·R with repeated indices -> nucleus over unique index sets
    Iu, inv_r = np.unique(row_idx, return_inverse=True)
    Ju, inv_c = np.unique(col_idx, return_inverse=True)
    tmp = np.zeros((len(Ju), U.shape[1]), dtype=U.dtype)
    np.add.at(tmp, inv_c, U)
    out = np.zeros((len(Iu), len(Ju)), dtype=U.dtype)
    np.add.at(out, inv_r, tmp.T)
    return Iu, Ju, out.T

def _truncated_pinv(M, r):
    t = truncate(svd(M), r)
    keep = t.sigma > flags.pinv_rtol * t.sigma[0]
    return (t.T[:, keep] / t.sigma[keep]) @ herm(t.S[:, keep])

def cur_via_leverage(W, r, k, l, sampler="exactly_l", scores="svd_based", rng=None,
        beta=1.0, beta_bar=1.0, nucleus="dmm", column_scores=None, attempts=None):
    """CUR by leverage-score sampling of columns, then of rows.

    Column scores come from the top-r right singular vectors of W (reads all
    of W), from ``column_scores``, or are uniform (``scores="uniform"``, fully
    sublinear). Row scores come from the left singular vectors of C·D. The
    nucleus is D·M⁺·D̄ with M = D̄·S̄ᵀ·W·S·D (``nucleus="dmm"``) or
    (S̄ᵀ·W·S)⁺ (``nucleus="simple"``); both pseudo-inverses are taken of the
    rank-r truncation.
    """
    W = as_counting(W)
    m, n = W.shape
    _check_chain(r, k, l, m, n)
    if scores not in ("svd_based", "uniform"):
        raise ArgumentError(f"Unknown scores mode: {scores}")
    if nucleus not in ("dmm", "simple"):
        raise ArgumentError(f"Unknown nucleus: {nucleus}")
    sample = get_sampler(sampler)
    rng = make_rng(rng)
    exempt = False
    if column_scores is not None:
        p = column_scores
        if p.n != n:
            raise ArgumentError(f"column scores cover {p.n} columns, W has {n}")
    elif scores == "uniform":
        p = LeverageScores.uniform(n)
    else:
        exempt = True
        p = leverage_scores_from_basis(svd(W.dense()).T[:, :r], beta)
    def attempt(a):
        cs = sample(p, l, rng)
        if len(np.unique(cs.indices)) < r:
            raise DegenerateSample(f"{len(cs.indices)} sampled columns, fewer than r={r} distinct")
        C = W.cols(cs.indices)
        if scores == "uniform" and column_scores is None:
            pr = LeverageScores.uniform(m)
        else:
            CD = C * cs.scales
            if is_rank_deficient(CD, r):
                raise DegenerateSample(f"sampled columns have rank below {r}")
            pr = leverage_scores_from_basis(svd(CD).S[:, :r], beta_bar)
        rs = sample(pr, k, rng)
        if len(np.unique(rs.indices)) < r:
            raise DegenerateSample(f"{len(rs.indices)} sampled rows, fewer than r={r} distinct")
        G = C[rs.indices, :]
        M = rs.scales[:, None] * G * cs.scales[None, :]
        if is_rank_deficient(M, r):
            raise DegenerateSample(f"sampled generator has rank below {r}")
        if nucleus == "dmm":
            U = cs.scales[:, None] * _truncated_pinv(M, r) * rs.scales[None, :]
        else:
            U = _truncated_pinv(G, r)
        Iu, Ju, Uc = _collapse(U, rs.indices, cs.indices)
        return CurLra(Iu, Ju, Uc, r, (m, n), {"attempts": a + 1,
            "sampled_rows": len(rs.indices), "sampled_cols": len(cs.indices)})
    cur = _retry("cur_via_leverage", attempts, attempt)
    return _finish_meta(cur, W, full_read=exempt)

def lra_to_top_svd(A, V, B, r):
    """Top-r SVD of A·V·B from QRP factorizations of A (m×l) and Bᴴ (n×k)
    and the SVD of the small core R_A·V·R_Bᴴ."""
    A, V, B = as_mat(A), as_mat(V), as_mat(B)
    if A.shape[1] != V.shape[0] or V.shape[1] != B.shape[0]:
        raise ArgumentError(f"Inconsistent shapes {A.shape}, {V.shape}, {B.shape}")
    if not 1 <= r <= min(V.shape):
        raise ArgumentError(f"r={r} outside [1, min(k,l)={min(V.shape)}]")
    QA, RA, PA = scipy.linalg.qr(A, mode="economic", pivoting=True, check_finite=False)
    QB, RB, PB = scipy.linalg.qr(herm(B), mode="economic", pivoting=True, check_finite=False)
    core = RA[:, np.argsort(PA)] @ V @ herm(RB[:, np.argsort(PB)])
    c = svd(core)
    found = int(np.sum(c.sigma > 1e-12 * c.sigma[0])) if c.sigma[0] > 0 else 0
    if found < r:
        raise RankMismatchError(f"LRA has revealed rank {found} < {r}", r, found)
    c = truncate(c, r)
    return TopSvd(QA @ c.S, c.sigma, QB @ c.T)

def _svd_select(basis, r, count, mode, rng):
    # rows of an orthonormal m×r basis
    if mode == "deterministic":
        return projective_maxvol(basis.T, r, count, core="qr", check_rank=False)
    idx = sample_exactly_l(leverage_scores_from_basis(basis), count, rng).indices
    idx = np.unique(idx)
    if len(idx) < r:
        raise DegenerateSample(f"only {len(idx)} distinct indices drawn")
    return idx

def top_svd_to_cur(W, top, k, l, mode="deterministic", rng=None, h=None, attempts=None):
    """CUR from a top SVD: rows from S and columns from T by strong
    rank-revealing selection (deterministic) or Exactly(l) sampling on
    their row norms (sampled)."""
    W = as_counting(W)
    m, n = W.shape
    r = top.r
    _check_chain(r, k, l, m, n)
    if mode not in ("deterministic", "sampled"):
        raise ArgumentError(f"Unknown mode: {mode}")
    if top.S.shape[0] != m or top.T.shape[0] != n:
        raise RankMismatchError(f"SVD factors {top.S.shape}, {top.T.shape} do not fit {W.shape}")
    h = flags.select_h if h is None else h
    rng = make_rng(rng)
    def attempt(a):
        I = _svd_select(top.S, r, k, mode, rng)
        J = _svd_select(top.T, r, l, mode, rng)
        return _generator_cur(W, I, J, r, attempts=a + 1)
    cur = _retry("top_svd_to_cur", 1 if mode == "deterministic" else attempts, attempt)
    if top.sigma[-1] > 0:
        cur.meta["nucleus_bound"] = t_factor(m, min(l, m), h) * t_factor(n, min(k, n), h) / top.sigma[-1]
    return _finish_meta(cur, W)

def refine_lra(W, crude, r, k, l, rng=None, sampler="exactly_l", attempts=None):
    """Leverage-score CUR of W with column scores taken from a crude LRA A·B."""
    A, B = crude
    A, B = as_mat(A), as_mat(B)
    if A.shape[1] < r:
        raise RankMismatchError(f"crude LRA has inner dimension {A.shape[1]} < {r}", r, A.shape[1])
    top = lra_to_top_svd(A, np.eye(A.shape[1]), B, r)
    p = leverage_scores_from_basis(top.T)
    return cur_via_leverage(W, r, k, l, sampler, "svd_based", rng,
        column_scores=p, attempts=attempts)

def leverage_score_error(W, A, B, r):
    """max_j |p_j(W) − p_j(A·B)| for rank-r SVD-based column scores. Dense."""
    W = as_mat(W)
    pw = leverage_scores_from_basis(svd(W).T[:, :r]).p
    pa = leverage_scores_from_basis(lra_to_top_svd(A, np.eye(as_mat(A).shape[1]), B, r).T).p
    return float(np.abs(pw - pa).max())

def run_pipeline(W, spec, rng=None):
    W = as_counting(W)
    m, n = W.shape
    spec = spec.validate(m, n)
    v = spec.variant
    if v == "primitive":
        return primitive_cur(W, spec.r, spec.k, spec.l, rng)
    if v == "cynical":
        return cynical_cur(W, spec.r, spec.q, spec.s, spec.k, spec.l, rng, spec.subalg)
    if v == "cross_approx":
        return cross_approximation(W, spec.r, spec.k, spec.l, spec.loops, rng, spec.subalg)
    if v == "ca_cynical":
        return ca_cynical_cur(W, spec.r, spec.q, spec.s, spec.k, spec.l, rng, spec.subalg)
    if v == "leverage":
        return cur_via_leverage(W, spec.r, spec.k, spec.l, spec.sampler, spec.scores, rng,
            spec.beta, spec.beta_bar, spec.nucleus)
    top = truncate(svd(W.dense()), spec.r)
    return top_svd_to_cur(W, top, spec.k, spec.l, spec.mode, rng)
