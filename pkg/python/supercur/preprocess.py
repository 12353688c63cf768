# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
from dataclasses import dataclass, field
from typing import Optional
import numpy as np
from supercur_utils import LOG, flags
from .errors import ArgumentError
from .generators import make_rng
from .matcore import as_counting, as_mat, herm, pinv
from .pipelines import (DegenerateSample, _check_chain, _generator_cur, _retry,
    _select, _select_rows, cur_via_leverage)
from .skeleton import posterior_error_sampled

KINDS = ("gaussian", "srht", "srft", "arht", "arft", "quasi_gaussian")

@dataclass
class MultiplierSpec:
    kind: str = "gaussian"
    n: int = 0
    u: Optional[int] = None
    l: Optional[int] = None
    d: Optional[int] = None
    T: int = 20


def next_pow2(n):
    return 1 << max(0, int(np.ceil(np.log2(n))))

def _padded(n):
    N = next_pow2(n)
    if N != n:
        if flags.pad_policy != "pad":
            raise ArgumentError(f"n={n} is not a power of two and pad_policy={flags.pad_policy}")
        LOG.w(f"zero-padding n={n} to {N} for a power-of-two transform")
    return N

def _bitrev(d):
    return np.array([int(format(b, f"0{d}b")[::-1], 2) if d else 0 for b in range(1 << d)])


class StructuredOp:
    """A linear map M (n_out×n_in) applied without forming it.

    As a right multiplier of W the op stands for H = Mᵀ (n_in×n_out), so
    ``sketch(W)`` is W·H. ``gram_scale`` is c with HᴴH = c·I (or HHᴴ = c·I
    for wide H) when such a c exists, which makes H⁺ = Hᴴ/c.
    """
    kind = "op"
    gram_scale = None

    def __init__(self, n_in, n_out):
        self.n_in = n_in
        self.n_out = n_out
        self.flops = 0

    @property
    def shape(self):
        return (self.n_out, self.n_in)

    def apply(self, x):
        return self.apply_to_columns(np.asarray(x).reshape(-1, 1)).reshape(-1)

    def apply_to_columns(self, X):
        X = np.asarray(X)
        assert X.shape[0] == self.n_in, f"expected {self.n_in} rows, got {X.shape[0]}"
        return self._forward(X)

    def apply_adjoint_to_columns(self, Y):
        Y = np.asarray(Y)
        assert Y.shape[0] == self.n_out, f"expected {self.n_out} rows, got {Y.shape[0]}"
        return self._adjoint(Y)

    def dense(self):
        """Densified M. Audit only."""
        return self.apply_to_columns(np.eye(self.n_in))

    def multiplier(self):
        return self.dense().T

    def sketch(self, W):
        return self.apply_to_columns(as_mat(W).T).T

    def multiplier_columns(self, J):
        # H[:, J] = conj(Mᴴ conj(E_J))
        E = np.zeros((self.n_out, len(J)))
        E[np.asarray(J), np.arange(len(J))] = 1
        return self.apply_adjoint_to_columns(E).conj()

    def pinv_right(self, R_H):
        """R_H·H⁺ for R_H with n_out columns."""
        R_H = np.asarray(R_H)
        if self.gram_scale is not None:
            return self.apply_adjoint_to_columns(R_H.T).T / self.gram_scale
        LOG.v(f"{self.kind}: dense pseudo-inverse of a {self.n_in}x{self.n_out} multiplier")
        return R_H @ pinv(self.multiplier())


class _RandomizedTransform(StructuredOp):
    """D·T·P on zero-padded input, optionally row-sampled and scaled."""
    def __init__(self, n, d, rng, complex_signs, sample=None, randomize=True):
        self.N = _padded(n)
        K = int(np.log2(self.N))
        if d is None:
            d = K
        if not 1 <= d <= max(K, 1):
            raise ArgumentError(f"depth d={d} outside [1, {K}]")
        self.d = d
        rng = make_rng(rng)
        if not randomize:
            self.signs = np.ones(self.N)
            self.perm = np.arange(self.N)
        elif complex_signs:
            self.signs = np.exp(2j * np.pi * rng.random(self.N))
            self.perm = rng.permutation(self.N)
        else:
            self.signs = rng.choice([-1.0, 1.0], size=self.N)
            self.perm = rng.permutation(self.N)
        self.rows = None
        self.scale = 1.0
        if sample is not None:
            if not 1 <= sample <= self.N:
                raise ArgumentError(f"l={sample} outside [1, {self.N}]")
            self.rows = np.sort(rng.choice(self.N, sample, replace=False))
            self.scale = np.sqrt(self.N / sample) / np.sqrt(float(1 << d))
        super().__init__(n, self.N if sample is None else sample)
        if sample is None:
            self.gram_scale = float(1 << d)
        elif self.N == n:
            self.gram_scale = self.N / sample

    def _forward(self, X):
        p = X.shape[1]
        Y = np.zeros((self.N, p), dtype=np.result_type(X, self.signs))
        Y[:self.n_in] = X
        Y = self._core(Y[self.perm])
        Y *= self.signs[:, None]
        if self.rows is not None:
            Y = Y[self.rows] * self.scale
        return Y

    def _adjoint(self, Y):
        p = Y.shape[1]
        Z = np.zeros((self.N, p), dtype=np.result_type(Y, self.signs))
        if self.rows is not None:
            Z[self.rows] = Y * self.scale
        else:
            Z[:] = Y
        Z = self._core_adjoint(Z * self.signs.conj()[:, None])
        out = np.empty_like(Z)
        out[self.perm] = Z
        return out[:self.n_in]


class HadamardOp(_RandomizedTransform):
    """H_{N,d} = H_{2^d} ⊗ I_s: d butterfly stages, 2^d nonzeros per row."""
    kind = "arht"

    def __init__(self, n, d, rng, sample=None, randomize=True):
        super().__init__(n, d, rng, False, sample, randomize)
        if sample is not None:
            self.kind = "srht"

    def _core(self, X):
        q = 1 << self.d
        p = X.shape[1]
        Y = X.reshape(q, -1)
        h = 1
        while h < q:
            Y = Y.reshape(q // (2 * h), 2, h, -1)
            Y = np.stack([Y[:, 0] + Y[:, 1], Y[:, 0] - Y[:, 1]], axis=1)
            self.flops += Y.size
            h *= 2
        return Y.reshape(self.N, p)

    _core_adjoint = _core


class FourierOp(_RandomizedTransform):
    """Decimation-in-frequency radix-2 DFT stopped after d levels, with the
    remaining size-s transforms replaced by the identity. Entry (i, j) of the
    full-depth transform is ω^{ij}, ω = exp(2πi/N)."""
    kind = "arft"

    def __init__(self, n, d, rng, sample=None, randomize=True):
        super().__init__(n, d, rng, True, sample, randomize)
        if sample is not None:
            self.kind = "srft"
        self._rev = _bitrev(self.d)

    def _core(self, X):
        p = X.shape[1]
        Y = X.astype(np.complex128).reshape(1, self.N, p)
        for _ in range(self.d):
            B, L, _ = Y.shape
            h = L // 2
            a, b = Y[:, :h], Y[:, h:]
            tw = np.exp(2j * np.pi * np.arange(h) / L)[None, :, None]
            # one add, one subtract, one twiddle multiply per butterfly
            self.flops += a.size + b.size + b.size
            Y = np.stack([a + b, (a - b) * tw], axis=1).reshape(2 * B, h, p)
        return Y[self._rev].transpose(1, 0, 2).reshape(self.N, p)

    def _core_adjoint(self, Z):
        p = Z.shape[1]
        q = 1 << self.d
        s = self.N >> self.d
        Y = Z.astype(np.complex128).reshape(s, q, p).transpose(1, 0, 2)[self._rev]
        for _ in range(self.d):
            B2, h, _ = Y.shape
            Y = Y.reshape(B2 // 2, 2, h, p)
            tw = np.exp(-2j * np.pi * np.arange(h) / (2 * h))[None, :, None]
            top, bot = Y[:, 0], Y[:, 1] * tw
            self.flops += top.size + top.size + bot.size
            Y = np.concatenate([top + bot, top - bot], axis=1)
        return Y.reshape(self.N, p)


class QuasiGaussianOp(StructuredOp):
    """Product B_1·P_1·…·B_T·P_T of unit-diagonal cyclic bidiagonal factors
    (random ±1 below the diagonal and in the top-right corner) and random
    permutations."""
    kind = "quasi_gaussian"

    def __init__(self, n, T, rng, identity_perm=False, signs=None):
        if T < 1:
            raise ArgumentError(f"T must be >= 1, got {T}")
        super().__init__(n, n)
        rng = make_rng(rng)
        self.factors = []
        for t in range(T):
            perm = np.arange(n) if identity_perm else rng.permutation(n)
            s = rng.choice([-1.0, 1.0], size=n) if signs is None else np.asarray(signs, float)
            self.factors.append((perm, s))

    @property
    def T(self):
        return len(self.factors)

    def factor_det(self, t):
        """det(B_t) = 1 + (−1)^{n+1}·∏ signs, so 0 or 2."""
        s = self.factors[t][1]
        return float(1 + (-1) ** (self.n_in + 1) * np.prod(s))

    def _forward(self, X):
        Y = np.array(X, dtype=np.result_type(X, float))
        for perm, s in reversed(self.factors):
            Y = Y[perm]
            Y = Y + s[:, None] * np.roll(Y, 1, axis=0)
        self.flops += 2 * self.n_in * self.T * X.shape[1]
        return Y

    def _adjoint(self, Y):
        Z = np.array(Y, dtype=np.result_type(Y, float))
        for perm, s in self.factors:
            Z = Z + np.roll(s[:, None] * Z, -1, axis=0)
            out = np.empty_like(Z)
            out[perm] = Z
            Z = out
        self.flops += 2 * self.n_in * self.T * Y.shape[1]
        return Z


class GaussianOp(StructuredOp):
    kind = "gaussian"

    def __init__(self, n, u, rng):
        super().__init__(n, u)
        self.M = make_rng(rng).standard_normal((u, n))

    def _forward(self, X):
        self.flops += 2 * self.M.size * X.shape[1]
        return self.M @ X

    def _adjoint(self, Y):
        self.flops += 2 * self.M.size * Y.shape[1]
        return herm(self.M) @ Y


def build_arht(n, d, rng, randomize=True):
    return HadamardOp(n, d, rng, randomize=randomize)

def build_arft(n, d, rng, randomize=True):
    return FourierOp(n, d, rng, randomize=randomize)

def build_srht(n, l, rng):
    if l > n:
        raise ArgumentError(f"l={l} exceeds n={n}")
    return HadamardOp(n, None, rng, sample=l)

def build_srft(n, l, rng):
    if l > n:
        raise ArgumentError(f"l={l} exceeds n={n}")
    return FourierOp(n, None, rng, sample=l)

def build_quasi_gaussian(n, T, rng):
    return QuasiGaussianOp(n, T, rng)

def build_gaussian(n, u, rng):
    return GaussianOp(n, u, rng)

def build_multiplier(spec, rng=None):
    k, n = spec.kind, spec.n
    if k not in KINDS:
        raise ArgumentError(f"Unknown multiplier kind: {k}")
    if n < 1:
        raise ArgumentError(f"multiplier needs n >= 1, got {n}")
    if k == "gaussian":
        return build_gaussian(n, spec.u or n, rng)
    if k in ("srht", "srft"):
        l = spec.l or n
        return (build_srht if k == "srht" else build_srft)(n, l, rng)
    if k in ("arht", "arft"):
        op = (HadamardOp if k == "arht" else FourierOp)(n, spec.d, rng, sample=spec.l)
        return op
    return build_quasi_gaussian(n, spec.T, rng)


@dataclass
class SketchedCur:
    """CUR of the sketch W·H with its rows mapped back: W ≈ (W·H)[:, J]·U·R,
    R = (W·H)[I, :]·H⁺. For m > n the same holds for Wᵀ."""
    cur: object
    op: StructuredOp
    R: np.ndarray
    transposed: bool
    shape: tuple
    meta: dict = field(default_factory=dict)

    @property
    def rank(self):
        return self.cur.rank

    def _columns(self, W, I=None):
        W = as_counting(W)
        Wd = W.dense() if I is None else None
        HJ = self.op.multiplier_columns(self.cur.cols)
        if self.transposed:
            if I is None:
                return Wd.T @ HJ
            return W.cols(I).T @ HJ
        if I is None:
            return Wd @ HJ
        return W.rows(I) @ HJ

    def reconstruct(self, W):
        A = self._columns(W) @ self.cur.nucleus @ self.R
        return A.T if self.transposed else A

    def entries(self, W, I, J):
        if self.transposed:
            I, J = J, I
        A = self._columns(W, I) @ self.cur.nucleus @ self.R[:, J]
        return A.T if self.transposed else A


def cur_with_multiplier_and_pinv(W, r, spec, rng=None, k=None, l=None,
        sampler="exactly_l", attempts=None):
    """Uniform-score leverage CUR of the sketch W·H, rows mapped back by H⁺."""
    W = as_counting(W)
    m, n = W.shape
    transposed = m > n
    Wd = W.dense()
    if transposed:
        Wd = Wd.T
        LOG.v(f"transposing a {m}x{n} input")
    mm, nn = Wd.shape
    rng = make_rng(rng)
    op = build_multiplier(MultiplierSpec(spec.kind, nn, spec.u, spec.l, spec.d, spec.T), rng)
    if op.n_out < nn:
        LOG.w(f"{op.kind} sketch has {op.n_out} < {nn} columns; H⁺ maps back a projection")
    WH = op.sketch(Wd)
    k = min(4 * r, mm) if k is None else k
    l = min(4 * r, op.n_out) if l is None else l
    cur = cur_via_leverage(WH, r, k, l, sampler, "uniform", rng, attempts=attempts)
    R = op.pinv_right(WH[cur.rows, :])
    return SketchedCur(cur, op, R, transposed, (m, n), {"entries": W.touched, "full_read": True})

def cur_with_gaussian_sampling(W, r, k, l, l_bar, rng=None, multiplier=None,
        subalg=None, attempts=None):
    """Rows selected on the sketch W·H̄ (m×l̄), columns selected on W[I, :],
    canonical nucleus. Only the sketching stage reads all of W."""
    W = as_counting(W)
    m, n = W.shape
    _check_chain(r, k, l, m, n)
    if not l <= l_bar <= n:
        raise ArgumentError(f"need l <= l_bar <= n, got l={l}, l_bar={l_bar}, n={n}")
    subalg = subalg or flags.subalg
    rng = make_rng(rng)
    spec = multiplier or MultiplierSpec("gaussian")
    def attempt(a):
        op = build_multiplier(MultiplierSpec(spec.kind, n, l_bar, spec.l or (l_bar if spec.kind in ("srht", "srft") else None), spec.d, spec.T), rng)
        before = W.touched
        sketch = op.sketch(W.dense())
        stage1 = W.touched - before
        I = np.sort(_select_rows(sketch, r, k, subalg, rng))
        R = W.rows(I)
        J = np.sort(_select(R, r, l, subalg, rng))
        cur = _generator_cur(_Rows(W, I, R), I, J, r, attempts=a + 1)
        cur.meta["stage1_entries"] = stage1
        return cur
    cur = _retry("cur_with_gaussian_sampling", attempts, attempt)
    cur.meta["entries"] = W.touched
    cur.meta["superfast_entries"] = W.touched - cur.meta["stage1_entries"]
    return cur

class _Rows:
    # generator lookups inside already-read rows
    def __init__(self, W, I, R):
        self.shape = W.shape
        self._pos = {int(i): t for t, i in enumerate(I)}
        self._R = R

    def block(self, I, J):
        return self._R[np.ix_([self._pos[int(i)] for i in I], np.asarray(J))]

def progressive_cur(W, r, rng=None, kind="arht", tolerance=1e-12, q=None, s=None,
        k=None, l=None, alpha=0.01):
    """CUR of increasing transform depth: d = 1, 2, ... until the sampled
    a posteriori test accepts the CUR or d reaches log2(n)."""
    W = as_counting(W)
    m, n = W.shape
    rng = make_rng(rng)
    q = min(m, 16) if q is None else q
    s = min(n, max(16, -(-100 // q))) if s is None else s
    depth_max = int(np.log2(next_pow2(n if m <= n else m)))
    result = None
    for d in range(1, max(depth_max, 1) + 1):
        result = cur_with_multiplier_and_pinv(W, r, MultiplierSpec(kind, d=d), rng, k, l)
        report = posterior_error_sampled(W, result, q, s, rng, tolerance, alpha)
        result.meta.update(depth=d, report=report)
        LOG.v(f"progressive {kind}: d={d} variance={report.variance:.3e} passed={report.passed}")
        if report.passed:
            return result
    LOG.w(f"progressive {kind}: test still rejects at full depth d={depth_max}")
    return result
