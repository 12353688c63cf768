# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import unittest
import numpy as np
import supercur as sc
from supercur.errors import ArgumentError
from supercur.matcore import (CountingMatrix, herm, is_rank_deficient,
    pinv_product_bound_check)
from .test_errors import expect_error

try:
    from hypothesis import given, settings, strategies as st
    has_hypothesis = True
except ImportError:
    has_hypothesis = False

class TestMatcore(unittest.TestCase):
    def test_as_mat(self):
        assert sc.as_mat([1, 2]).shape == (1, 2)
        assert sc.as_mat([[1j]]).dtype == np.complex128
        assert sc.as_mat([[1]], "complex").dtype == np.complex128
        expect_error(lambda: sc.as_mat(np.zeros((0, 3))), ArgumentError)
        expect_error(lambda: sc.as_mat([[np.nan]]), ArgumentError)
        expect_error(lambda: sc.as_mat([[1j]], "real"), ArgumentError)
        expect_error(lambda: sc.as_mat(np.zeros((2, 2, 2))), ArgumentError)

    def test_index_set(self):
        I = sc.index_set([3, 0, 2], 4)
        assert I.tolist() == [0, 2, 3]
        assert not I.flags.writeable
        expect_error(lambda: sc.index_set([4], 4), ArgumentError)
        expect_error(lambda: sc.index_set([-1], 4), ArgumentError)
        expect_error(lambda: sc.index_set([1, 1], 4), ArgumentError)

    def test_norm(self):
        I3 = np.eye(3)
        assert abs(sc.norm(I3) - 1) < 1e-14
        assert abs(sc.norm(I3, "frobenius") - np.sqrt(3)) < 1e-14
        assert sc.norm([[3, 4]], "frobenius") == 5
        assert sc.norm([[3, 4]], "chebyshev") == 4
        expect_error(lambda: sc.norm(I3, "nuclear"), ArgumentError)

    def test_norm_chain(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m, n = rng.integers(1, 12, size=2)
            W = rng.standard_normal((m, n))
            c, s, f = sc.norm(W, "chebyshev"), sc.norm(W), sc.norm(W, "frobenius")
            assert c <= s * (1 + 1e-12) and s <= f * (1 + 1e-12)
            assert f <= np.sqrt(m * n) * c * (1 + 1e-12)
            assert abs(f**2 - np.sum(sc.svdvals(W)**2)) <= 1e-10 * f**2

    def test_svd(self):
        assert np.allclose(sc.svd(np.diag([2., 1.])).sigma, [2, 1])
        assert np.allclose(sc.svd(np.ones((2, 2))).sigma, [2, 0], atol=1e-14)
        W = np.random.default_rng(1).standard_normal((5, 3))
        s = sc.svd(W)
        assert s.r == 3
        assert np.linalg.norm(W - s.reconstruct()) <= 1e-10 * np.linalg.norm(W)
        assert s.orthonormality_defect() <= 1e-10
        assert np.all(np.diff(s.sigma) <= 0)

    def test_svd_complex(self):
        rng = np.random.default_rng(2)
        W = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        s = sc.svd(W)
        assert np.linalg.norm(W - s.reconstruct()) <= 1e-10 * np.linalg.norm(W)
        assert np.linalg.norm(herm(s.S) @ s.S - np.eye(4)) <= 1e-10

    def test_truncate(self):
        t = sc.truncate(sc.svd(np.diag([3., 2., 1.])), 2)
        assert np.allclose(t.sigma, [3, 2])
        W = np.random.default_rng(3).standard_normal((6, 6))
        s = sc.svd(W)
        assert np.allclose(sc.truncate(s, 6).reconstruct(), s.reconstruct())
        for r in range(1, 6):
            res = sc.norm(W - sc.truncate(s, r).reconstruct())
            assert abs(res - s.sigma[r]) <= 1e-9 * (1 + s.sigma[r])
        expect_error(lambda: sc.truncate(s, 0), ArgumentError)
        expect_error(lambda: sc.truncate(s, 7), ArgumentError)

    def test_pinv(self):
        assert np.allclose(sc.pinv(np.diag([2., 0.])), np.diag([0.5, 0]))
        assert np.allclose(sc.pinv(np.ones((2, 2))), np.ones((2, 2)) / 4)
        assert np.array_equal(sc.pinv(np.zeros((2, 3))), np.zeros((3, 2)))
        rng = np.random.default_rng(4)
        for shape in ((4, 6), (32, 32), (9, 5)):
            W = rng.standard_normal(shape)
            P = sc.pinv(W)
            tol = 1e-8 * np.linalg.norm(W) * np.linalg.norm(P)
            assert np.linalg.norm(W @ P @ W - W) <= tol * np.linalg.norm(W)
            assert np.linalg.norm(P @ W @ P - P) <= tol * np.linalg.norm(P)
            assert np.linalg.norm((W @ P).T - W @ P) <= tol
            assert np.linalg.norm((P @ W).T - P @ W) <= tol

    def test_numerical_rank(self):
        assert sc.numerical_rank(np.diag([1, 1e-8])) == 1
        assert sc.numerical_rank(np.zeros((3, 3))) == 0
        rng = np.random.default_rng(5)
        W = rng.standard_normal((64, 4)) @ rng.standard_normal((4, 64))
        W += 1e-10 * rng.standard_normal((64, 64))
        assert sc.numerical_rank(W, 1e-6) == 4

    def test_rank_deficient(self):
        assert is_rank_deficient(np.zeros((2, 2)), 1)
        assert is_rank_deficient(np.diag([1, 1e-12]), 2)
        assert not is_rank_deficient(np.diag([1, 1e-3]), 2)
        assert is_rank_deficient(np.ones((1, 3)), 2)

    def test_sigma_tail(self):
        W = np.diag([4., 3., 2., 1.])
        assert sc.sigma_tail(W, 2) == 2
        assert abs(sc.sigma_tail(W, 2, "frobenius") - np.sqrt(5)) < 1e-14
        assert sc.sigma_tail(W, 4) == 0

    def test_volume(self):
        assert abs(sc.volume(np.eye(2)) - 1) < 1e-14
        assert abs(sc.volume([[1, 2], [3, 4]]) - 2) < 1e-12
        rng = np.random.default_rng(6)
        for m in range(1, 9):
            W = rng.standard_normal((m, m))
            d = abs(np.linalg.det(W))
            assert abs(sc.volume(W) - d) <= 1e-8 * d
        W = rng.standard_normal((4, 6))
        assert abs(sc.projective_volume(W, 4) - sc.volume(W)) <= 1e-12 * sc.volume(W)
        assert sc.log_volume(np.zeros((2, 2))) == -np.inf
        assert abs(sc.log_projective_volume(W, 2) - np.log(sc.projective_volume(W, 2))) < 1e-12
        expect_error(lambda: sc.projective_volume(W, 5), ArgumentError)

    def test_volume_identities(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            m, n, q = rng.integers(2, 9), rng.integers(2, 9), rng.integers(1, 9)
            q = min(q, m, n)
            G = rng.standard_normal((m, q))
            H = rng.standard_normal((q, n))
            v = sc.volume(G @ H)
            if q == min(m, n):
                assert abs(v - sc.volume(G) * sc.volume(H)) <= 1e-8 * v
            r = rng.integers(1, q + 1)
            assert sc.projective_volume(G @ H, r) <= \
                sc.projective_volume(G, r) * sc.projective_volume(H, r) * (1 + 1e-10)

    def test_pinv_product_bound(self):
        I = np.eye(2)
        assert pinv_product_bound_check(I, I, I)
        rng = np.random.default_rng(8)
        assert pinv_product_bound_check(rng.standard_normal((5, 3)), np.diag([3., 2., 1.]),
            rng.standard_normal((3, 4)))
        assert pinv_product_bound_check(rng.standard_normal((4, 2)), np.diag([1, 1e-6]),
            rng.standard_normal((2, 5)))
        expect_error(lambda: pinv_product_bound_check(I, np.diag([1., 0.]), I), ArgumentError)

    def test_counting_matrix(self):
        W = np.arange(12.).reshape(3, 4)
        A = CountingMatrix(W)
        assert A.cols([0, 2]).shape == (3, 2) and A.touched == 6
        assert A.rows([1]).tolist() == [[4, 5, 6, 7]] and A.touched == 10
        assert A.block([0, 2], [1, 3]).tolist() == [[1, 3], [9, 11]] and A.touched == 14
        A.dense()
        assert A.touched == 26
        A.reset()
        assert A.touched == 0
        assert sc.as_counting(A) is A

    @unittest.skipIf(not has_hypothesis, "hypothesis not installed")
    def test_norm_chain_property(self):
        @settings(max_examples=50, deadline=None)
        @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31 - 1))
        def check(m, n, seed):
            W = np.random.default_rng(seed).standard_normal((m, n))
            assert sc.norm(W, "chebyshev") <= sc.norm(W) * (1 + 1e-12)
            assert sc.norm(W) <= sc.norm(W, "frobenius") * (1 + 1e-12)
        check()

if __name__ == "__main__":
    unittest.main()
