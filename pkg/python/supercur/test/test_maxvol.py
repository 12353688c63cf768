# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import unittest
import numpy as np
import supercur as sc
from supercur.errors import ArgumentError, RankMismatchError
from supercur.maxvol import (GreedyState, dominant_submatrix, exhaustive_maxvol,
    greedy_grow_tall, greedy_grow_wide, lup_ca, projective_maxvol,
    projective_maxvol_rows, rrqr_select, rrqr_select_cols, t_factor, wide_contract)
from .test_errors import expect_error

def low_rank(m, n, r, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))

class TestDominant(unittest.TestCase):
    def test_certificate(self):
        rng = np.random.default_rng(0)
        for r, n in ((1, 5), (3, 10), (5, 40)):
            A = rng.standard_normal((r, n))
            res = lup_ca(A)
            assert res.converged and len(res.selected) == r
            B = A[:, list(res.order)]
            assert np.abs(np.linalg.solve(B, A)).max() <= 1 + sc.flags.swap_tol + 1e-9
            assert res.certificate <= 1 + sc.flags.swap_tol + 1e-9

    def test_volume_grows(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((3, 12))
        start = [0, 1, 2]
        res = dominant_submatrix(A, start)
        assert res.log_volume >= sc.log_volume(A[:, start]) - 1e-12
        assert abs(res.log_volume - sc.log_volume(A[:, list(res.order)])) <= 1e-10

    def test_iteration_cap(self):
        A = np.array([[1., 10., 0.], [0., 0., 1.]])
        res = dominant_submatrix(A, [0, 2], max_iter=0)
        assert not res.converged and res.iterations == 0
        res = dominant_submatrix(A, [0, 2])
        assert res.converged and res.selected.tolist() == [1, 2]

    def test_bad_start(self):
        A = np.array([[1., 1., 0.], [1., 1., 1.]])
        expect_error(lambda: dominant_submatrix(A, [0, 1]), ArgumentError)
        expect_error(lambda: dominant_submatrix(A, [0]), ArgumentError)
        expect_error(lambda: lup_ca(np.ones((2, 4))), ArgumentError)

    def test_against_exhaustive(self):
        # a dominant r×r block keeps at least max-volume / r^(r/2)
        for seed in range(30):
            for r in (2, 3):
                W = low_rank(4, 8, r, seed)
                J = projective_maxvol(W, r, r)
                _, _, best = exhaustive_maxvol(W, 4, r, r)
                v = sc.projective_volume(W[:, J], r)
                assert v >= best / r**(r / 2) * (1 - 1e-9)

    def test_two_step_cross(self):
        # row pass after a column pass keeps max-volume / (h·h), h = r^(r/2)
        r, h = 2, 2.0
        rng = np.random.default_rng(9)
        for seed in range(30):
            W = low_rank(5, 5, r, seed)
            _, _, best = exhaustive_maxvol(W, r, r, r)
            I = np.sort(rng.choice(5, r, replace=False))
            J = np.sort(projective_maxvol(W[I, :], r, r))
            I = np.sort(projective_maxvol_rows(W[:, J], r, r))
            v = sc.projective_volume(W[np.ix_(I, J)], r)
            assert v >= best / (h * h) * (1 - 1e-9), seed

    def test_chebyshev_bound(self):
        # global maximal volume: ‖W − CUR‖_C ≤ (r+1)·σ_{r+1}
        rng = np.random.default_rng(2)
        for seed in range(20):
            W = low_rank(6, 6, 2, seed) + 1e-2 * rng.standard_normal((6, 6))
            I, J, _ = exhaustive_maxvol(W, 2, 2)
            C, R = W[:, J], W[I, :]
            E = W - C @ np.linalg.inv(W[np.ix_(I, J)]) @ R
            assert np.abs(E).max() <= 3 * sc.svdvals(W)[2] * (1 + 1e-9)


class TestGreedy(unittest.TestCase):
    def test_step_pop(self):
        W = np.random.default_rng(3).standard_normal((4, 9))
        st = GreedyState(W)
        for _ in range(3):
            st.step()
        assert abs(st.log_volume - sc.log_volume(W[:, st.cols])) <= 1e-10
        assert np.allclose(np.triu(st.R), st.R) and (np.diag(st.R).real > 0).all()
        before = st.log_volume
        last = st.cols[-1]
        d = st.diag[-1]
        assert st.pop() == last
        assert abs(st.log_volume - (before - np.log(d))) <= 1e-12
        assert abs(st.log_volume - sc.log_volume(W[:, st.cols])) <= 1e-10
        assert st.step() == last

    def test_complex_step(self):
        rng = np.random.default_rng(4)
        W = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
        st = GreedyState(W)
        for _ in range(3):
            st.step()
        assert abs(st.log_volume - sc.log_volume(W[:, st.cols])) <= 1e-10
        assert np.allclose(st.Q @ W, st.work)

    def test_grow_tall(self):
        W = np.random.default_rng(5).standard_normal((5, 7))
        cols = greedy_grow_tall(W, 3)
        assert len(cols) == 3
        expect_error(lambda: greedy_grow_tall(W, 6), ArgumentError)
        assert len(greedy_grow_tall(np.zeros((2, 3)), 2)) == 2
        cols, state = greedy_grow_tall(W, 3, return_state=True)
        assert not state["degenerate"] and sorted(state["order"]) == cols.tolist()
        assert abs(state["log_volume"] - sc.log_volume(W[:, list(state["order"])])) <= 1e-10
        _, state = greedy_grow_tall(np.zeros((2, 3)), 2, return_state=True)
        assert state["degenerate"]

    def test_grow_wide(self):
        W = np.random.default_rng(6).standard_normal((3, 12))
        start = lup_ca(W).order
        cols, state = greedy_grow_wide(W, start, 7, return_state=True)
        assert len(cols) == 7 and set(start) <= set(cols.tolist())
        assert abs(state["log_volume"] - sc.log_volume(W[:, cols])) <= 1e-9
        expect_error(lambda: greedy_grow_wide(W, start, 3), ArgumentError)

    def test_wide_contract(self):
        W = np.random.default_rng(7).standard_normal((3, 8))
        cols = [0, 2, 3, 5, 7]
        rest, dlog = wide_contract(W, cols, 3)
        assert rest == [0, 2, 5, 7] and dlog <= 0
        assert abs(sc.log_volume(W[:, rest]) - sc.log_volume(W[:, cols]) - dlog) <= 1e-10
        expect_error(lambda: wide_contract(W, cols, 1), ArgumentError)


class TestProjective(unittest.TestCase):
    def test_cores_agree_on_shape(self):
        W = low_rank(10, 20, 3, 8)
        for core in ("lu", "greedy", "qr"):
            J = projective_maxvol(W, 3, 6, core=core)
            assert len(J) == 6
            assert sc.numerical_rank(W[:, J], 1e-9) == 3
        expect_error(lambda: projective_maxvol(W, 3, 3, core="svd"), ArgumentError)

    def test_rows(self):
        W = low_rank(20, 10, 2, 9)
        I = projective_maxvol_rows(W, 2, 4)
        assert len(I) == 4 and sc.numerical_rank(W[I, :], 1e-9) == 2

    def test_rank_mismatch(self):
        W = low_rank(8, 8, 3, 10)
        e = expect_error(lambda: projective_maxvol(W, 2, 2), RankMismatchError)
        assert e.expected == 2 and e.found == 3
        assert len(projective_maxvol(W, 2, 2, check_rank=False)) == 2
        expect_error(lambda: projective_maxvol(W, 3, 9), ArgumentError)


class TestRrqr(unittest.TestCase):
    def test_t_factor(self):
        assert abs(t_factor(4, 2, 1) - np.sqrt(5)) < 1e-15
        assert t_factor(3, 3, 2) == 1

    def test_sigma_bound(self):
        rng = np.random.default_rng(11)
        for seed in range(20):
            m, r = 30, 5
            W = rng.standard_normal((m, r)) @ np.diag(np.logspace(0, -3, r))
            for backend in ("qr", "lu"):
                I = rrqr_select(W, r, h=2.0, backend=backend)
                assert len(I) == r
                s = sc.svdvals(W)[r - 1]
                assert sc.svdvals(W[I, :])[r - 1] >= s / t_factor(m, r, 2.0) * (1 - 1e-9)

    def test_square_and_cols(self):
        W = np.random.default_rng(12).standard_normal((4, 4))
        assert rrqr_select(W, 4).tolist() == [0, 1, 2, 3]
        J = rrqr_select_cols(np.random.default_rng(13).standard_normal((3, 10)), 3)
        assert len(J) == 3
        expect_error(lambda: rrqr_select(W, 5), ArgumentError)
        expect_error(lambda: rrqr_select(W, 2, backend="svd"), ArgumentError)


class TestExhaustive(unittest.TestCase):
    def test_small(self):
        I, J, v = exhaustive_maxvol(np.array([[1., 2.], [3., 4.]]), 1, 1)
        assert (I, J) == ((1,), (1,)) and abs(v - 4) < 1e-12
        I, J, v = exhaustive_maxvol(np.eye(3))
        assert abs(v - 1) < 1e-12

if __name__ == "__main__":
    unittest.main()
