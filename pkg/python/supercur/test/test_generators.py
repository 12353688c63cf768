# ***************************************************************
# Copyright (c) 2020 SuperCUR. All Rights Reserved.
# This file is subject to the terms and conditions defined in
# file 'LICENSE.txt', which is part of this source code package.
# ***************************************************************
import unittest
import os
import tempfile
import numpy as np
import scipy.linalg
import supercur as sc
from supercur.errors import ArgumentError
from supercur.generators import (GeneratorSpec, RngState, gen_factor_gaussian,
    gen_gaussian, gen_laplacian, gen_nz_gaussian, gen_plus_minus_delta,
    generate, geometric_spectrum, make_rng)
from .test_errors import expect_error

class TestRng(unittest.TestCase):
    def test_replay(self):
        a = RngState(5, 2).generator().standard_normal(4)
        b = RngState(5, 2).generator().standard_normal(4)
        c = RngState(5, 3).generator().standard_normal(4)
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_spawn_disjoint(self):
        s = RngState(1)
        children = [s.spawn(i) for i in range(100)]
        assert len({c.path for c in children}) == 100 and s.path == ()
        assert s.spawn(3) == RngState(1).spawn(3)
        assert s.spawn(3).spawn(0).path == (3, 0) != s.spawn(0).path
        # deep chains never alias: (1, 2) and (2, 1) draw differently
        a = s.spawn(1).spawn(2).generator().random(4)
        b = s.spawn(2).spawn(1).generator().random(4)
        c = s.spawn(1).generator().random(4)
        assert not np.array_equal(a, b) and not np.array_equal(a, c)
        draws = {tuple(c.generator().random(2)) for c in children}
        assert len(draws) == 100

    def test_make_rng(self):
        g = np.random.default_rng(0)
        assert make_rng(g) is g
        assert np.array_equal(make_rng(7).random(3), RngState(7).generator().random(3))
        assert np.array_equal(make_rng(None).random(3), RngState(0).generator().random(3))


class TestGenerators(unittest.TestCase):
    def test_gaussian(self):
        assert gen_gaussian(1, 1, 0).shape == (1, 1)
        x = gen_gaussian(1000, 1, RngState(3))
        assert abs(x.mean()) <= 0.15 and 0.85 <= x.var() <= 1.15
        assert np.array_equal(gen_gaussian(3, 4, 9), gen_gaussian(3, 4, 9))

    def test_nz_gaussian(self):
        W = gen_nz_gaussian(4, 5, 20, 0)
        assert np.count_nonzero(W) == 20
        for seed in range(20):
            W = gen_nz_gaussian(4, 4, 4, seed)
            assert np.count_nonzero(W) == 4
            assert (np.abs(W).sum(axis=0) > 0).all() and (np.abs(W).sum(axis=1) > 0).all()
            assert sc.numerical_rank(W, 1e-12) == 4
        W = gen_nz_gaussian(16, 8, 20, 1)
        assert np.count_nonzero(W) == 20
        assert (np.abs(W).sum(axis=0) > 0).all() and (np.abs(W).sum(axis=1) > 0).all()
        expect_error(lambda: gen_nz_gaussian(4, 5, 4, 0), ArgumentError)

    def test_nz_gaussian_repair(self):
        # a single redraw almost never covers every row and column
        W = gen_nz_gaussian(12, 12, 12, 2, max_redraw=1)
        assert np.count_nonzero(W) == 12
        assert (np.abs(W).sum(axis=0) > 0).all() and (np.abs(W).sum(axis=1) > 0).all()

    def test_factor_gaussian(self):
        W, G, H = gen_factor_gaussian(GeneratorSpec("factor_gaussian", 8, 8, 2, eps=0.0), 0)
        s = sc.svdvals(W)
        assert (s[:2] > 1e-8).all() and (s[2:] < 1e-12 * s[0]).all()
        assert np.allclose(W, G @ H)
        W = generate(GeneratorSpec("factor_gaussian", 256, 256, 8, eps=1e-10), 1)
        assert sc.numerical_rank(W, 1e-6) == 8

    def test_factor_kinds(self):
        for kind in ("scaled", "diagonally_scaled", "left", "right"):
            spec = GeneratorSpec("factor_gaussian", 12, 10, 3, kind=kind, eps=0.0)
            W, G, H = gen_factor_gaussian(spec, 4)
            assert G.shape == (12, 3) and H.shape == (3, 10)
            assert sc.numerical_rank(W, 1e-9) == 3
        # the fixed factor does not depend on the stream
        spec = GeneratorSpec("factor_gaussian", 20, 20, 4, kind="left", eps=0.0)
        H1 = gen_factor_gaussian(spec, 5)[2]
        H2 = gen_factor_gaussian(spec, 6)[2]
        assert np.array_equal(H1, H2)

    def test_submatrix_rank(self):
        rng = np.random.default_rng(0)
        W, _, _ = gen_factor_gaussian(GeneratorSpec("factor_gaussian", 12, 12, 3, eps=0.0), 7)
        for _ in range(50):
            k, l = rng.integers(3, 13, size=2)
            I = rng.choice(12, k, replace=False)
            J = rng.choice(12, l, replace=False)
            assert sc.numerical_rank(W[np.ix_(I, J)], 1e-9) == 3

    def test_geometric_spectrum(self):
        s = geometric_spectrum(4, 2.0, 0.5)
        assert np.allclose(s, [2, 1, 0.5, 0.25])
        s = geometric_spectrum(30, 1.0, 0.1, cond_cap=1e3)
        assert s.max() / s.min() <= 1e3 * (1 + 1e-12)
        expect_error(lambda: geometric_spectrum(3, 1.0, 0.0), ArgumentError)

    def test_plus_minus_delta(self):
        assert gen_plus_minus_delta(2, 2, 0, 0, 1).tolist() == [[1, 0], [0, 0]]
        assert gen_plus_minus_delta(2, 2, 1, 1, -1).tolist() == [[0, 0], [0, -1]]
        W = gen_plus_minus_delta(5, 6, 2, 3, 1, dense=True)
        assert sc.numerical_rank(W) == 2
        expect_error(lambda: gen_plus_minus_delta(2, 2, 2, 0), ArgumentError)
        expect_error(lambda: gen_plus_minus_delta(2, 2, 0, 0, 2), ArgumentError)

    def test_laplacian(self):
        W = gen_laplacian(64)
        assert abs(sc.norm(W) - 1) <= 1e-8
        C = scipy.linalg.circulant(W[:, 0])
        assert np.abs(W - C).max() <= 1e-9
        expect_error(lambda: gen_laplacian(3), ArgumentError)

    def test_laplacian_rank(self):
        W = generate(GeneratorSpec("laplacian", 256, 256, 1))
        assert sc.numerical_rank(W, 1e-6) <= 40

    def test_generate(self):
        spec = GeneratorSpec("gaussian", 3, 4)
        assert np.array_equal(generate(spec, RngState(2)), generate(spec, RngState(2)))
        assert generate(GeneratorSpec("nz_gaussian", 4, 4, nz=6), 0).shape == (4, 4)
        assert generate(GeneratorSpec("plus_minus_delta", 3, 3, i=1, j=2))[1, 2] == 1
        expect_error(lambda: generate(GeneratorSpec("nope")), ArgumentError)
        expect_error(lambda: generate(GeneratorSpec("factor_gaussian", 4, 4, 5)), ArgumentError)
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "w.mtx")
            sc.save_matrix(path, np.eye(3))
            assert generate(GeneratorSpec("from_file", path=path)).tolist() == np.eye(3).tolist()

if __name__ == "__main__":
    unittest.main()
