import math

import numpy as np
import pytest
import scipy.linalg

import graphdenoise as gd

import oracles
from conftest import complete_kernel, make_graph, random_kernel


def _dense_kernel_reference(graph, epsilon):
    """The three construction steps written independently with dense
    numpy: similarity with unit self-weight, density normalization,
    row normalization."""
    n = graph.n
    W = np.eye(n)
    for i, j, c in zip(graph.edge_i, graph.edge_j, graph.edge_cost):
        s = 1.0 if math.isinf(epsilon) else math.exp(-(c * c) / epsilon)
        W[i, j] = s
        W[j, i] = s
    q = W.sum(axis=1)
    W2 = W / np.outer(q, q)
    return W2 / W2.sum(axis=1, keepdims=True)


class TestDiffusionKernel:
    def test_two_node_closed_form(self):
        g = make_graph(2, [(0, 1, 1.5)])
        eps = 2.0
        k = gd.diffusion_kernel(g, eps)
        s = math.exp(-1.5 ** 2 / eps)
        P = k.P.toarray()
        np.testing.assert_allclose(P, [[1 / (1 + s), s / (1 + s)],
                                       [s / (1 + s), 1 / (1 + s)]],
                                   rtol=0, atol=1e-15)

    def test_matches_dense_reference(self, rng):
        for seed, n in ((0, 10), (1, 20), (2, 30)):
            edges = oracles.random_connected_edges(np.random.default_rng(seed), n)
            g = make_graph(n, edges)
            for eps in (0.5, 2.0, np.inf):
                k = gd.diffusion_kernel(g, eps)
                np.testing.assert_allclose(k.P.toarray(),
                                           _dense_kernel_reference(g, eps),
                                           rtol=0, atol=1e-14)

    def test_row_stochastic(self):
        k = random_kernel(11, 30)
        P = k.P.toarray()
        np.testing.assert_allclose(P.sum(axis=1), 1.0, rtol=0, atol=1e-12)
        assert P.min() >= 0.0

    def test_epsilon_validation(self):
        g = make_graph(2, [(0, 1, 1.0)])
        for bad in (0.0, -1.0, np.nan):
            with pytest.raises(gd.InvalidParameterError):
                gd.diffusion_kernel(g, bad)

    def test_infinite_epsilon_is_binary(self):
        # the sentinel weights every stored edge 1 regardless of cost
        ga = make_graph(3, [(0, 1, 0.1), (1, 2, 9.0)])
        gb = make_graph(3, [(0, 1, 5.0), (1, 2, 5.0)])
        Pa = gd.diffusion_kernel(ga, np.inf).P.toarray()
        Pb = gd.diffusion_kernel(gb, np.inf).P.toarray()
        np.testing.assert_allclose(Pa, Pb, rtol=0, atol=1e-15)

    def test_median_half_default(self):
        g = make_graph(3, [(0, 1, 1.0), (1, 2, 3.0)])
        assert gd.median_half_epsilon(g) == 1.0
        assert gd.median_half_epsilon(make_graph(3, [], )) == 1.0

    def test_spectrum_in_unit_interval(self):
        for seed, n in ((0, 12), (1, 25), (2, 40)):
            k = complete_kernel(seed, n)
            vals = scipy.linalg.eigvals(k.P.toarray())
            assert np.max(np.abs(vals.imag)) <= 1e-10
            assert vals.real.min() >= -1e-10
            assert vals.real.max() <= 1.0 + 1e-10

    def test_sparse_truncation_can_break_positivity(self):
        # the same construction on a truncated neighbor graph is not
        # positive semidefinite; this pins the behavior so the complete
        # graph requirement above stays motivated
        k = random_kernel(0, 40)
        vals = scipy.linalg.eigvals(k.P.toarray()).real
        assert vals.min() < -1e-10


class TestNeighborProbability:
    def test_two_node_closed_form(self):
        g = make_graph(2, [(0, 1, 1.5)])
        eps, p = 2.0, 0.3
        k = gd.diffusion_kernel(g, eps)
        s = math.exp(-1.5 ** 2 / eps)
        lam2 = (1 - s) / (1 + s)
        nu = p / (1 - (1 - p) * lam2)
        rec = gd.neighbor_probability_dense(k, p)
        np.testing.assert_allclose(rec.N, [[(1 + nu) / 2, (1 - nu) / 2],
                                           [(1 - nu) / 2, (1 + nu) / 2]],
                                   rtol=0, atol=1e-12)

    def test_dense_solves_the_defining_system(self):
        k = random_kernel(3, 25)
        p = 0.1
        N = gd.neighbor_probability_dense(k, p).N
        P = k.P.toarray()
        lhs = N @ (np.eye(25) - (1 - p) * P)
        np.testing.assert_allclose(lhs, p * np.eye(25), rtol=0, atol=1e-12)

    def test_row_stochastic_and_nonnegative(self):
        for seed in range(3):
            k = random_kernel(seed + 50, 20)
            for p in (0.01, 0.1, 0.5):
                N = gd.neighbor_probability_dense(k, p).N
                np.testing.assert_allclose(N.sum(axis=1), 1.0,
                                           rtol=0, atol=1e-10)
                assert N.min() >= -1e-12

    def test_restart_validation(self):
        k = random_kernel(4, 10)
        for bad in (1e-7, 0.0, 1.0, 1.5, -0.2):
            with pytest.raises(gd.InvalidParameterError):
                gd.neighbor_probability_dense(k, bad)
            with pytest.raises(gd.InvalidParameterError):
                gd.neighbor_probability_series(k, bad)

    def test_dense_size_limit(self):
        from graphdenoise.kernels import DENSE_LIMIT
        g = gd.NNGraph(DENSE_LIMIT + 1, [], [], [])
        k = gd.diffusion_kernel(g, 1.0)
        with pytest.raises(gd.InvalidParameterError):
            gd.neighbor_probability_dense(k, 0.1)

    def test_monotone_restart(self):
        # as the restart probability climbs toward 1 the walk stays
        # home more, so N approaches the identity monotonically
        k = random_kernel(5, 18)
        gaps = []
        for p in (0.5, 0.9, 0.99, 0.999):
            N = gd.neighbor_probability_dense(k, p).N
            gaps.append(np.max(np.abs(N - np.eye(18))))
        assert all(a > b for a, b in zip(gaps, gaps[1:]))


class TestSeries:
    def test_identity_kernel_converges_to_identity(self):
        g = gd.NNGraph(4, [], [], [])
        k = gd.diffusion_kernel(g, 1.0)
        N = gd.neighbor_probability_series(k, 0.5, tol=1e-12)
        np.testing.assert_allclose(N, np.eye(4), rtol=0, atol=1e-11)

    def test_zero_step_walk(self):
        # a tolerance at the first-term level truncates to p * I
        g = gd.NNGraph(3, [], [], [])
        k = gd.diffusion_kernel(g, 1.0)
        N = gd.neighbor_probability_series(k, 0.4, tol=0.6)
        np.testing.assert_allclose(N, 0.4 * np.eye(3), rtol=0, atol=1e-15)

    def test_matches_brute_partial_sum(self):
        k = random_kernel(6, 15)
        p, tol = 0.2, 1e-12
        M = int(math.ceil(math.log(tol) / math.log(1 - p))) - 1
        want = oracles.neumann_partial_sum(k.P.toarray(), p, M + 1)
        got = gd.neighbor_probability_series(k, p, tol=tol)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9)

    def test_series_matches_dense(self):
        k = random_kernel(7, 40)
        for p in (0.01, 0.1, 0.5):
            dense = gd.neighbor_probability_dense(k, p).N
            series = gd.neighbor_probability_series(k, p, tol=1e-12)
            assert np.max(np.abs(dense - series)) <= 1e-8


class TestSpectralLemmas:
    def test_spectrum_map(self):
        k = random_kernel(8, 30)
        lam = np.sort(scipy.linalg.eigvals(k.P.toarray()).real)
        for p in (0.01, 0.1, 0.5):
            N = gd.neighbor_probability_dense(k, p).N
            got = np.sort(scipy.linalg.eigvals(N).real)
            want = np.sort(p / (1.0 - (1.0 - p) * lam))
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-8)

    def test_shared_eigenvectors(self):
        k = random_kernel(9, 20)
        p = 0.1
        P = k.P.toarray()
        N = gd.neighbor_probability_dense(k, p).N
        lamP, VP = scipy.linalg.eig(P)
        lamN, VN = scipy.linalg.eig(N)
        lamP = lamP.real
        for i in range(20):
            # only simple eigenvalues pin a 1-d eigenspace
            if np.sum(np.abs(lamP - lamP[i]) < 1e-6) != 1:
                continue
            target = p / (1.0 - (1.0 - p) * lamP[i])
            j = int(np.argmin(np.abs(lamN.real - target)))
            u = VP[:, i].real
            v = VN[:, j].real
            cosang = abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
            assert math.sqrt(max(0.0, 1.0 - cosang ** 2)) <= 1e-6


class TestIdentities:
    def test_edgeless_kernel_exact(self):
        # p = 0.5 keeps every intermediate quantity a power of two, so
        # the identity gap on the identity kernel is exactly zero
        g = gd.NNGraph(5, [], [], [])
        k = gd.diffusion_kernel(g, 1.0)
        assert gd.regularized_laplacian_identity_check(k, 0.5) == 0.0

    def test_two_node(self):
        g = make_graph(2, [(0, 1, 1.0)])
        k = gd.diffusion_kernel(g, 1.0)
        assert gd.regularized_laplacian_identity_check(k, 0.3) <= 1e-12

    def test_battery(self):
        for seed, n in ((0, 15), (1, 28), (2, 40)):
            k = random_kernel(seed + 100, n)
            for p in (0.01, 0.1, 0.5):
                assert gd.regularized_laplacian_identity_check(k, p) <= 1e-10

    def test_laplacian_resolvent_form(self):
        # with L = (I - P) / eps the defining system reads
        # N * (p I + (1 - p) eps L) = p I
        k = random_kernel(10, 22)
        p = 0.05
        L = gd.graph_laplacian(k).toarray()
        N = gd.neighbor_probability_dense(k, p).N
        A = p * np.eye(22) + (1 - p) * k.epsilon * L
        np.testing.assert_allclose(N @ A, p * np.eye(22), rtol=0, atol=1e-10)

    def test_laplacian_infinite_epsilon_is_zero(self):
        g = make_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])
        k = gd.diffusion_kernel(g, np.inf)
        assert np.all(gd.graph_laplacian(k).toarray() == 0.0)


class TestLowRank:
    def test_full_rank_matches_dense(self):
        k = random_kernel(12, 24)
        p = 0.1
        dense = gd.neighbor_probability_dense(k, p)
        ei, ej = k.graph.edge_i, k.graph.edge_j
        want = dense.scores_for_edges(ei, ej)
        got = gd.edge_scores_lowrank(k, p, 24)
        assert np.max(np.abs(got - want)) <= 1e-6

    def test_edgeless_scores_empty(self):
        g = gd.NNGraph(4, [], [], [])
        k = gd.diffusion_kernel(g, 1.0)
        assert gd.edge_scores_lowrank(k, 0.3, 4).size == 0

    def test_truncation_keeps_length(self):
        k = random_kernel(13, 20)
        got = gd.edge_scores_lowrank(k, 0.1, 3)
        assert got.shape == (k.graph.m,)

    def test_swiss_roll_ordering_fidelity(self):
        # frozen construction: clean roll, n=300, seed 5, ball graph
        # delta=6, bandwidth 2 * median edge cost, p=0.01, J=20.
        # Pilot measured Spearman 0.9662 against the dense ordering;
        # the assertion keeps the decision margin at 0.9.
        import scipy.stats
        from graphdenoise import swissroll as sw
        sample = sw.sample_swiss_roll(300, seed=5)
        cloud = sw.apply_noise(sample, 0.0, 1).cloud()
        g = gd.build_ball_graph(cloud, 6.0)
        k = gd.diffusion_kernel(g, 2.0 * float(np.median(g.edge_cost)))
        dense = gd.neighbor_probability_dense(k, 0.01)
        ei, ej = g.edge_i, g.edge_j
        ds = dense.scores_for_edges(ei, ej)
        ls = gd.edge_scores_lowrank(k, 0.01, 20)
        rho = scipy.stats.spearmanr(ds, ls).statistic
        assert rho >= 0.9
