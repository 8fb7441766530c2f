import numpy as np
import pytest

import graphdenoise as gd


def make_graph(n, edges):
    """NNGraph from a list of (i, j, cost) triples."""
    ei = np.array([e[0] for e in edges], dtype=np.int64)
    ej = np.array([e[1] for e in edges], dtype=np.int64)
    ec = np.array([float(e[2]) for e in edges], dtype=np.float64)
    return gd.NNGraph(n, ei, ej, ec)


def random_kernel(seed, n):
    """Diffusion kernel on a random point-cloud kNN graph, rerolled
    until connected; the construction used by the spectral batteries."""
    while True:
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(n, 3))
        g = gd.build_knn_graph(gd.PointCloud(pts), min(4, n - 1))
        if np.isfinite(gd.dijkstra_sssp(g, 0)).all():
            return gd.diffusion_kernel(g, gd.median_half_epsilon(g))
        seed += 7919


def complete_kernel(seed, n):
    """Diffusion kernel on the complete graph of a random point cloud.

    The Gaussian similarity matrix over all pairs is positive
    definite; truncating it to a sparse neighbor graph can push small
    eigenvalues below zero.  Batteries that assert the [0, 1] spectrum
    therefore run on complete graphs, where the property holds.
    """
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    g = gd.build_ball_graph(gd.PointCloud(pts), 1e6)
    return gd.diffusion_kernel(g, gd.median_half_epsilon(g))


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
