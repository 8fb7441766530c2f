"""Edge-similarity kernel, its Laplacian, and neighbor-probability
matrices.

The kernel follows the density-normalized construction: Gaussian edge
similarities ``exp(-d^2 / eps)`` with ones on the diagonal are first
divided by the product of the raw row sums, and the result is then row
normalized.  The final matrix ``P`` is row stochastic, similar to a
symmetric matrix through its row-sum diagonal, and has spectrum inside
``[0, 1]``.

The neighbor-probability matrix ``N = p (I - (1 - p) P)^{-1}`` gives,
for a random walk restarted with probability ``p`` per step, the
probability that the walk sits at each node when the restart fires.  A
truncated geometric series over powers of ``P`` computes the same
matrix and serves as the independent reference for the direct solve.
"""

import math

import numpy as np

from .errors import InvalidParameterError, SingularMatrixError
from .linalg import SparseMatrix, dense_solve, top_eigenpairs

# Dense solves and full spectra below this node count; low-rank above.
DENSE_LIMIT = 600

_MIN_RESTART = 1e-6


class DiffusionKernel:
    """Row-stochastic kernel matrix built from a graph.

    Attributes
    ----------
    graph : NNGraph
        Source graph; the kernel's off-diagonal support is its edge set.
    epsilon : float
        Bandwidth; ``inf`` degrades every similarity to 1 (binary
        weights).
    P : SparseMatrix
        Row-stochastic kernel.
    d_hat_diag, d_diag : (n,) arrays
        Row sums of the raw similarity matrix and of the density
        normalized matrix; ``d_diag`` symmetrizes ``P``.
    """

    __slots__ = ("graph", "epsilon", "P", "d_hat_diag", "d_diag")

    def __init__(self, graph, epsilon, P, d_hat_diag, d_diag):
        self.graph = graph
        self.epsilon = epsilon
        self.P = P
        self.d_hat_diag = d_hat_diag
        self.d_diag = d_diag

    @property
    def n(self):
        return self.graph.n


def median_half_epsilon(graph):
    """Default bandwidth: half the median edge cost.

    Degenerate graphs (no edges, or all costs zero) get 1.0, which
    makes every stored similarity equal to 1.
    """
    if graph.m == 0:
        return 1.0
    med = float(np.median(graph.edge_cost))
    return med / 2.0 if med > 0 else 1.0


def diffusion_kernel(graph, epsilon):
    """Build the density-normalized row-stochastic kernel.

    Parameters
    ----------
    graph : NNGraph
    epsilon : float
        Positive bandwidth; ``inf`` is the binary-weight sentinel.
    """
    if not (epsilon > 0) or (np.isnan(epsilon)):
        raise InvalidParameterError("epsilon must be positive (inf allowed)")
    n = graph.n
    ei, ej = graph.edge_i, graph.edge_j
    with np.errstate(under="ignore"):
        sim = np.exp(-(graph.edge_cost ** 2) / epsilon)
    d_hat = np.ones(n)
    np.add.at(d_hat, ei, sim)
    np.add.at(d_hat, ej, sim)
    diag = np.arange(n, dtype=np.int64)
    rows = np.concatenate([ei, ej, diag])
    cols = np.concatenate([ej, ei, diag])
    vals = np.concatenate(
        [
            sim / (d_hat[ei] * d_hat[ej]),
            sim / (d_hat[ej] * d_hat[ei]),
            1.0 / d_hat**2,
        ]
    )
    d = np.zeros(n)
    np.add.at(d, rows, vals)
    P = SparseMatrix.from_coo(n, n, rows, cols, vals / d[rows])
    return DiffusionKernel(graph, float(epsilon), P, d_hat, d)


def graph_laplacian(kernel):
    """Laplacian ``(I - P) / epsilon`` on the kernel's support.

    With ``epsilon = inf`` the matrix is identically zero.
    """
    P = kernel.P
    if not np.isfinite(kernel.epsilon):
        return SparseMatrix.from_coo(P.n_rows, P.n_cols, [], [], [])
    rows = np.repeat(np.arange(P.n_rows), np.diff(P.indptr))
    cols = P.indices
    vals = -P.data / kernel.epsilon
    diag = np.arange(P.n_rows, dtype=np.int64)
    rows = np.concatenate([rows, diag])
    cols = np.concatenate([cols, diag])
    vals = np.concatenate([vals, np.full(P.n_rows, 1.0 / kernel.epsilon)])
    return SparseMatrix.from_coo(P.n_rows, P.n_cols, rows, cols, vals)


def _check_restart(p):
    if not (_MIN_RESTART < p < 1.0):
        raise InvalidParameterError(
            "restart probability must satisfy %g < p < 1" % _MIN_RESTART
        )


class NeighborProbability:
    """Restart-walk neighbor probabilities, dense or spectral.

    ``mode == "dense"`` keeps the full matrix ``N``; ``mode ==
    "lowrank"`` keeps ``J`` leading eigenpairs of ``P`` from which the
    entries of ``N`` are reconstructed on demand.
    """

    __slots__ = ("mode", "p", "N", "pairs")

    def __init__(self, mode, p, N=None, pairs=None):
        if mode not in ("dense", "lowrank"):
            raise InvalidParameterError("mode must be 'dense' or 'lowrank'")
        if mode == "dense" and N is None:
            raise InvalidParameterError("dense mode requires the matrix")
        if mode == "lowrank" and pairs is None:
            raise InvalidParameterError("lowrank mode requires eigenpairs")
        self.mode = mode
        self.p = p
        self.N = N
        self.pairs = pairs

    def scores_for_edges(self, ei, ej):
        """Symmetrized per-edge scores ``(N_ij + N_ji) / 2``."""
        if self.mode == "dense":
            return 0.5 * (self.N[ei, ej] + self.N[ej, ei])
        lam = self.pairs.values
        vr = self.pairs.right_vectors
        vl = self.pairs.left_vectors
        coeff = self.p / (1.0 - (1.0 - self.p) * lam)
        # unit-normalized pairs need the biorthogonal rescale so that
        # keeping all n pairs reproduces the dense matrix exactly
        coeff = coeff / np.sum(vl * vr, axis=0)
        fwd = (vr[ei] * vl[ej]) @ coeff
        bwd = (vr[ej] * vl[ei]) @ coeff
        return 0.5 * (fwd + bwd)


def neighbor_probability_dense(kernel, p):
    """Exact ``N = p (I - (1 - p) P)^{-1}`` by one LU solve.

    Restricted to kernels below ``DENSE_LIMIT`` nodes.  Entries in
    ``[-1e-12, 0)`` are rounded up to zero; anything more negative
    signals an untrustworthy solve and raises.
    """
    _check_restart(p)
    n = kernel.n
    if n > DENSE_LIMIT:
        raise InvalidParameterError(
            "dense mode is limited to %d nodes; got %d" % (DENSE_LIMIT, n)
        )
    A = -(1.0 - p) * kernel.P.toarray()
    np.fill_diagonal(A, A.diagonal() + 1.0)
    N = dense_solve(A, p * np.eye(n))
    low = N.min()
    if low < -1e-12:
        raise SingularMatrixError(
            "solve produced probability %.3e below tolerance" % low
        )
    np.clip(N, 0.0, None, out=N)
    return NeighborProbability("dense", p, N=N)


def neighbor_probability_series(kernel, p, tol=1e-10):
    """Truncated series ``sum_m p (1 - p)^m P^m`` as a dense matrix.

    The truncation order ``M`` is the smallest integer with
    ``(1 - p)^(M + 1) <= tol``, so the discarded tail of the geometric
    weights is at most ``tol``.
    """
    _check_restart(p)
    if not (0 < tol < 1):
        raise InvalidParameterError("tol must lie in (0, 1)")
    M = max(0, math.ceil(math.log(tol) / math.log(1.0 - p)) - 1)
    while (1.0 - p) ** (M + 1) > tol:
        M += 1
    Pd = kernel.P.toarray()
    term = p * np.eye(kernel.n)
    acc = term.copy()
    for _ in range(M):
        term = (1.0 - p) * (term @ Pd)
        acc += term
    return acc


def edge_scores_lowrank(kernel, p, J, tol=1e-8, method="auto"):
    """Per-edge neighbor-probability scores from ``J`` leading
    eigenpairs of the kernel, aligned with the graph's edge list."""
    _check_restart(p)
    pairs = top_eigenpairs(kernel.P, kernel.d_diag, J, tol=tol, method=method)
    rec = NeighborProbability("lowrank", p, pairs=pairs)
    return rec.scores_for_edges(kernel.graph.edge_i, kernel.graph.edge_j)


def regularized_laplacian_identity_check(kernel, p):
    """Largest deviation in the two algebraic identities tying the
    neighbor-probability matrix to the kernel.

    With ``pbar = 1 - p``, ``B = I - pbar P`` and ``N = p B^{-1}``:

    * ``I - N = pbar (I - P) B^{-1}``
    * ``B = (1 - pbar) I + pbar (I - P)``

    Returns the maximum absolute entrywise gap over both.
    """
    _check_restart(p)
    n = kernel.n
    if n > DENSE_LIMIT:
        raise InvalidParameterError("identity check is a dense-mode diagnostic")
    pbar = 1.0 - p
    Pd = kernel.P.toarray()
    eye = np.eye(n)
    B = eye - pbar * Pd
    Binv = dense_solve(B, eye)
    gap1 = np.abs((eye - p * Binv) - pbar * (eye - Pd) @ Binv).max()
    gap2 = np.abs(B - ((1.0 - pbar) * eye + pbar * (eye - Pd))).max()
    return float(max(gap1, gap2))
