"""Sparse storage, direct solves, and a leading-eigenpair solver.

The eigensolver targets row-stochastic matrices that are similar to a
symmetric matrix through a known positive diagonal scaling, which is the
only case the rest of the package needs: if ``P = D^{-1} A`` with ``A``
symmetric and ``D`` the positive row-sum diagonal, then
``S = D^{1/2} P D^{-1/2}`` is symmetric and shares eigenvalues with
``P``.  Right and left eigenvectors of ``P`` are recovered from the
orthonormal eigenvectors ``u`` of ``S`` as ``v_R = D^{-1/2} u`` and
``v_L = D^{1/2} u``.
"""

import warnings

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (
    ConvergenceFailureError,
    InvalidParameterError,
    SingularMatrixError,
)

# Full dense decomposition below this size; iterative above.
DENSE_EIG_LIMIT = 600

_PIVOT_RTOL = 1e-14


class SparseMatrix:
    """Immutable CSR matrix with explicit structural validation.

    Parameters
    ----------
    n_rows, n_cols : int
        Shape of the matrix.
    indptr : (n_rows + 1,) int array
        Row pointer; ``indptr[0] == 0`` and ``indptr[-1] == nnz``.
    indices : (nnz,) int array
        Column indices, strictly increasing inside each row.
    data : (nnz,) float array
        Stored values.  Explicit zeros are rejected so that the stored
        pattern is exactly the support.
    """

    __slots__ = ("n_rows", "n_cols", "indptr", "indices", "data", "_csr")

    def __init__(self, n_rows, n_cols, indptr, indices, data):
        n_rows = int(n_rows)
        n_cols = int(n_cols)
        if n_rows < 0 or n_cols < 0:
            raise InvalidParameterError("matrix shape must be nonnegative")
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        data = np.ascontiguousarray(data, dtype=np.float64)
        if indptr.shape != (n_rows + 1,):
            raise InvalidParameterError("indptr length must be n_rows + 1")
        if indptr[0] != 0 or indptr[-1] != indices.size:
            raise InvalidParameterError("indptr endpoints are inconsistent")
        if np.any(np.diff(indptr) < 0):
            raise InvalidParameterError("indptr must be nondecreasing")
        if indices.shape != data.shape:
            raise InvalidParameterError("indices and data length mismatch")
        if indices.size:
            if indices.min() < 0 or indices.max() >= n_cols:
                raise InvalidParameterError("column index out of range")
            for r in range(n_rows):
                row = indices[indptr[r]:indptr[r + 1]]
                if row.size > 1 and np.any(np.diff(row) <= 0):
                    raise InvalidParameterError(
                        "column indices must be strictly increasing in row %d" % r
                    )
            if np.any(data == 0.0):
                raise InvalidParameterError("explicit zeros are not stored")
        for arr in (indptr, indices, data):
            arr.flags.writeable = False
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.indptr = indptr
        self.indices = indices
        self.data = data
        self._csr = None

    @property
    def nnz(self):
        return int(self.data.size)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @classmethod
    def from_coo(cls, n_rows, n_cols, rows, cols, vals):
        """Build from coordinate triplets.  Duplicates are summed; exact
        zeros (including cancellations) are dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise InvalidParameterError("coordinate arrays must match in length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= n_rows:
                raise InvalidParameterError("row index out of range")
            if cols.min() < 0 or cols.max() >= n_cols:
                raise InvalidParameterError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            key = rows * np.int64(n_cols) + cols
            uniq, inverse = np.unique(key, return_inverse=True)
            summed = np.zeros(uniq.size)
            np.add.at(summed, inverse, vals)
            keep = summed != 0.0
            uniq, summed = uniq[keep], summed[keep]
            rows = uniq // n_cols
            cols = uniq % n_cols
            vals = summed
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n_rows, n_cols, indptr, cols, vals)

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidParameterError("dense input must be 2-d")
        rows, cols = np.nonzero(arr)
        return cls.from_coo(arr.shape[0], arr.shape[1], rows, cols, arr[rows, cols])

    def to_scipy(self):
        if self._csr is None:
            self._csr = scipy.sparse.csr_matrix(
                (self.data, self.indices, self.indptr),
                shape=(self.n_rows, self.n_cols),
            )
        return self._csr

    def toarray(self):
        out = np.zeros((self.n_rows, self.n_cols))
        for r in range(self.n_rows):
            sl = slice(self.indptr[r], self.indptr[r + 1])
            out[r, self.indices[sl]] = self.data[sl]
        return out

    def diagonal(self):
        out = np.zeros(min(self.n_rows, self.n_cols))
        for r in range(out.size):
            sl = slice(self.indptr[r], self.indptr[r + 1])
            pos = np.searchsorted(self.indices[sl], r)
            if pos < self.indices[sl].size and self.indices[sl][pos] == r:
                out[r] = self.data[sl][pos]
        return out


def matvec(A, x):
    """Product ``A @ x`` for a :class:`SparseMatrix` and a dense vector
    or matrix ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != A.n_cols:
        raise InvalidParameterError(
            "dimension mismatch: matrix has %d columns, operand has leading "
            "dimension %d" % (A.n_cols, x.shape[0])
        )
    return A.to_scipy() @ x


def dense_solve(A, B):
    """Solve ``A X = B`` by LU factorization with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If any pivot falls below ``1e-14`` times the largest absolute
        entry of ``A``.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidParameterError("coefficient matrix must be square")
    if B.shape[0] != A.shape[0]:
        raise InvalidParameterError("right-hand side has incompatible rows")
    if A.shape[0] == 0:
        return B.copy()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    scale = np.abs(A).max()
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or pivots.min() < _PIVOT_RTOL * scale:
        raise SingularMatrixError(
            "pivot %.3e below threshold %.3e" % (pivots.min(), _PIVOT_RTOL * scale)
        )
    return scipy.linalg.lu_solve((lu, piv), B, check_finite=False)


class EigenPairs:
    """Leading eigenpairs of a row-stochastic matrix.

    Attributes
    ----------
    values : (J,) array
        Eigenvalues sorted descending.
    right_vectors, left_vectors : (n, J) arrays
        Unit-norm right and left eigenvectors, column ``j`` paired with
        ``values[j]``.
    """

    __slots__ = ("values", "right_vectors", "left_vectors")

    def __init__(self, values, right_vectors, left_vectors):
        self.values = np.asarray(values, dtype=np.float64)
        self.right_vectors = np.asarray(right_vectors, dtype=np.float64)
        self.left_vectors = np.asarray(left_vectors, dtype=np.float64)

    @property
    def count(self):
        return int(self.values.size)


def _similarity_matrix(P, d_diag):
    """Symmetric ``S = D^{1/2} P D^{-1/2}`` as a scipy CSR matrix."""
    sqrt_d = np.sqrt(d_diag)
    S = P.to_scipy().copy().astype(np.float64)
    S = scipy.sparse.diags(sqrt_d) @ S @ scipy.sparse.diags(1.0 / sqrt_d)
    # the scaled matrix is symmetric in exact arithmetic; enforce it
    S = (S + S.T) * 0.5
    return S.tocsr()


def top_eigenpairs(P, d_diag, J, tol=1e-8, method="auto", max_iter=10000):
    """Leading ``J`` eigenpairs of a row-stochastic ``P``.

    Parameters
    ----------
    P : SparseMatrix
        Square row-stochastic matrix of the form ``D^{-1} A`` with ``A``
        symmetric.
    d_diag : (n,) array
        The positive diagonal ``D`` that symmetrizes ``P``.
    J : int
        Number of pairs, ``1 <= J <= n``.
    tol : float
        Residual bound: every returned pair satisfies
        ``||P v - lambda v|| <= tol * ||v||``.
    method : {"auto", "dense", "iterative"}
        "auto" picks dense below ``DENSE_EIG_LIMIT`` rows.
    max_iter : int
        Iteration cap for the iterative path.

    Raises
    ------
    ConvergenceFailureError
        If the iterative path cannot push all requested residuals below
        ``tol`` within ``max_iter`` iterations.
    """
    if P.n_rows != P.n_cols:
        raise InvalidParameterError("eigenproblem requires a square matrix")
    n = P.n_rows
    if not isinstance(J, (int, np.integer)) or isinstance(J, bool):
        raise InvalidParameterError("J must be an integer")
    if J < 1 or J > n:
        raise InvalidParameterError("J must satisfy 1 <= J <= n")
    if not (tol > 0):
        raise InvalidParameterError("tol must be positive")
    d_diag = np.asarray(d_diag, dtype=np.float64)
    if d_diag.shape != (n,) or np.any(d_diag <= 0):
        raise InvalidParameterError("d_diag must be positive with length n")
    if method not in ("auto", "dense", "iterative"):
        raise InvalidParameterError("unknown method %r" % (method,))
    if method == "auto":
        method = "dense" if n <= DENSE_EIG_LIMIT else "iterative"
    if not isinstance(max_iter, (int, np.integer)) or max_iter < 1:
        raise InvalidParameterError("max_iter must be a positive integer")

    S = _similarity_matrix(P, d_diag)
    sqrt_d = np.sqrt(d_diag)
    if method == "dense":
        vals, U = np.linalg.eigh(S.toarray())
        order = np.argsort(vals)[::-1][:J]
        vals = vals[order]
        U = U[:, order]
    else:
        P_csr = P.to_scipy()

        def p_residual(u, lam):
            # convergence is judged on P itself, not on the similar
            # symmetric matrix, because the scaling can inflate errors
            v = u / sqrt_d
            v = v / np.linalg.norm(v)
            return float(np.linalg.norm(P_csr @ v - lam * v))

        vals, U = _subspace_iteration(S, J, tol, max_iter, p_residual)

    right = U / sqrt_d[:, None]
    left = U * sqrt_d[:, None]
    right /= np.linalg.norm(right, axis=0)
    left /= np.linalg.norm(left, axis=0)
    return EigenPairs(vals, right, left)


def _subspace_iteration(S, J, tol, max_iter, residual_fn):
    """Shifted simultaneous iteration with Rayleigh-Ritz extraction and
    leading-pair deflation on a symmetric sparse ``S``.

    The shift ``sigma = max_i sum_j |S_ij|`` makes ``S + sigma I``
    positive semidefinite, so the algebraically largest eigenvalues of
    ``S`` are the ones the power steps amplify.  ``residual_fn(u, lam)``
    judges convergence of a candidate pair in the caller's metric.
    """
    n = S.shape[0]
    rng = np.random.default_rng(0x5EED)
    block = min(n, J + max(4, J // 2))
    sigma = float(np.abs(S).sum(axis=1).max())

    Q, _ = np.linalg.qr(rng.standard_normal((n, block)))
    locked_vecs = np.zeros((n, 0))
    locked_vals = []

    for _ in range(max_iter):
        Z = S @ Q + sigma * Q
        if locked_vecs.shape[1]:
            Z -= locked_vecs @ (locked_vecs.T @ Z)
        Q, _ = np.linalg.qr(Z)
        T = Q.T @ (S @ Q)
        T = (T + T.T) * 0.5
        theta, W = np.linalg.eigh(T)
        order = np.argsort(theta)[::-1]
        theta = theta[order]
        Q = Q @ W[:, order]

        # lock converged leading pairs so later sweeps target the rest
        while locked_vecs.shape[1] < J and Q.shape[1]:
            v = Q[:, 0]
            lam = theta[0]
            if residual_fn(v, lam) > tol:
                break
            locked_vecs = np.hstack([locked_vecs, v[:, None]])
            locked_vals.append(lam)
            Q = Q[:, 1:]
            theta = theta[1:]
        if locked_vecs.shape[1] >= J:
            vals = np.array(locked_vals[:J])
            order = np.argsort(vals)[::-1]
            return vals[order], locked_vecs[:, :J][:, order]
        if Q.shape[1] == 0:
            break

    worst = np.inf
    if Q.shape[1]:
        worst = residual_fn(Q[:, 0], theta[0])
    raise ConvergenceFailureError(
        "subspace iteration: %d of %d pairs converged after %d iterations "
        "(worst residual %.3e, tol %.3e)"
        % (locked_vecs.shape[1], J, max_iter, worst, tol)
    )
