"""Sparse kernels and projections used by the PDHG iterations.

All operations are pure; `StackedK` instances are immutable apart from a
matvec counter used for cost accounting.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp

from .model import BoundClass, SparseMatrix


class StackedK:
    """The stacked constraint matrix K = (G; A) with q = (h; b) alongside.

    Rows 0..m1 are the inequality block, m1..m1+m2 the equality block.
    A transpose (CSC) layout is cached for fast K^T products.

    `ops_count` tallies column-applications of K or K^T (a matrix argument
    with k columns counts k); increments are not synchronized, so share one
    instance across threads only if the tally may be approximate.
    """

    def __init__(self, G: SparseMatrix, A: SparseMatrix, h: np.ndarray, b: np.ndarray):
        if G.ncols != A.ncols:
            raise ValueError("G and A must have the same number of columns")
        self.m1 = G.nrows
        self.m2 = A.nrows
        self.n = G.ncols
        self._csr = sp.vstack([G.tocsr(), A.tocsr()], format="csr")
        self._csc = self._csr.tocsc()
        self.q = np.concatenate([np.asarray(h, dtype=np.float64), np.asarray(b, dtype=np.float64)])
        self.ops_count = 0

    @property
    def nrows(self) -> int:
        return self.m1 + self.m2

    @property
    def ncols(self) -> int:
        return self.n

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    def apply(self, v: np.ndarray, transposed: bool = False) -> np.ndarray:
        """Exact sparse product K @ v, or K^T @ v when `transposed`.

        Accepts a vector or a matrix of column vectors.
        """
        v = np.asarray(v, dtype=np.float64)
        expected = self.nrows if transposed else self.n
        if v.shape[0] != expected:
            raise ValueError(
                f"length mismatch: expected leading dimension {expected}, got {v.shape[0]}"
            )
        self.ops_count += 1 if v.ndim == 1 else v.shape[1]
        if transposed:
            return self._csc.T @ v
        return self._csr @ v

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()


def apply(K: StackedK, v: np.ndarray, transposed: bool = False) -> np.ndarray:
    """Sparse product with K or K^T; see StackedK.apply."""
    return K.apply(v, transposed=transposed)


def spectral_norm_estimate(K: StackedK, n_iter: int = 20) -> float:
    """Estimate ||K||_2 by power iteration on K^T K from an all-ones start.

    Runs n_iter rounds of b <- K^T (K b), b <- b / ||b||, then returns
    ||K b||.  The estimate is a lower bound on the true spectral norm, which
    is safe for step-size selection.  An all-zero K returns 0 with a warning.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if K.nnz == 0:
        warnings.warn("spectral norm of an all-zero matrix is 0", RuntimeWarning, stacklevel=2)
        return 0.0
    b = np.ones(K.n)
    for _ in range(n_iter):
        b = K.apply(K.apply(b), transposed=True)
        norm = float(np.linalg.norm(b))
        if norm == 0.0:
            # Start vector landed in the null space of K^T K; restart from a
            # fixed pseudorandom direction to keep the iteration alive.
            b = np.random.default_rng(0).standard_normal(K.n)
            norm = float(np.linalg.norm(b))
        b = b / norm
    return float(np.linalg.norm(K.apply(b)))


def omega_norm(x: np.ndarray, y: np.ndarray, omega: float) -> float:
    """sqrt(omega * ||x||^2 + ||y||^2 / omega), the primal-weighted norm."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    x_sq = float(np.dot(x, x))
    y_sq = float(np.dot(y, y))
    return float(np.sqrt(omega * x_sq + y_sq / omega))


def proj_box(v: np.ndarray, l: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Componentwise clamp of v to [l, u]; broadcasts over batch columns."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 2:
        return np.clip(v, np.asarray(l)[:, None], np.asarray(u)[:, None])
    return np.clip(v, l, u)


def proj_dual_cone(y: np.ndarray, m1: int) -> np.ndarray:
    """Clamp the first m1 (inequality) components at 0 from below."""
    out = np.array(y, dtype=np.float64, copy=True)
    if m1 > 0:
        out[:m1] = np.maximum(out[:m1], 0.0)
    return out


def proj_lambda(w: np.ndarray, classes) -> np.ndarray:
    """Project reduced costs onto the dual bound set per variable.

    FREE -> 0, UPPER_ONLY -> min(w, 0), LOWER_ONLY -> max(w, 0),
    BOXED -> w.  `classes` is a sequence of BoundClass or an int8 code array
    (BoundClass values).
    """
    w = np.asarray(w, dtype=np.float64)
    if isinstance(classes, np.ndarray):
        codes = classes.astype(np.int8)
    else:
        codes = np.fromiter(
            (c.value if isinstance(c, BoundClass) else int(c) for c in classes),
            dtype=np.int8,
            count=len(classes),
        )
    out = np.zeros_like(w)
    upper = codes == BoundClass.UPPER_ONLY.value
    lower = codes == BoundClass.LOWER_ONLY.value
    boxed = codes == BoundClass.BOXED.value
    out[upper] = np.minimum(w[upper], 0.0)
    out[lower] = np.maximum(w[lower], 0.0)
    out[boxed] = w[boxed]
    return out
