"""Ruiz equilibration of the constraint matrix and iterate un/rescaling.

The scaled problem uses K~ = D_r^{-1} K D_c^{-1} with the induced change of
variables x~ = D_c x, c~ = D_c^{-1} c, q~ = D_r^{-1} q, and bounds
l~ = D_c l, u~ = D_c u.  Duals transform as y = D_r^{-1} y~, the unique
choice keeping K~^T y~ = D_c^{-1} K^T y and hence the reduced costs
consistent between the two spaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linalg import StackedK
from .model import LpProblem, SparseMatrix


@dataclass
class ScalingData:
    """Diagonals of D_r and D_c plus the number of Ruiz sweeps performed."""

    d_row: np.ndarray
    d_col: np.ndarray
    iterations_used: int

    def __post_init__(self):
        if not (np.all(self.d_row > 0) and np.all(np.isfinite(self.d_row))):
            raise ValueError("d_row entries must be positive and finite")
        if not (np.all(self.d_col > 0) and np.all(np.isfinite(self.d_col))):
            raise ValueError("d_col entries must be positive and finite")


def _axis_inf_norms(mat: sp.csr_matrix, axis: int) -> np.ndarray:
    """Per-row (axis=1) or per-column (axis=0) infinity norms; 0 for empty."""
    size = mat.shape[1 - axis]
    if mat.nnz == 0:
        return np.zeros(size)
    return np.abs(mat).max(axis=axis).toarray().ravel()


def ruiz_equilibrate(K: StackedK, max_iter: int = 10, tol: float = 1e-4) -> ScalingData:
    """Iteratively scale rows and columns toward unit infinity norm.

    Each sweep divides rows and columns by the square roots of their current
    infinity norms; sweeps stop once all nonzero row/column norms lie within
    [1 - tol, 1 + tol] or after max_iter.  All-zero rows/columns keep scale 1.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    m, n = K.nrows, K.ncols
    scaled = K._csr.copy()
    row_mult = np.ones(m)
    col_mult = np.ones(n)

    used = 0
    for _ in range(max_iter):
        row_norms = _axis_inf_norms(scaled, axis=1)
        col_norms = _axis_inf_norms(scaled, axis=0)
        nz_rows = row_norms > 0
        nz_cols = col_norms > 0
        if (
            np.all(np.abs(row_norms[nz_rows] - 1.0) <= tol)
            and np.all(np.abs(col_norms[nz_cols] - 1.0) <= tol)
        ):
            break
        used += 1
        r_step = np.ones(m)
        c_step = np.ones(n)
        r_step[nz_rows] = 1.0 / np.sqrt(row_norms[nz_rows])
        c_step[nz_cols] = 1.0 / np.sqrt(col_norms[nz_cols])
        scaled = sp.diags(r_step) @ scaled @ sp.diags(c_step)
        row_mult *= r_step
        col_mult *= c_step

    # Stored diagonals are D_r, D_c themselves: the scaled matrix divides
    # entries by d_row[i] * d_col[j].
    return ScalingData(d_row=1.0 / row_mult, d_col=1.0 / col_mult, iterations_used=used)


def apply_scaling(problem: LpProblem, s: ScalingData) -> LpProblem:
    """Return the Ruiz-scaled problem; infinite bounds stay infinite."""
    m1 = problem.m1
    d_row_ineq = s.d_row[:m1]
    d_row_eq = s.d_row[m1:]
    inv_col = sp.diags(1.0 / s.d_col)

    G_scaled = sp.diags(1.0 / d_row_ineq) @ problem.G.tocsr() @ inv_col
    A_scaled = sp.diags(1.0 / d_row_eq) @ problem.A.tocsr() @ inv_col

    l_scaled = problem.l * s.d_col
    u_scaled = problem.u * s.d_col

    return LpProblem(
        c=problem.c / s.d_col,
        G=SparseMatrix(sp.csr_matrix(G_scaled)),
        h=problem.h / d_row_ineq,
        A=SparseMatrix(sp.csr_matrix(A_scaled)),
        b=problem.b / d_row_eq,
        l=l_scaled,
        u=u_scaled,
        name=problem.name,
        objective_constant=problem.objective_constant,
    )


def unscale_iterate(x_scaled: np.ndarray, y_scaled: np.ndarray, s: ScalingData):
    """Map scaled-space iterates back to original variables."""
    return x_scaled / s.d_col, y_scaled / s.d_row


def scale_iterate(x: np.ndarray, y: np.ndarray, s: ScalingData):
    """Inverse of unscale_iterate; used to inject warm starts."""
    return x * s.d_col, y * s.d_row


def identity_scaling(m: int, n: int) -> ScalingData:
    return ScalingData(d_row=np.ones(m), d_col=np.ones(n), iterations_used=0)
