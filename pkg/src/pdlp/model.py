"""In-memory LP representation.

Problems are stored in the canonical form

    minimize    c^T x
    subject to  G x >= h
                A x  = b
                l <= x <= u

with infinite bounds represented by IEEE +/-inf.  Instances are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class BoundClass(enum.Enum):
    """Finiteness pattern of a variable's bounds.

    Determines the set the reduced cost is projected onto: {0} for FREE,
    the nonpositive half-line for UPPER_ONLY, the nonnegative half-line
    for LOWER_ONLY, and all reals for BOXED.
    """

    FREE = 0
    UPPER_ONLY = 1
    LOWER_ONLY = 2
    BOXED = 3


def bound_class(l_i: float, u_i: float) -> BoundClass:
    """Classify a single (lower, upper) bound pair.

    Requires l_i <= u_i; equality (a fixed variable) counts as BOXED.
    """
    if l_i > u_i:
        raise ValueError(f"crossed bounds: l={l_i} > u={u_i}")
    lower_finite = np.isfinite(l_i)
    upper_finite = np.isfinite(u_i)
    if lower_finite and upper_finite:
        return BoundClass.BOXED
    if lower_finite:
        return BoundClass.LOWER_ONLY
    if upper_finite:
        return BoundClass.UPPER_ONLY
    return BoundClass.FREE


def bound_class_codes(l: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorized bound classification, returned as BoundClass values (int8)."""
    lower_finite = np.isfinite(l)
    upper_finite = np.isfinite(u)
    codes = np.full(l.shape, BoundClass.FREE.value, dtype=np.int8)
    codes[lower_finite & upper_finite] = BoundClass.BOXED.value
    codes[lower_finite & ~upper_finite] = BoundClass.LOWER_ONLY.value
    codes[~lower_finite & upper_finite] = BoundClass.UPPER_ONLY.value
    return codes


class SparseMatrix:
    """Compressed sparse matrix used for the constraint blocks G and A.

    Duplicate (row, col) entries supplied at construction are summed and
    explicit zeros are dropped, so stored entries are unique and nonzero.
    """

    def __init__(self, csr: sp.csr_matrix):
        csr = sp.csr_matrix(csr)
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        self._csr = csr

    @classmethod
    def from_coo(
        cls,
        nrows: int,
        ncols: int,
        rows: np.ndarray,
        cols: np.ndarray,
        values: np.ndarray,
    ) -> "SparseMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("column index out of range")
        coo = sp.coo_matrix((values, (rows, cols)), shape=(nrows, ncols))
        return cls(coo.tocsr())

    @classmethod
    def from_dense(cls, array) -> "SparseMatrix":
        return cls(sp.csr_matrix(np.asarray(array, dtype=np.float64)))

    @classmethod
    def empty(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(sp.csr_matrix((nrows, ncols)))

    @property
    def nrows(self) -> int:
        return self._csr.shape[0]

    @property
    def ncols(self) -> int:
        return self._csr.shape[1]

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    def tocsr(self) -> sp.csr_matrix:
        return self._csr

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


@dataclass
class LpProblem:
    """Canonical LP data: (c, G, h, A, b, l, u).

    `objective_constant` is a reporting-only offset (e.g. from an MPS
    objective-row RHS); it never enters the optimization itself.
    """

    c: np.ndarray
    G: SparseMatrix
    h: np.ndarray
    A: SparseMatrix
    b: np.ndarray
    l: np.ndarray
    u: np.ndarray
    name: str = ""
    objective_constant: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        self.h = np.asarray(self.h, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        self.l = np.asarray(self.l, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m1(self) -> int:
        return self.G.nrows

    @property
    def m2(self) -> int:
        return self.A.nrows

    @cached_property
    def q(self) -> np.ndarray:
        """Stacked right-hand side (h; b)."""
        return np.concatenate([self.h, self.b])

    @cached_property
    def bound_codes(self) -> np.ndarray:
        return bound_class_codes(self.l, self.u)

    @cached_property
    def bound_classes(self) -> tuple[BoundClass, ...]:
        return tuple(BoundClass(int(code)) for code in self.bound_codes)

    @cached_property
    def stacked_k(self):
        from .linalg import StackedK

        return StackedK(self.G, self.A, self.h, self.b)


def validate(problem: LpProblem) -> list[str]:
    """Return every invariant violation found; an empty list means valid."""
    violations: list[str] = []
    n = problem.c.shape[0]

    for label, vec, length in [
        ("l", problem.l, n),
        ("u", problem.u, n),
        ("h", problem.h, problem.G.nrows),
        ("b", problem.b, problem.A.nrows),
    ]:
        if vec.shape[0] != length:
            violations.append(
                f"dimension mismatch {label}: expected {length}, got {vec.shape[0]}"
            )
    if problem.G.ncols != n:
        violations.append(f"dimension mismatch c vs G: {n} vs {problem.G.ncols} columns")
    if problem.A.ncols != n:
        violations.append(f"dimension mismatch c vs A: {n} vs {problem.A.ncols} columns")

    if np.isnan(problem.c).any():
        violations.append("NaN in c")
    if not np.all(np.isfinite(problem.c)):
        violations.append("non-finite entry in c")
    for label, vec in [("h", problem.h), ("b", problem.b)]:
        if np.isnan(vec).any():
            violations.append(f"NaN in {label}")
        elif not np.all(np.isfinite(vec)):
            violations.append(f"non-finite entry in {label}")
    for label, mat in [("G", problem.G), ("A", problem.A)]:
        data = mat.tocsr().data
        if np.isnan(data).any():
            violations.append(f"NaN in {label}")
        elif not np.all(np.isfinite(data)):
            violations.append(f"non-finite entry in {label}")

    if np.isnan(problem.l).any():
        violations.append("NaN in l")
    if np.isnan(problem.u).any():
        violations.append("NaN in u")
    if problem.l.shape == problem.u.shape:
        with np.errstate(invalid="ignore"):
            crossed = np.where(problem.l > problem.u)[0]
        for i in crossed:
            violations.append(f"bound crossing at index {i}")
    # +inf lower / -inf upper bounds make the variable domain empty.
    for i in np.where(problem.l == np.inf)[0]:
        violations.append(f"lower bound +inf at index {i}")
    for i in np.where(problem.u == -np.inf)[0]:
        violations.append(f"upper bound -inf at index {i}")

    return violations
