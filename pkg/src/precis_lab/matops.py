"""Dense symmetric matrix kernels shared by every estimator and diagnostic.

Everything is plain float64 numpy. Positive definiteness is handled
explicitly: a failed Cholesky is a typed error rather than a warning,
because several model generators deliberately produce covariances that sit
close to the singular boundary and the caller must tell the two apart.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import math

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NonPositiveDiagonal, NotPositiveDefinite

# Cholesky pivot floor, relative to the largest diagonal entry. Chosen so
# that deliberately ill-conditioned but valid covariances (noise variances
# down to 1e-4) still factor while genuinely singular input fails.
PD_EPSILON = 1e-12


def _as_array(m) -> np.ndarray:
    if isinstance(m, SymMatrix):
        return m.values
    return np.asarray(m, dtype=float)


@dataclass(frozen=True)
class SymMatrix:
    """Immutable dense symmetric matrix.

    ``values`` must be exactly symmetric and finite; use
    :meth:`from_array` with ``symmetrize=True`` for inputs carrying
    floating asymmetry from an upstream matmul. Instances are safe to
    share across parallel workers.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("matrix entries must be finite")
        if not np.array_equal(v, v.T):
            raise ValueError(
                "matrix is not exactly symmetric; use SymMatrix.from_array(..., symmetrize=True)"
            )
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_array(cls, values, symmetrize: bool = False) -> "SymMatrix":
        v = np.asarray(values, dtype=float)
        if symmetrize:
            v = 0.5 * (v + v.T)
        return cls(v)

    @classmethod
    def identity(cls, p: int) -> "SymMatrix":
        return cls(np.eye(p))

    @classmethod
    def diagonal(cls, entries) -> "SymMatrix":
        return cls(np.diag(np.asarray(entries, dtype=float)))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SupportSet:
    """Off-diagonal nonzero pattern of a symmetric matrix, as unordered pairs.

    The diagonal is implicitly always in the support and never stored.
    Doubles as the edge set of the corresponding undirected graph.
    """

    dim: int
    pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        norm = set()
        for pair in self.pairs:
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise ValueError("self-pairs are not stored in a SupportSet")
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise ValueError(f"pair {pair} out of range for dim {self.dim}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "pairs", frozenset(norm))

    @classmethod
    def from_matrix(cls, m, eps: float = 0.0) -> "SupportSet":
        """Pairs where the off-diagonal magnitude strictly exceeds ``eps``."""
        v = _as_array(m)
        p = v.shape[0]
        ii, jj = np.triu_indices(p, k=1)
        keep = np.abs(v[ii, jj]) > eps
        pairs = {(int(i), int(j)) for i, j in zip(ii[keep], jj[keep])}
        return cls(p, frozenset(pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        i, j = pair
        return (min(i, j), max(i, j)) in self.pairs

    def sorted_pairs(self) -> list:
        return sorted(self.pairs)


def cholesky(m: SymMatrix) -> np.ndarray:
    """Lower-triangular factor L with L @ L.T equal to ``m``.

    Raises NotPositiveDefinite as soon as a pivot falls at or below
    PD_EPSILON relative to the largest diagonal entry.
    """
    a = m.values
    p = a.shape[0]
    floor = PD_EPSILON * max(float(a.diagonal().max()), 0.0)
    lower = np.zeros_like(a)
    for j in range(p):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= floor:
            raise NotPositiveDefinite(
                f"pivot {pivot:.6e} at column {j} is at or below the floor {floor:.6e}"
            )
        ljj = math.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < p:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / ljj
    return lower


def invert(m: SymMatrix) -> SymMatrix:
    """Inverse of a positive definite matrix via its Cholesky factor."""
    lower = cholesky(m)
    li = solve_triangular(lower, np.eye(m.dim), lower=True, check_finite=False)
    return SymMatrix.from_array(li.T @ li, symmetrize=True)


def log_det(m: SymMatrix) -> float:
    """log determinant of a positive definite matrix."""
    lower = cholesky(m)
    return float(2.0 * np.sum(np.log(lower.diagonal())))


def norm_l1_all(m) -> float:
    """Sum of the absolute values of every entry."""
    return float(np.abs(_as_array(m)).sum())


def norm_l1_offdiag(m) -> float:
    """Sum of absolute values of the off-diagonal entries."""
    a = np.abs(_as_array(m))
    return float(a.sum() - a.diagonal().sum())


def norm_max_abs(m) -> float:
    """Largest absolute entry (the element-wise maximum norm)."""
    return float(np.abs(_as_array(m)).max())


def norm_max_colsum(m) -> float:
    """Largest absolute column sum, max over j of sum_i |a_ij|.

    This is the norm used by the consistency condition diagnostics; for
    symmetric matrices it coincides with the row-sum variant below.
    """
    a = np.abs(_as_array(m))
    if a.size == 0:
        return 0.0
    return float(a.sum(axis=0).max())


def norm_max_rowsum(m) -> float:
    """Largest absolute row sum, max over i of sum_j |a_ij|."""
    a = np.abs(_as_array(m))
    if a.size == 0:
        return 0.0
    return float(a.sum(axis=1).max())


def soft_threshold(x, t):
    """Shrink ``x`` toward zero by ``t``: sign(x) * max(|x| - t, 0)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def to_correlation(m: SymMatrix) -> SymMatrix:
    """Rescale a covariance to unit diagonal: r_ij = m_ij / sqrt(m_ii m_jj)."""
    a = m.values
    d = a.diagonal()
    if np.any(d <= 0):
        raise NonPositiveDiagonal("all diagonal entries must be positive")
    s = 1.0 / np.sqrt(d)
    r = a * np.outer(s, s)
    r = r.copy()
    np.fill_diagonal(r, 1.0)
    return SymMatrix(r)


def kron_subblock(sigma: SymMatrix, rows: Sequence, cols: Sequence) -> np.ndarray:
    """Sub-block of sigma (x) sigma for ordered index pairs, without the p^2 x p^2 matrix.

    Entry ((i, j), (k, l)) equals sigma[i, k] * sigma[j, l], matching the
    row-major vectorisation where the pair (i, j) maps to flat index i*p + j.
    """
    a = sigma.values
    p = a.shape[0]
    r = np.array([(int(i), int(j)) for i, j in rows], dtype=int).reshape(-1, 2)
    c = np.array([(int(k), int(l)) for k, l in cols], dtype=int).reshape(-1, 2)
    for name, arr in (("rows", r), ("cols", c)):
        if arr.size and (arr.min() < 0 or arr.max() >= p):
            raise IndexError(f"{name} contain indices outside 0..{p - 1}")
    return a[np.ix_(r[:, 0], c[:, 0])] * a[np.ix_(r[:, 1], c[:, 1])]


def write_matrix(path, m) -> None:
    """Write a matrix as whitespace-separated rows, one line per row."""
    np.savetxt(path, _as_array(m), fmt="%.17g")


def read_matrix(path) -> np.ndarray:
    """Read a numeric matrix from whitespace- or comma-separated text."""
    with open(path) as fh:
        first = ""
        for line in fh:
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                first = stripped
                break
    delimiter = "," if "," in first else None
    return np.loadtxt(path, dtype=float, ndmin=2, delimiter=delimiter)


def read_sym_matrix(path, tol: float = 1e-8) -> SymMatrix:
    """Read a matrix file that should be symmetric up to print precision."""
    a = read_matrix(path)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > tol * scale:
        raise ValueError(f"{path}: matrix is not symmetric within tolerance {tol}")
    return SymMatrix.from_array(a, symmetrize=True)
