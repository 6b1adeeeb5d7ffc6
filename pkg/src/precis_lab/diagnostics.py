"""Consistency-condition diagnostics and objective decompositions.

The two gamma quantities measure how strongly the off-support part of the
problem couples to the support; values below one are the classical
sufficient conditions for l1-based support recovery (the first for the
penalised-likelihood route, the second for the column-wise route). Both
are computed on the exact ground-truth matrices, never on estimates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite, SingularBlock, SingularGamma
from .matops import (
    SymMatrix,
    SupportSet,
    cholesky,
    invert,
    log_det,
    norm_l1_all,
    norm_l1_offdiag,
)

REPORT_COLUMNS = ("p", "support_size", "gamma1", "gamma2", "satisfied1", "satisfied2")


@dataclass(frozen=True)
class ConsistencyReport:
    """Both consistency-condition norms for one ground-truth model."""

    dim: int
    support_size: int
    gamma1: float
    gamma2: float

    @property
    def satisfied1(self) -> bool:
        return self.gamma1 < 1.0

    @property
    def satisfied2(self) -> bool:
        return self.gamma2 < 1.0

    def csv_row(self) -> str:
        return ",".join(
            [
                str(self.dim),
                str(self.support_size),
                repr(float(self.gamma1)),
                repr(float(self.gamma2)),
                "true" if self.satisfied1 else "false",
                "true" if self.satisfied2 else "false",
            ]
        )


@dataclass(frozen=True)
class ObjectiveBreakdown:
    """Terms of the penalised likelihood at one matrix.

    ``total`` is log_det_term + neg_trace_term - penalty_term; the penalty
    term is stored positive.
    """

    log_det_term: float
    neg_trace_term: float
    penalty_term: float

    @property
    def total(self) -> float:
        return self.log_det_term + self.neg_trace_term - self.penalty_term


def support_indices(support: SupportSet) -> list[tuple[int, int]]:
    """Ordered V x V index pairs of the support: the diagonal plus both
    orderings of every edge, sorted row-major."""
    pairs = {(i, i) for i in range(support.dim)}
    for i, j in support.pairs:
        pairs.add((i, j))
        pairs.add((j, i))
    return sorted(pairs)


def _complement_indices(dim: int, s_idx: list[tuple[int, int]]) -> list[tuple[int, int]]:
    s_set = set(s_idx)
    return [(i, j) for i in range(dim) for j in range(dim) if (i, j) not in s_set]


def _solve_spd(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    y = solve_triangular(lower, rhs, lower=True, check_finite=False)
    return solve_triangular(lower.T, y, lower=False, check_finite=False)


def assumption1_gamma(precision_true: SymMatrix, support: SupportSet, *,
                      use_row_sums: bool = False) -> float:
    """Coupling norm of the Kronecker Hessian between off-support and support.

    With sigma the inverse of the true precision and G = sigma (x) sigma
    indexed by ordered pairs, this is the norm of
    G[off-support, support] @ inv(G[support, support]), evaluated without
    materialising the p^2 x p^2 matrix. The default norm is the largest
    absolute column sum; ``use_row_sums`` switches to row sums for
    sensitivity checks.
    """
    if precision_true.dim != support.dim:
        raise DimensionMismatch("precision and support dimensions disagree")
    sigma = invert(precision_true)
    s_idx = support_indices(support)
    c_idx = _complement_indices(precision_true.dim, s_idx)
    if not c_idx:
        return 0.0
    from .matops import kron_subblock

    g_ss = kron_subblock(sigma, s_idx, s_idx)
    g_cs = kron_subblock(sigma, c_idx, s_idx)
    try:
        lower = cholesky(SymMatrix(g_ss))
    except NotPositiveDefinite as exc:
        raise SingularGamma(f"support block of the Kronecker Hessian: {exc}") from exc
    m_t = _solve_spd(lower, g_cs.T)  # transpose of G_cs @ inv(G_ss)
    a = np.abs(m_t)
    if use_row_sums:
        return float(a.sum(axis=0).max())
    return float(a.sum(axis=1).max())


def assumption2_gamma(cov_true: SymMatrix, precision_true: SymMatrix, *,
                      use_row_sums: bool = False) -> float:
    """Column-wise coupling norm: the worst, over rows i, of the norm of
    sigma[s_i^c, s_i] @ inv(sigma[s_i, s_i]) where s_i collects the
    nonzero positions of row i of the true precision."""
    if cov_true.dim != precision_true.dim:
        raise DimensionMismatch("covariance and precision dimensions disagree")
    sv = cov_true.values
    pv = precision_true.values
    worst = 0.0
    for i in range(cov_true.dim):
        s_i = np.flatnonzero(pv[i] != 0.0)
        c_i = np.flatnonzero(pv[i] == 0.0)
        if c_i.size == 0:
            continue
        block = sv[np.ix_(s_i, s_i)]
        cross = sv[np.ix_(c_i, s_i)]
        try:
            lower = cholesky(SymMatrix(block))
        except NotPositiveDefinite as exc:
            raise SingularBlock(f"row {i}: {exc}") from exc
        m_t = _solve_spd(lower, cross.T)
        a = np.abs(m_t)
        if a.size == 0:
            continue
        if use_row_sums:
            worst = max(worst, float(a.sum(axis=0).max()))
        else:
            worst = max(worst, float(a.sum(axis=1).max()))
    return worst


def consistency_report(precision_true: SymMatrix,
                       support: SupportSet | None = None,
                       cov_true: SymMatrix | None = None, *,
                       use_row_sums: bool = False) -> ConsistencyReport:
    """Evaluate both conditions for one model; support defaults to the
    exact nonzero pattern of the precision and the covariance to its
    inverse."""
    if support is None:
        support = SupportSet.from_matrix(precision_true, eps=0.0)
    if cov_true is None:
        cov_true = invert(precision_true)
    g1 = assumption1_gamma(precision_true, support, use_row_sums=use_row_sums)
    g2 = assumption2_gamma(cov_true, precision_true, use_row_sums=use_row_sums)
    return ConsistencyReport(
        dim=precision_true.dim,
        support_size=len(support),
        gamma1=g1,
        gamma2=g2,
    )


def glasso_objective(omega: SymMatrix, s: SymMatrix, lam: float,
                     penalize_diagonal: bool = False) -> ObjectiveBreakdown:
    """Decompose log det(omega) - trace(omega s) - lam ||omega||_1 at one point.

    ``penalize_diagonal`` selects whether the l1 norm runs over all
    entries or skips the diagonal, matching the estimator flag.
    """
    if omega.dim != s.dim:
        raise DimensionMismatch("omega and s dimensions disagree")
    ld = log_det(omega)
    neg_trace = -float((omega.values * s.values).sum())
    norm = norm_l1_all(omega) if penalize_diagonal else norm_l1_offdiag(omega)
    return ObjectiveBreakdown(
        log_det_term=ld,
        neg_trace_term=neg_trace,
        penalty_term=lam * norm,
    )


def trace_bound_check(c: SymMatrix, omega: SymMatrix) -> bool:
    """True when trace(c omega) <= ||omega||_1, valid whenever max |c| <= 1.

    This is the boundedness argument for normalised input: an estimate can
    always keep its trace term under its own l1 norm, so the objective of
    some sparse matrix stays bounded even when the truth's penalty blows
    up. Expected to hold for every valid input; exposed as a sanity check.
    """
    if c.dim != omega.dim:
        raise DimensionMismatch("c and omega dimensions disagree")
    if float(np.abs(c.values).max()) > 1.0 + 1e-12:
        raise ValueError("entries of c must not exceed 1 in magnitude")
    tr = float((c.values * omega.values).sum())
    return tr <= norm_l1_all(omega) + 1e-10
