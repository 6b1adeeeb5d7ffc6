import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from precis_lab.errors import NotPositiveDefinite
from precis_lab.estimators import (
    SUPPORT_EPSILON,
    CalibrationSearch,
    EstimatorConfig,
    calibrate_lambda,
    clime,
    clime_columns,
    glasso,
    min_magnitude_symmetrize,
    naive,
    scio,
    scio_columns,
)
from precis_lab.matops import SymMatrix, invert, to_correlation
from precis_lab.models import LatentModelSpec, latent_covariance


def random_correlation(p, seed, n_factor=1.5, ridge=0.2):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((int(p * n_factor) + 2, p))
    s = g.T @ g / g.shape[0] + ridge * np.eye(p)
    return to_correlation(SymMatrix.from_array(s, symmetrize=True))


def glasso_kkt_violation(omega, s, lam, penalize_diagonal):
    grad = invert(omega).values - s.values
    ov = omega.values
    worst = 0.0
    for i in range(s.dim):
        for j in range(s.dim):
            if i == j and not penalize_diagonal:
                continue
            if ov[i, j] != 0.0:
                worst = max(worst, abs(grad[i, j] - lam * np.sign(ov[i, j])))
            else:
                worst = max(worst, abs(grad[i, j]) - lam)
    return worst


def column_subgradient_violation(s, raw, lam):
    sv = s.values
    worst = 0.0
    for i in range(s.dim):
        e = np.zeros(s.dim)
        e[i] = 1.0
        r = sv @ raw[:, i] - e
        nz = raw[:, i] != 0.0
        if nz.any():
            worst = max(worst, np.abs(r[nz] + lam * np.sign(raw[:, i][nz])).max())
        if (~nz).any():
            worst = max(worst, np.abs(r[~nz]).max() - lam)
    return worst


def clime_oracle_vertex_enumeration(s, i, lam):
    """Optimal l1 norm by brute force over basic solutions of the lifted LP."""
    p = s.shape[0]
    e = np.zeros(p)
    e[i] = 1.0
    a = np.vstack([np.hstack([s, -s]), np.hstack([-s, s])])
    b = np.concatenate([lam + e, lam - e])
    m, n = a.shape
    a_eq = np.hstack([a, np.eye(m)])  # slacks
    best = np.inf
    cost = np.concatenate([np.ones(n), np.zeros(m)])
    for cols in itertools.combinations(range(n + m), m):
        basis = a_eq[:, cols]
        if abs(np.linalg.det(basis)) < 1e-12:
            continue
        x_b = np.linalg.solve(basis, b)
        if (x_b < -1e-9).any():
            continue
        best = min(best, cost[list(cols)] @ x_b)
    return best


class TestGlasso:
    def test_identity_penalized_diagonal(self):
        r = glasso(SymMatrix.identity(4), EstimatorConfig(lam=0.1, penalize_diagonal=True))
        np.testing.assert_allclose(r.omega.values, np.eye(4) / 1.1, atol=1e-10)
        assert r.converged and len(r.support) == 0

    def test_identity_unpenalized_diagonal(self):
        r = glasso(SymMatrix.identity(4), EstimatorConfig(lam=0.1))
        np.testing.assert_allclose(r.omega.values, np.eye(4), atol=1e-12)

    def test_saturating_lambda_gives_diagonal(self):
        s = random_correlation(6, seed=0)
        lam = float(np.abs(s.values - np.eye(6)).max()) * 1.01
        r = glasso(s, EstimatorConfig(lam=lam))
        assert len(r.support) == 0
        np.testing.assert_allclose(
            r.omega.values.diagonal(), 1.0 / s.values.diagonal(), rtol=1e-8
        )

    def test_zero_lambda_is_plain_inverse(self):
        s = random_correlation(5, seed=1)
        r = glasso(s, EstimatorConfig(lam=0.0))
        np.testing.assert_allclose(r.omega.values, invert(s).values, atol=1e-10)

    def test_zero_lambda_rejects_singular(self):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((3, 6))  # rank deficient
        s = SymMatrix.from_array(g.T @ g / 3, symmetrize=True)
        with pytest.raises(NotPositiveDefinite):
            glasso(s, EstimatorConfig(lam=0.0))

    @pytest.mark.parametrize("lam", [0.01, 0.1, 0.3])
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_kkt_certificate(self, lam, seed):
        s = random_correlation(10, seed)
        r = glasso(s, EstimatorConfig(lam=lam))
        assert r.converged
        assert glasso_kkt_violation(r.omega, s, lam, False) < 1e-4

    def test_kkt_certificate_penalized_diagonal(self):
        s = random_correlation(8, seed=5)
        r = glasso(s, EstimatorConfig(lam=0.1, penalize_diagonal=True))
        assert glasso_kkt_violation(r.omega, s, 0.1, True) < 1e-4

    def test_objective_terms_present(self):
        s = random_correlation(5, seed=3)
        r = glasso(s, EstimatorConfig(lam=0.1))
        ld, nt, npen = r.objective_terms
        assert npen <= 0.0
        assert np.isfinite(ld + nt + npen)


class TestClime:
    def test_identity_shrinks_diagonal(self):
        r = clime(SymMatrix.identity(3), EstimatorConfig(lam=0.1))
        np.testing.assert_allclose(r.omega.values, 0.9 * np.eye(3), atol=1e-9)

    def test_lambda_above_one_gives_zero(self):
        r = clime(random_correlation(4, seed=2), EstimatorConfig(lam=1.0))
        np.testing.assert_allclose(r.omega.values, np.zeros((4, 4)), atol=1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_columns_feasible(self, seed):
        s = random_correlation(7, seed)
        lam = 0.08
        raw, _ = clime_columns(s, lam)
        resid = np.abs(s.values @ raw - np.eye(7)).max()
        assert resid <= lam + 1e-8

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_reference_lp(self, seed):
        p = 5
        s = random_correlation(p, seed + 20)
        lam = 0.05
        raw, _ = clime_columns(s, lam)
        a = np.vstack(
            [np.hstack([s.values, -s.values]), np.hstack([-s.values, s.values])]
        )
        for i in range(p):
            e = np.zeros(p)
            e[i] = 1.0
            ref = linprog(
                np.ones(2 * p),
                A_ub=a,
                b_ub=np.concatenate([lam + e, lam - e]),
                method="highs",
            )
            assert ref.status == 0
            assert np.abs(raw[:, i]).sum() == pytest.approx(ref.fun, abs=1e-6)

    def test_matches_vertex_enumeration_oracle(self):
        p = 3
        s = random_correlation(p, seed=42)
        lam = 0.05
        raw, _ = clime_columns(s, lam)
        for i in range(p):
            oracle = clime_oracle_vertex_enumeration(s.values, i, lam)
            assert np.abs(raw[:, i]).sum() == pytest.approx(oracle, abs=1e-6)


class TestScio:
    def test_identity_soft_threshold(self):
        r = scio(SymMatrix.identity(3), EstimatorConfig(lam=0.1))
        np.testing.assert_allclose(r.omega.values, 0.9 * np.eye(3), atol=1e-12)

    def test_zero_lambda_is_inverse(self):
        s = random_correlation(6, seed=4)
        r = scio(s, EstimatorConfig(lam=0.0))
        assert np.abs(r.omega.values - invert(s).values).max() < 1e-6

    def test_lambda_at_one_gives_zero(self):
        r = scio(random_correlation(4, seed=6), EstimatorConfig(lam=1.0))
        np.testing.assert_allclose(r.omega.values, np.zeros((4, 4)), atol=1e-12)

    @pytest.mark.parametrize("lam", [0.01, 0.1, 0.3])
    @pytest.mark.parametrize("seed", [0, 1])
    def test_subgradient_certificate(self, lam, seed):
        s = random_correlation(10, seed + 30)
        raw, _, ok = scio_columns(s, lam, tol=1e-9)
        assert ok
        assert column_subgradient_violation(s, raw, lam) < 1e-6


class TestMinMagnitudeSymmetrize:
    def test_picks_smaller_magnitude_with_sign(self):
        raw = np.array([[2.0, 0.5], [-0.3, 1.0]])
        out = min_magnitude_symmetrize(raw)
        assert out[0, 1] == out[1, 0] == -0.3

    def test_zero_wins(self):
        raw = np.array([[1.0, 0.0], [0.7, 1.0]])
        out = min_magnitude_symmetrize(raw)
        assert out[0, 1] == 0.0

    def test_tie_keeps_upper_entry(self):
        raw = np.array([[1.0, 0.4], [-0.4, 1.0]])
        out = min_magnitude_symmetrize(raw)
        assert out[0, 1] == out[1, 0] == 0.4

    def test_diagonal_untouched(self):
        raw = np.array([[3.0, 1.0], [2.0, -4.0]])
        out = min_magnitude_symmetrize(raw)
        assert out[0, 0] == 3.0 and out[1, 1] == -4.0

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_magnitude_is_pairwise_minimum(self, seed):
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((4, 4))
        out = min_magnitude_symmetrize(raw)
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert abs(out[i, j]) == min(abs(raw[i, j]), abs(raw[j, i]))


class TestNaive:
    def test_zero_edges_is_diagonal(self):
        s = random_correlation(5, seed=7)
        r = naive(s, 0)
        assert len(r.support) == 0
        np.testing.assert_allclose(
            r.omega.values, np.diag(invert(s).values.diagonal()), atol=1e-12
        )

    def test_all_edges_is_full_inverse(self):
        s = random_correlation(5, seed=8)
        r = naive(s, 10)
        np.testing.assert_allclose(r.omega.values, invert(s).values, atol=1e-12)

    def test_latent_worked_example(self):
        cov = latent_covariance(LatentModelSpec(1, 1, 1.0, 1.0, np.array([[2.0]])))
        r = naive(cov, 1)
        assert r.support.pairs == frozenset({(0, 1)})

    def test_exact_edge_count(self):
        s = random_correlation(8, seed=9)
        for k in (1, 5, 13):
            assert len(naive(s, k).support) == k

    def test_rejects_out_of_range_target(self):
        with pytest.raises(ValueError):
            naive(SymMatrix.identity(3), 4)

    def test_tie_break_lexicographic(self):
        # equal off-diagonal magnitudes everywhere: the smallest pairs win
        v = np.full((3, 3), 0.2)
        np.fill_diagonal(v, 1.0)
        r = naive(SymMatrix(v), 1)
        inv = invert(SymMatrix(v)).values
        assert abs(inv[0, 1] - inv[0, 2]) < 1e-12  # genuine tie
        assert r.support.pairs == frozenset({(0, 1)})


class TestCalibration:
    def test_target_zero(self):
        s = random_correlation(6, seed=10)
        for method in ("glasso", "clime", "scio", "naive"):
            out = calibrate_lambda(method, s, 0)
            assert len(out.result.support) == 0
            assert out.exact

    def test_impossible_target_clamps_with_flag(self):
        cov = latent_covariance(
            LatentModelSpec(1, 4, 1.0, 0.5, np.random.default_rng(3).standard_normal((4, 1)))
        )
        s = to_correlation(cov)
        out = calibrate_lambda("glasso", s, 21)  # only 10 pairs exist
        assert not out.exact
        assert out.achieved_edges == 10

    def test_scio_hits_every_small_count(self):
        rng = np.random.default_rng(12)
        noise = rng.standard_normal((8, 8)) * 0.05
        s = SymMatrix.from_array(np.eye(8) + noise + noise.T, symmetrize=True)
        for k in range(1, 6):
            out = calibrate_lambda("scio", s, k)
            assert out.exact and len(out.result.support) == k

    def test_exact_count_matches_dense_sweep(self):
        # lambda from calibration is consistent with a brute-force scan
        rng = np.random.default_rng(13)
        noise = rng.standard_normal((6, 6)) * 0.05
        s = SymMatrix.from_array(np.eye(6) + noise + noise.T, symmetrize=True)
        target = 3
        out = calibrate_lambda("scio", s, target)
        counts = {}
        for lam in np.geomspace(1e-6, 0.2, 200):
            counts[lam] = len(scio(s, EstimatorConfig(lam=float(lam))).support)
        achievable = {c for c in counts.values()}
        assert target in achievable
        assert len(out.result.support) == target

    def test_edge_count_monotone_in_lambda(self):
        s = random_correlation(8, seed=14)
        for method in ("glasso", "scio", "clime"):
            prev = None
            for lam in (0.02, 0.05, 0.1, 0.2, 0.4):
                count = len(
                    {"glasso": glasso, "scio": scio, "clime": clime}[method](
                        s, EstimatorConfig(lam=lam)
                    ).support
                )
                if prev is not None:
                    assert count <= prev
                prev = count

    def test_identity_input_no_spurious_edges(self):
        s = SymMatrix.identity(5)
        for method in ("glasso", "clime", "scio"):
            for lam in (0.01, 0.3, 0.9):
                solver = {"glasso": glasso, "clime": clime, "scio": scio}[method]
                assert len(solver(s, EstimatorConfig(lam=lam)).support) == 0

    def test_naive_calibration_exact(self):
        s = random_correlation(7, seed=15)
        out = calibrate_lambda("naive", s, 9)
        assert out.exact and len(out.result.support) == 9

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            calibrate_lambda("ridge", SymMatrix.identity(3), 1)

    def test_search_overrides(self):
        s = random_correlation(6, seed=16)
        out = calibrate_lambda(
            "scio", s, 4, search=CalibrationSearch(max_steps=10, refine_points=4)
        )
        assert out.evaluations <= 16


class TestSupportEpsilon:
    def test_numerical_dust_excluded(self):
        raw = np.eye(3)
        raw[0, 1] = raw[1, 0] = SUPPORT_EPSILON / 2
        from precis_lab.matops import SupportSet

        assert len(SupportSet.from_matrix(raw, SUPPORT_EPSILON)) == 0
