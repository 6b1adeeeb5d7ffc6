import numpy as np
import pytest

from precis_lab.errors import (
    ConstantColumn,
    ExpressionFormatError,
    NotPositiveDefinite,
)
from precis_lab.matops import SymMatrix, cholesky, to_correlation
from precis_lab.models import (
    Dataset,
    LatentModelSpec,
    gene_model_from_correlation,
    latent_covariance,
    latent_precision,
    load_expression,
    random_a,
    rng_for,
    sample_covariance,
    sample_mvn,
    seed_fingerprint,
    standardize,
    synthetic_expression,
    write_expression,
)


def random_spec(seed, d1=None, d2=None):
    rng = np.random.default_rng(seed)
    d1 = d1 if d1 is not None else int(rng.integers(1, 4))
    d2 = d2 if d2 is not None else int(rng.integers(1, 8))
    sx2 = float(10 ** rng.uniform(-1, 1))
    se2 = float(10 ** rng.uniform(-2, 1))
    return LatentModelSpec(d1, d2, sx2, se2, rng.standard_normal((d2, d1)))


class TestLatentCovariance:
    def test_worked_1x1(self):
        spec = LatentModelSpec(1, 1, 1.0, 1.0, np.array([[2.0]]))
        np.testing.assert_allclose(
            latent_covariance(spec).values, [[1.0, 2.0], [2.0, 5.0]]
        )

    def test_zero_coupling_decouples(self):
        spec = LatentModelSpec(2, 3, 2.0, 0.5, np.zeros((3, 2)))
        cov = latent_covariance(spec).values
        np.testing.assert_allclose(cov, 2.0 * np.diag([1, 1, 0.5, 0.5, 0.5]))

    @pytest.mark.parametrize("seed", range(5))
    def test_always_positive_definite(self, seed):
        cov = latent_covariance(random_spec(seed))
        cholesky(cov)  # must not raise


class TestLatentPrecision:
    def test_worked_1x1(self):
        spec = LatentModelSpec(1, 1, 1.0, 1.0, np.array([[2.0]]))
        model = latent_precision(spec)
        np.testing.assert_allclose(model.precision.values, [[5.0, -2.0], [-2.0, 1.0]])

    @pytest.mark.parametrize("seed", range(10))
    def test_exact_inverse_pair(self, seed):
        model = latent_precision(random_spec(seed))
        prod = model.precision.values @ model.covariance.values
        assert np.abs(prod - np.eye(model.covariance.dim)).max() < 1e-8

    def test_dense_support_count(self):
        rng = np.random.default_rng(1)
        spec = LatentModelSpec(2, 10, 1.0, 0.01, rng.standard_normal((10, 2)))
        model = latent_precision(spec)
        # d2*d1 cross edges plus d1*(d1-1)/2 input-block edges
        assert len(model.support) == 21

    @pytest.mark.parametrize("seed", range(5))
    def test_no_output_block_edges(self, seed):
        spec = random_spec(seed)
        model = latent_precision(spec)
        for i, j in model.support.pairs:
            assert not (i >= spec.d1 and j >= spec.d1)

    def test_sparse_coupling_respected(self):
        a = np.array([[1.0, 0.0], [0.0, 0.0], [2.0, 3.0]])
        model = latent_precision(LatentModelSpec(2, 3, 1.0, 1.0, a))
        pairs = model.support.pairs
        assert (0, 2) in pairs and (0, 4) in pairs and (1, 4) in pairs
        assert (0, 3) not in pairs and (1, 2) not in pairs and (1, 3) not in pairs
        # (a'a)_01 = 6 couples the two inputs
        assert (0, 1) in pairs

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            LatentModelSpec(0, 1, 1.0, 1.0, np.zeros((1, 0)))
        with pytest.raises(ValueError):
            LatentModelSpec(1, 1, 0.0, 1.0, np.zeros((1, 1)))
        with pytest.raises(ValueError):
            LatentModelSpec(1, 2, 1.0, 1.0, np.zeros((1, 2)))


class TestRandomA:
    def test_zero_scale(self):
        a = random_a(3, 4, scale=0.0, rng=np.random.default_rng(0))
        np.testing.assert_array_equal(a, np.zeros((4, 3)))

    def test_deterministic_given_stream(self):
        a1 = random_a(2, 5, rng=rng_for(7, 1))
        a2 = random_a(2, 5, rng=rng_for(7, 1))
        np.testing.assert_array_equal(a1, a2)

    def test_entry_variance_in_chi2_band(self):
        # 20 entries, sample second moment within the central band
        a = random_a(2, 10, scale=1.0, rng=rng_for(0))
        assert 0.5 <= (a**2).mean() <= 1.5

    def test_sparsity_zeroes_entries(self):
        a = random_a(10, 40, sparsity=0.5, rng=rng_for(3))
        frac = (a == 0.0).mean()
        assert 0.3 < frac < 0.7

    def test_rejects_bad_sparsity(self):
        with pytest.raises(ValueError):
            random_a(2, 2, sparsity=1.0)


class TestSampling:
    def test_identity_large_sample(self):
        data = sample_mvn(SymMatrix.identity(3), 100_000, rng_for(5))
        s = sample_covariance(data)
        assert np.abs(s.values - np.eye(3)).max() < 0.05

    def test_empty_sample(self):
        data = sample_mvn(SymMatrix.identity(4), 0, rng_for(0))
        assert data.n == 0 and data.p == 4

    def test_seed_determinism(self):
        cov = latent_covariance(random_spec(3))
        d1 = sample_mvn(cov, 50, rng_for(11, 2))
        d2 = sample_mvn(cov, 50, rng_for(11, 2))
        np.testing.assert_array_equal(d1.rows, d2.rows)

    def test_rejects_non_pd(self):
        with pytest.raises(NotPositiveDefinite):
            sample_mvn(SymMatrix(np.array([[1.0, 2.0], [2.0, 1.0]])), 5, rng_for(0))


class TestStandardize:
    def test_two_point_hand_case(self):
        # population standard deviation convention
        d = standardize(Dataset(np.array([[0.0, 0.0], [2.0, 2.0]])))
        np.testing.assert_allclose(d.rows, [[-1.0, -1.0], [1.0, 1.0]])

    def test_moments(self):
        d = standardize(Dataset(np.random.default_rng(0).normal(3.0, 2.0, (200, 4))))
        assert np.abs(d.rows.mean(axis=0)).max() < 1e-10
        assert np.abs(d.rows.std(axis=0) - 1.0).max() < 1e-8

    def test_idempotent(self):
        d = standardize(Dataset(np.random.default_rng(1).normal(size=(50, 3))))
        again = standardize(d)
        assert np.abs(again.rows - d.rows).max() < 1e-10

    def test_constant_column_rejected(self):
        with pytest.raises(ConstantColumn):
            standardize(Dataset(np.array([[1.0, 5.0], [2.0, 5.0]])))

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            standardize(Dataset(np.ones((1, 2))))


class TestSampleCovariance:
    def test_unit_diagonal_after_standardize(self):
        d = standardize(Dataset(np.random.default_rng(2).normal(size=(64, 5))))
        s = sample_covariance(d)
        assert np.abs(s.values.diagonal() - 1.0).max() < 1e-8

    def test_mle_divisor(self):
        rows = np.array([[0.0], [2.0]])
        s = sample_covariance(Dataset(rows))
        # centered values -1, 1; divisor n=2
        assert s.values[0, 0] == pytest.approx(1.0)

    def test_converges_to_population_correlation(self):
        spec = LatentModelSpec(1, 3, 1.0, 0.5, np.random.default_rng(8).standard_normal((3, 1)))
        model = latent_precision(spec)
        target = to_correlation(model.covariance).values
        n = 2000
        worst = 0.0
        for seed in range(20):
            data = standardize(sample_mvn(model.covariance, n, rng_for(77, seed)))
            s = sample_covariance(data)
            worst = max(worst, float(np.abs(s.values - target).max()))
        assert worst < 5.0 / np.sqrt(n)


class TestGeneModel:
    def test_identity_correlation(self):
        model = gene_model_from_correlation(SymMatrix.identity(4), 0.1)
        np.testing.assert_array_equal(model.precision.values, np.eye(4))
        assert len(model.support) == 0

    def test_below_cutoff_edge_removed(self):
        r = 0.05
        c0 = SymMatrix(np.array([[1.0, r], [r, 1.0]]))
        # inverse off-diagonal is -r/(1-r^2), magnitude about 0.05 < 0.1
        model = gene_model_from_correlation(c0, 0.1)
        assert len(model.support) == 0
        assert model.precision.values[0, 1] == 0.0

    def test_kept_edges_and_inverse_consistency(self):
        c0 = SymMatrix(np.array([[1.0, 0.6, 0.0], [0.6, 1.0, 0.3], [0.0, 0.3, 1.0]]))
        model = gene_model_from_correlation(c0, 0.1)
        prod = model.precision.values @ model.covariance.values
        assert np.abs(prod - np.eye(3)).max() < 1e-8
        assert len(model.support) >= 2

    def test_rejection_raises(self):
        # removing the smallest off-diagonal of this inverse breaks
        # positive definiteness
        c0 = SymMatrix.from_array(
            [
                [1.0, 0.21, -0.373],
                [0.21, 1.0, 0.647],
                [-0.373, 0.647, 1.0],
            ],
            symmetrize=True,
        )
        gene_model_from_correlation(c0, 0.1)  # low cutoff keeps everything
        with pytest.raises(NotPositiveDefinite):
            gene_model_from_correlation(c0, 1.6)

    def test_requires_correlation_input(self):
        with pytest.raises(ValueError, match="correlation"):
            gene_model_from_correlation(SymMatrix.diagonal([2.0, 1.0]), 0.1)


class TestRngPlumbing:
    def test_streams_independent(self):
        a = rng_for(5, 0).standard_normal(4)
        b = rng_for(5, 1).standard_normal(4)
        assert not np.allclose(a, b)

    def test_fingerprint_stable(self):
        assert seed_fingerprint(5, 1, 2) == seed_fingerprint(5, 1, 2)
        assert seed_fingerprint(5, 1, 2) != seed_fingerprint(5, 2, 1)


class TestExpressionIO:
    def test_round_trip_genes_in_columns(self, tmp_path):
        data = synthetic_expression(12, 5, rank=2, rng=rng_for(1))
        path = tmp_path / "expr.tsv"
        write_expression(path, data, names=["a", "b", "c", "d", "e"])
        loaded, names = load_expression(path, genes_in="columns")
        assert names == ["a", "b", "c", "d", "e"]
        np.testing.assert_allclose(loaded, data)

    def test_round_trip_genes_in_rows(self, tmp_path):
        data = synthetic_expression(9, 4, rank=2, rng=rng_for(2))
        path = tmp_path / "expr_rows.tsv"
        write_expression(path, data, genes_in="rows")
        loaded, names = load_expression(path, genes_in="rows")
        assert len(names) == 4
        np.testing.assert_allclose(loaded, data)

    def test_constant_gene_dropped(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("g1,g2,g3\n1.0,7.0,0.5\n2.0,7.0,0.25\n3.0,7.0,0.75\n")
        data, names = load_expression(path)
        assert names == ["g1", "g3"]
        assert data.shape == (3, 2)

    def test_unlabeled_whitespace(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("g1 g2\n1.0 2.0\n3.0 4.0\n")
        data, names = load_expression(path)
        assert names == ["g1", "g2"]
        np.testing.assert_allclose(data, [[1, 2], [3, 4]])

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("g1,g2\n1.0,2.0\n3.0\n")
        with pytest.raises(ExpressionFormatError):
            load_expression(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "bad2.csv"
        path.write_text("g1,g2\ns1,1.0,x\ns2,2.0,3.0\n")
        with pytest.raises(ExpressionFormatError):
            load_expression(path)


class TestSyntheticExpression:
    def test_shape_and_determinism(self):
        e1 = synthetic_expression(30, 10, rank=3, rng=rng_for(4))
        e2 = synthetic_expression(30, 10, rank=3, rng=rng_for(4))
        assert e1.shape == (30, 10)
        np.testing.assert_array_equal(e1, e2)
