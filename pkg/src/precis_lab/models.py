"""Ground-truth model generators and Gaussian data sampling.

Two model families are provided: a linear latent structure where the
observed block depends linearly on a small hidden block (which produces
sparse precision matrices with entries that blow up as the noise variance
shrinks), and models derived from an expression matrix by thresholding the
inverse of an empirical correlation matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantColumn, ExpressionFormatError
from .matops import SymMatrix, SupportSet, cholesky, invert

# All randomness flows through explicit generators derived from a master
# seed and a task key, so replicates are reproducible and parallel-safe.


def rng_for(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one task; same inputs, same stream."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def seed_fingerprint(master_seed: int, *key: int) -> int:
    """Stable integer identifying the stream of :func:`rng_for` (for logs/CSV)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class LatentModelSpec:
    """Linear latent structure: observed y = A x + noise, stacked as (x, y).

    ``a`` is the (d2, d1) coupling matrix; x has isotropic variance
    ``sigma_x2`` and the additive noise has variance ``sigma_eps2``.
    """

    d1: int
    d2: int
    sigma_x2: float
    sigma_eps2: float
    a: np.ndarray

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("d1 and d2 must be >= 1")
        if not (self.sigma_x2 > 0 and self.sigma_eps2 > 0):
            raise ValueError("variances must be positive")
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.d2, self.d1):
            raise ValueError(f"coupling matrix must have shape ({self.d2}, {self.d1})")
        if not np.all(np.isfinite(a)):
            raise ValueError("coupling matrix entries must be finite")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @property
    def p(self) -> int:
        return self.d1 + self.d2


@dataclass(frozen=True)
class GroundTruthModel:
    """A covariance, its precision and the exact support of the precision."""

    covariance: SymMatrix
    precision: SymMatrix
    support: SupportSet

    def __post_init__(self):
        if not (self.covariance.dim == self.precision.dim == self.support.dim):
            raise ValueError("covariance, precision and support dimensions disagree")


@dataclass(frozen=True)
class Dataset:
    """n observations of p variables, row per observation."""

    rows: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        r = np.asarray(self.rows, dtype=float)
        if r.ndim != 2:
            raise ValueError(f"rows must be 2-d, got shape {r.shape}")
        r = r.copy()
        r.flags.writeable = False
        object.__setattr__(self, "rows", r)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]


def latent_covariance(spec: LatentModelSpec) -> SymMatrix:
    """Block covariance of (x, y): sigma_x2 * [[I, A'], [A, AA' + sigma_eps2 I]]."""
    a = spec.a
    top = np.hstack([np.eye(spec.d1), a.T])
    bottom = np.hstack([a, a @ a.T + spec.sigma_eps2 * np.eye(spec.d2)])
    c = spec.sigma_x2 * np.vstack([top, bottom])
    return SymMatrix.from_array(c, symmetrize=True)


def latent_precision(spec: LatentModelSpec) -> GroundTruthModel:
    """Exact block inverse of the latent covariance, plus its structural support.

    The support is the symbolic nonzero pattern: entries of A'A couple the
    x block, entries of A couple x to y, and the y block is diagonal. No
    floating threshold is involved, so the ground truth never depends on a
    tolerance.
    """
    d1, d2 = spec.d1, spec.d2
    inv_e = 1.0 / spec.sigma_eps2
    ata = spec.a.T @ spec.a
    ata = 0.5 * (ata + ata.T)
    top = np.hstack([np.eye(d1) + inv_e * ata, -inv_e * spec.a.T])
    bottom = np.hstack([-inv_e * spec.a, inv_e * np.eye(d2)])
    prec = (1.0 / spec.sigma_x2) * np.vstack([top, bottom])

    pairs = set()
    for i in range(d1):
        for j in range(i + 1, d1):
            if ata[i, j] != 0.0:
                pairs.add((i, j))
        for r in range(d2):
            if spec.a[r, i] != 0.0:
                pairs.add((i, d1 + r))
    return GroundTruthModel(
        covariance=latent_covariance(spec),
        precision=SymMatrix.from_array(prec, symmetrize=True),
        support=SupportSet(spec.p, frozenset(pairs)),
    )


def random_a(d1: int, d2: int, scale: float = 1.0, sparsity: float = 0.0,
             rng: np.random.Generator | None = None) -> np.ndarray:
    """(d2, d1) coupling matrix with N(0, scale^2) entries, a fraction zeroed."""
    if not 0.0 <= sparsity < 1.0:
        raise ValueError("sparsity must be in [0, 1)")
    if rng is None:
        rng = np.random.default_rng()
    a = scale * rng.standard_normal((d2, d1))
    if sparsity > 0.0:
        a[rng.random((d2, d1)) < sparsity] = 0.0
    return a


def sample_mvn(cov: SymMatrix, n: int, rng: np.random.Generator) -> Dataset:
    """n draws from a zero-mean multivariate normal with the given covariance."""
    lower = cholesky(cov)
    z = rng.standard_normal((int(n), cov.dim))
    return Dataset(z @ lower.T)


def standardize(dataset: Dataset) -> Dataset:
    """Center each column and scale to unit population standard deviation."""
    if dataset.n < 2:
        raise ValueError("standardize needs at least two rows")
    centered = dataset.rows - dataset.rows.mean(axis=0)
    sd = np.sqrt((centered**2).mean(axis=0))
    if np.any(sd == 0.0):
        bad = np.flatnonzero(sd == 0.0)
        raise ConstantColumn(f"columns {bad.tolist()} are constant")
    return Dataset(centered / sd, standardized=True)


def sample_covariance(dataset: Dataset) -> SymMatrix:
    """Maximum-likelihood covariance (1/n divisor) of the centered data."""
    if dataset.n < 2:
        raise ValueError("sample_covariance needs at least two rows")
    centered = dataset.rows - dataset.rows.mean(axis=0)
    s = centered.T @ centered / dataset.n
    return SymMatrix.from_array(s, symmetrize=True)


def gene_model_from_correlation(c0: SymMatrix, delta: float = 0.1) -> GroundTruthModel:
    """Sparse ground truth from a correlation matrix by thresholding its inverse.

    Off-diagonal entries of inv(c0) with magnitude at or below ``delta``
    are zeroed (the diagonal is always kept); the testing covariance is the
    inverse of the thresholded matrix. Raises NotPositiveDefinite when the
    thresholded matrix is not positive definite, in which case the caller
    is expected to resample a different subset.
    """
    d = c0.values.diagonal()
    if float(np.abs(d - 1.0).max()) > 1e-6:
        raise ValueError("expected a correlation matrix with unit diagonal")
    lam0 = invert(c0).values
    lam = np.where(np.abs(lam0) > delta, lam0, 0.0)
    np.fill_diagonal(lam, lam0.diagonal())
    precision = SymMatrix(lam)
    covariance = invert(precision)  # NotPositiveDefinite -> caller resamples
    return GroundTruthModel(
        covariance=covariance,
        precision=precision,
        support=SupportSet.from_matrix(precision, eps=0.0),
    )


def synthetic_expression(n_samples: int, n_genes: int, rank: int = 12,
                         noise_sd: float = 1.0, loading_sparsity: float = 0.75,
                         rng: np.random.Generator | None = None) -> np.ndarray:
    """Low-rank-plus-noise stand-in for a real expression matrix (samples x genes).

    Each gene loads on a random subset of the latent factors
    (``loading_sparsity`` is the fraction of zeroed loadings), which gives
    the derived precision matrices a realistic mix of strong and
    below-cutoff partial correlations.
    """
    if not 0.0 <= loading_sparsity < 1.0:
        raise ValueError("loading_sparsity must be in [0, 1)")
    if rng is None:
        rng = np.random.default_rng()
    z = rng.standard_normal((int(n_samples), int(rank)))
    w = rng.standard_normal((int(rank), int(n_genes)))
    if loading_sparsity > 0.0:
        w[rng.random((int(rank), int(n_genes))) < loading_sparsity] = 0.0
    return z @ w + noise_sd * rng.standard_normal((int(n_samples), int(n_genes)))


def _sniff_delimiter(line: str) -> str | None:
    if "\t" in line:
        return "\t"
    if "," in line:
        return ","
    return None  # any whitespace


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_expression(path, genes_in: str = "columns") -> tuple[np.ndarray, list[str]]:
    """Read an expression matrix from delimited text.

    ``genes_in`` selects the orientation: "columns" expects one sample per
    line under a header of gene names (with an optional leading sample
    label per line), "rows" expects one gene per line with the gene name
    first (and an optional header of sample labels). Genes with constant
    expression are dropped. Returns (samples x genes array, gene names).
    """
    if genes_in not in ("columns", "rows"):
        raise ValueError("genes_in must be 'columns' or 'rows'")
    lines = []
    with open(path) as fh:
        for raw in fh:
            stripped = raw.strip()
            if stripped and not stripped.startswith("#"):
                lines.append(stripped)
    if len(lines) < 2:
        raise ExpressionFormatError(f"{path}: need at least two non-empty lines")
    delim = _sniff_delimiter(lines[0])
    table = [[t for t in line.split(delim) if t != ""] for line in lines]

    if genes_in == "columns":
        header, data_rows = table[0], table[1:]
        labeled = not _is_number(data_rows[0][0])
        values = []
        for row in data_rows:
            fields = row[1:] if labeled else row
            values.append(fields)
        width = len(values[0])
        if any(len(v) != width for v in values):
            raise ExpressionFormatError(f"{path}: ragged rows")
        names = [str(t) for t in header[-width:]]
        if len(names) != width:
            raise ExpressionFormatError(f"{path}: header shorter than data rows")
    else:
        rows = table
        # a header of sample labels has a non-numeric second field
        if len(rows[0]) > 1 and not _is_number(rows[0][1]):
            rows = rows[1:]
        names, values_t = [], []
        for idx, row in enumerate(rows):
            if _is_number(row[0]):
                names.append(f"g{idx}")
                fields = row
            else:
                names.append(str(row[0]))
                fields = row[1:]
            values_t.append(fields)
        width = len(values_t[0])
        if any(len(v) != width for v in values_t):
            raise ExpressionFormatError(f"{path}: ragged rows")
        values = [list(col) for col in zip(*values_t)]

    try:
        data = np.array([[float(t) for t in row] for row in values], dtype=float)
    except ValueError as e:
        raise ExpressionFormatError(f"{path}: non-numeric value ({e})") from None
    if data.shape[0] < 2:
        raise ExpressionFormatError(f"{path}: need at least two samples")

    sd = data.std(axis=0)
    keep = sd > 0.0
    data = data[:, keep]
    names = [nm for nm, k in zip(names, keep) if k]
    if data.shape[1] == 0:
        raise ExpressionFormatError(f"{path}: every gene is constant")
    return data, names


def write_expression(path, data: np.ndarray, names: list[str] | None = None,
                     genes_in: str = "columns") -> None:
    """Write a samples x genes matrix as labeled tab-separated text."""
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    if names is None:
        names = [f"g{j:04d}" for j in range(p)]
    if len(names) != p:
        raise ValueError("one name per gene required")
    with open(path, "w", newline="") as fh:
        if genes_in == "columns":
            fh.write("sample\t" + "\t".join(names) + "\n")
            for i in range(n):
                fh.write(f"s{i:05d}\t" + "\t".join(repr(float(v)) for v in data[i]) + "\n")
        elif genes_in == "rows":
            fh.write("gene\t" + "\t".join(f"s{i:05d}" for i in range(n)) + "\n")
            for j in range(p):
                fh.write(names[j] + "\t" + "\t".join(repr(float(v)) for v in data[:, j]) + "\n")
        else:
            raise ValueError("genes_in must be 'columns' or 'rows'")
