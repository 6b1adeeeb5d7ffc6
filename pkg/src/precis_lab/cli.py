"""Command-line front door.

Subcommands: generate, estimate, diagnose, bench-noise, bench-dim,
bench-gamma, bench-objective, gene-assumption, gene-precision. Benchmark
commands require an explicit --seed (no wall-clock seeding) and accept a
flat key=value config file whose entries are overridden by flags. Usage
errors exit with status 2, data errors with 1.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .diagnostics import REPORT_COLUMNS, consistency_report
from .errors import PrecisLabError
from .estimators import (
    METHODS,
    SUPPORT_EPSILON,
    EstimatorConfig,
    calibrate_lambda,
    clime,
    glasso,
    scio,
)
from .matops import SupportSet, read_matrix, read_sym_matrix, write_matrix
from .models import (
    Dataset,
    LatentModelSpec,
    latent_precision,
    load_expression,
    random_a,
    rng_for,
    sample_covariance,
    sample_mvn,
    standardize,
    synthetic_expression,
    write_expression,
)


def _parse_floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split(",") if t != "")

def _parse_ints(text: str) -> tuple:
    return tuple(int(t) for t in text.split(",") if t != "")

def _parse_methods(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())

def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config_file(path) -> dict:
    """Flat key = value text; '#' starts a comment, keys are dash/underscore
    insensitive."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            values[key.strip().lower().replace("-", "_")] = val.strip()
    return values


class _Resolver:
    """Flag beats config file beats built-in default."""

    def __init__(self, args):
        self.args = args
        self.file_values = read_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, parse, default):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.file_values:
            return parse(self.file_values[name])
        return default


def _add_common_bench_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--workers", type=int, help="process pool size (default 1)")

def _add_latent_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=_parse_floats, help="comma-separated swept values")
    p.add_argument("--k", type=int, dest="replicates", help="replicates per grid point")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--d1", type=int)
    p.add_argument("--d2", type=int)
    p.add_argument("--sigma-x2", type=float, dest="sigma_x2")
    p.add_argument("--sigma-eps2", type=float, dest="sigma_eps2")
    p.add_argument("--scale", type=float, help="coupling matrix entry scale")
    p.add_argument("--sparsity", type=float, help="fraction of coupling entries zeroed")
    p.add_argument("--methods", type=_parse_methods)
    p.add_argument("--penalize-diagonal", action="store_const", const=True,
                   dest="penalize_diagonal")


def _sweep_config(args, experiment: str, default_grid, default_methods=bench.DEFAULT_METHODS,
                  default_n: int = 1000) -> bench.SweepConfig:
    r = _Resolver(args)
    return bench.SweepConfig(
        experiment=experiment,
        grid=tuple(r.get("grid", _parse_floats, default_grid)),
        n=r.get("n", int, default_n),
        d1=r.get("d1", int, 2),
        d2=r.get("d2", int, 10),
        sigma_x2=r.get("sigma_x2", float, 1.0),
        sigma_eps2=r.get("sigma_eps2", float, 0.01),
        replicates=r.get("replicates", int, 10),
        master_seed=args.seed,
        methods=tuple(r.get("methods", _parse_methods, default_methods)),
        scale=r.get("scale", float, 1.0),
        sparsity=r.get("sparsity", float, 0.0),
        penalize_diagonal=r.get("penalize_diagonal", _parse_bool, False),
        workers=r.get("workers", int, 1),
    )


def _write_sweep_outputs(records, experiment: str, out: str) -> None:
    bench.write_records(out, experiment, records)
    bench.write_summary(bench.summary_path(out), experiment, records)
    print(f"wrote {len(records)} rows to {out}")


def _load_expression_arg(args):
    r = _Resolver(args)
    if getattr(args, "expression", None):
        data, _ = load_expression(args.expression, genes_in=args.genes_in)
        return data
    if not getattr(args, "synthetic", False):
        raise ValueError("provide --expression FILE or --synthetic")
    rng = rng_for(args.seed, 9000)
    return synthetic_expression(
        n_samples=r.get("samples", int, 600),
        n_genes=r.get("genes", int, 150),
        rank=r.get("rank", int, 12),
        noise_sd=r.get("noise_sd", float, 1.0),
        loading_sparsity=r.get("loading_sparsity", float, 0.75),
        rng=rng,
    )


def _cmd_generate(args) -> int:
    rng = rng_for(args.seed, 0)
    if args.kind == "latent":
        a = random_a(args.d1, args.d2, args.scale, args.sparsity, rng)
        model = latent_precision(
            LatentModelSpec(args.d1, args.d2, args.sigma_x2, args.sigma_eps2, a)
        )
        prefix = Path(args.out_prefix)
        write_matrix(prefix.with_name(prefix.name + "_cov.txt"), model.covariance)
        write_matrix(prefix.with_name(prefix.name + "_prec.txt"), model.precision)
        with open(prefix.with_name(prefix.name + "_support.txt"), "w", newline="") as fh:
            for i, j in model.support.sorted_pairs():
                fh.write(f"{i} {j}\n")
        if args.n:
            data = sample_mvn(model.covariance, args.n, rng)
            write_matrix(prefix.with_name(prefix.name + "_data.txt"), data.rows)
        print(f"latent model p={model.covariance.dim} edges={len(model.support)}")
    else:
        data = synthetic_expression(args.samples, args.genes, rank=args.rank,
                                    noise_sd=args.noise_sd,
                                    loading_sparsity=args.loading_sparsity, rng=rng)
        write_expression(args.out, data)
        print(f"expression matrix {data.shape[0]}x{data.shape[1]} -> {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    if args.cov:
        s = read_sym_matrix(args.cov)
    else:
        data = Dataset(read_matrix(args.data))
        s = sample_covariance(standardize(data))
    config = EstimatorConfig(
        lam=args.lam if args.lam is not None else 0.0,
        penalize_diagonal=args.penalize_diagonal,
        max_iter=args.max_iter,
        tol=args.tol,
    )
    if args.target_edges is not None:
        outcome = calibrate_lambda(args.method, s, args.target_edges, config=config)
        result = outcome.result
    elif args.method == "naive":
        raise ValueError("the naive method needs --target-edges")
    elif args.lam is None:
        raise ValueError("provide --lam or --target-edges")
    else:
        solver = {"glasso": glasso, "clime": clime, "scio": scio}[args.method]
        result = solver(s, config)
    if args.out:
        write_matrix(args.out, result.omega)
    print(
        f"method={args.method} lambda={result.lambda_used:.6g} "
        f"edges={len(result.support)} iterations={result.iterations} "
        f"converged={result.converged}"
    )
    return 0


def _cmd_diagnose(args) -> int:
    precision = read_sym_matrix(args.precision)
    support = SupportSet.from_matrix(precision, eps=args.support_eps)
    cov = read_sym_matrix(args.covariance) if args.covariance else None
    report = consistency_report(precision, support, cov,
                                use_row_sums=args.row_sums)
    text = ",".join(REPORT_COLUMNS) + "\n" + report.csv_row() + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_bench_noise(args) -> int:
    cfg = _sweep_config(args, "noise", bench.DEFAULT_NOISE_GRID)
    _write_sweep_outputs(bench.run_noise_sweep(cfg), "noise", args.out)
    return 0


def _cmd_bench_dim(args) -> int:
    default = bench.DEFAULT_OUTDIM_GRID if args.axis == "outdim" else bench.DEFAULT_INDIM_GRID
    cfg = _sweep_config(args, args.axis, tuple(float(v) for v in default))
    _write_sweep_outputs(bench.run_dim_sweep(cfg, axis=args.axis), args.axis, args.out)
    return 0


def _cmd_bench_gamma(args) -> int:
    cfg = _sweep_config(args, "gamma", bench.DEFAULT_GAMMA_GRID,
                        default_methods=("glasso",), default_n=0)
    _write_sweep_outputs(bench.run_gamma_sweep(cfg), "gamma", args.out)
    return 0


def _cmd_bench_objective(args) -> int:
    cfg = _sweep_config(args, "objective", bench.DEFAULT_OBJECTIVE_GRID,
                        default_methods=("glasso",))
    _write_sweep_outputs(bench.run_objective_decomposition(cfg), "objective", args.out)
    return 0


def _cmd_gene_assumption(args) -> int:
    r = _Resolver(args)
    expression = _load_expression_arg(args)
    records = bench.run_gene_assumption(
        expression,
        dims=r.get("dims", _parse_ints, bench.DEFAULT_GENE_DIMS),
        subsets_per_dim=r.get("subsets", int, 20),
        delta=r.get("delta", float, 0.1),
        master_seed=args.seed,
        workers=r.get("workers", int, 1),
    )
    cutoffs = r.get("cutoffs", _parse_floats, bench.DEFAULT_GENE_CUTOFFS)
    bench.write_gene_assumption(args.out, records, cutoffs)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_gene_precision(args) -> int:
    r = _Resolver(args)
    expression = _load_expression_arg(args)
    records = bench.run_gene_precision(
        expression,
        dims=r.get("dims", _parse_ints, bench.DEFAULT_GENE_DIMS),
        n_grid=r.get("n_grid", _parse_ints, (500,)),
        replicates=r.get("replicates", int, 10),
        delta=r.get("delta", float, 0.1),
        master_seed=args.seed,
        penalize_diagonal=r.get("penalize_diagonal", _parse_bool, False),
        workers=r.get("workers", int, 1),
    )
    _write_sweep_outputs(records, "gene-precision", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precis-lab",
        description="Sparse precision-matrix structure learning lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a ground-truth model or expression matrix")
    p.add_argument("--kind", choices=("latent", "expression"), default="latent")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--d1", type=int, default=2)
    p.add_argument("--d2", type=int, default=10)
    p.add_argument("--sigma-x2", type=float, default=1.0, dest="sigma_x2")
    p.add_argument("--sigma-eps2", type=float, default=0.01, dest="sigma_eps2")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--sparsity", type=float, default=0.0)
    p.add_argument("--n", type=int, default=0, help="also write n sampled rows")
    p.add_argument("--out-prefix", default="model", dest="out_prefix")
    p.add_argument("--genes", type=int, default=150)
    p.add_argument("--samples", type=int, default=600)
    p.add_argument("--rank", type=int, default=12)
    p.add_argument("--noise-sd", type=float, default=1.0, dest="noise_sd")
    p.add_argument("--loading-sparsity", type=float, default=0.75,
                   dest="loading_sparsity")
    p.add_argument("--out", default="expression.tsv")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("estimate", help="run one estimator on a covariance or data file")
    p.add_argument("--method", choices=METHODS, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--cov", help="covariance matrix file")
    src.add_argument("--data", help="raw data file (standardized internally)")
    p.add_argument("--lam", type=float, help="regularisation parameter")
    p.add_argument("--target-edges", type=int, dest="target_edges",
                   help="calibrate lambda to this edge count")
    p.add_argument("--penalize-diagonal", action="store_true", dest="penalize_diagonal")
    p.add_argument("--max-iter", type=int, default=200, dest="max_iter")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="write the estimated precision matrix here")
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("diagnose", help="consistency-condition report for a precision matrix")
    p.add_argument("--precision", required=True)
    p.add_argument("--covariance", help="optional; inverse of precision when omitted")
    p.add_argument("--support-eps", type=float, default=SUPPORT_EPSILON,
                   dest="support_eps")
    p.add_argument("--row-sums", action="store_true", dest="row_sums")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_diagnose)

    for name, fn, latent in (
        ("bench-noise", _cmd_bench_noise, True),
        ("bench-dim", _cmd_bench_dim, True),
        ("bench-gamma", _cmd_bench_gamma, True),
        ("bench-objective", _cmd_bench_objective, True),
        ("gene-assumption", _cmd_gene_assumption, False),
        ("gene-precision", _cmd_gene_precision, False),
    ):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_common_bench_flags(p)
        if latent:
            _add_latent_flags(p)
        else:
            p.add_argument("--expression", help="expression matrix file")
            p.add_argument("--genes-in", choices=("columns", "rows"),
                           default="columns", dest="genes_in")
            p.add_argument("--synthetic", action="store_true",
                           help="use the bundled synthetic expression generator")
            p.add_argument("--genes", type=int)
            p.add_argument("--samples", type=int)
            p.add_argument("--rank", type=int)
            p.add_argument("--noise-sd", type=float, dest="noise_sd")
            p.add_argument("--loading-sparsity", type=float, dest="loading_sparsity")
            p.add_argument("--dims", type=_parse_ints)
            p.add_argument("--subsets", type=int)
            p.add_argument("--delta", type=float)
            p.add_argument("--cutoffs", type=_parse_floats)
            p.add_argument("--n-grid", type=_parse_ints, dest="n_grid")
            p.add_argument("--k", type=int, dest="replicates")
        if name == "bench-dim":
            p.add_argument("--axis", choices=("outdim", "indim"), default="outdim")
        p.set_defaults(fn=fn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (PrecisLabError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
