"""Command-line driver: ``gen``, ``ppe``, ``lp``, ``ep``, ``bench``.

Exit codes: 0 success (a degenerate score still exits 0 and sets the flag),
2 bad invocation, 3 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import bench, rows_to_csv
from .core import AnalysisConfig, ContractError, DataError, load_table, parse_schema
from .generate import FAMILIES, GeneratorSpec, generate, write_dataset
from .metrics import empirical_protection, lpe, parse_scheme, ppe
from .report import to_json

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class UsageError(Exception):
    pass


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--schema", required=True,
                   help="column roles, e.g. task=ya,private=ypri (other columns are features)")
    p.add_argument("--epsilon", type=float, default=0.05, help="private-contribution threshold in bits (default 0.05)")
    p.add_argument("--samples", type=int, default=100, help="Monte-Carlo draws M per feature (default 100)")
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    p.add_argument("--bins", type=int, default=16, help="equal-width bins for continuous columns (default 16)")
    p.add_argument("--estimator", choices=("mi", "loss"), default="mi",
                   help="coalition value: plug-in mutual information or Bayes-predictor loss reduction")
    p.add_argument("--loss", choices=("cross_entropy", "mse"), default="cross_entropy",
                   help="loss for --estimator loss (default cross_entropy)")
    p.add_argument("--sampler", choices=("exact", "unbiased", "paper"), default="unbiased",
                   help="subset enumeration or Monte-Carlo sampler (default unbiased)")
    p.add_argument("--threshold", type=float, default=0.7, help="protectability threshold Th_P (default 0.7)")
    p.add_argument("--exact-limit", type=int, default=16, help="largest n allowed with --sampler exact")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto (default 1)")
    p.add_argument("--out", help="write output here instead of standard output")
    p.add_argument("--stamp", action="store_true", help="record the current UTC time in the report provenance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="protectability", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic table and its parameter sidecar")
    g.add_argument("--family", choices=FAMILIES, default="overlap")
    g.add_argument("--n-samples", type=int, default=20000)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--rho", type=float, default=0.5, help="overlap: fraction of task features also carrying private signal")
    g.add_argument("--n-task", type=int, default=4)
    g.add_argument("--n-private", type=int, default=2)
    g.add_argument("--n-noise", type=int, default=2)
    g.add_argument("--n-features", type=int, default=4, help="gaussian_mix: number of features")
    g.add_argument("--threads", type=int, default=1, help="accepted for symmetry; generation is sequential")
    g.add_argument("--out", required=True, help="CSV path; the sidecar is written next to it as .json")

    p = sub.add_parser("ppe", help="estimate the privacy protectability P-score")
    _add_analysis_flags(p)

    lp = sub.add_parser("lp", help="estimate the level-of-protection LP-score of a scheme")
    _add_analysis_flags(lp)
    lp.add_argument("--scheme", required=True,
                    help="gaussian:sigma=F | calibrated:sigma=F | prune:features=a,b | quantize:levels=K")

    ep = sub.add_parser("ep", help="empirical protection baseline over one or more schemes")
    _add_analysis_flags(ep)
    ep.add_argument("--scheme", action="append", default=[], help="scheme descriptor; repeat for several")

    b = sub.add_parser("bench", help="cost of the Monte-Carlo pipeline versus M, as CSV")
    _add_analysis_flags(b)
    b.add_argument("--m-list", default="50,100,150,200", help="comma-separated M values")
    b.add_argument("--repeats", type=int, default=3, help="timing repetitions per M; the minimum is kept")
    b.add_argument("--no-time", action="store_true", help="omit the wall-time column (fully deterministic output)")
    return parser


def _config(args) -> AnalysisConfig:
    try:
        return AnalysisConfig(
            epsilon=args.epsilon, m_samples=args.samples, bins=args.bins, estimator=args.estimator,
            sampler=args.sampler, protectability_threshold=args.threshold, seed=args.seed, loss=args.loss,
            exact_limit=args.exact_limit, threads=args.threads,
        )
    except ContractError as exc:
        raise UsageError(str(exc)) from None


def _load(args):
    try:
        schema = parse_schema(args.schema)
    except DataError as exc:
        raise UsageError(str(exc)) from None
    return load_table(args.data, schema)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _schemes(descriptors, names):
    try:
        return [parse_scheme(d, names) for d in descriptors]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run(args) -> int:
    if args.command == "gen":
        try:
            spec = GeneratorSpec(family=args.family, n_samples=args.n_samples, seed=args.seed, rho=args.rho,
                                 n_task=args.n_task, n_private=args.n_private, n_noise=args.n_noise,
                                 n_features=args.n_features)
        except ContractError as exc:
            raise UsageError(str(exc)) from None
        csv_path, sidecar = write_dataset(generate(spec), args.out)
        print(f"wrote {csv_path} and {sidecar}", file=sys.stderr)
        return EXIT_OK

    config = _config(args)
    table, task, private = _load(args)
    if args.command == "ppe":
        _emit(to_json(ppe(table, task, private, config), args.stamp), args.out)
    elif args.command == "lp":
        (scheme,) = _schemes([args.scheme], table.names)
        _emit(to_json(lpe(table, task, private, scheme, config), args.stamp), args.out)
    elif args.command == "ep":
        if not args.scheme:
            raise UsageError("ep needs at least one --scheme")
        schemes = _schemes(args.scheme, table.names)
        _emit(to_json(empirical_protection(table, task, private, schemes, config), args.stamp), args.out)
    elif args.command == "bench":
        try:
            m_values = [int(v) for v in args.m_list.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad --m-list {args.m_list!r}") from None
        if not m_values or min(m_values) < 1:
            raise UsageError("--m-list needs positive integers")
        rows = bench(table, task, private, m_values, config, repeats=max(args.repeats, 1))
        _emit(rows_to_csv(rows, with_time=not args.no_time), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with EXIT_USAGE
    except (DataError, ContractError, OSError) as exc:
        print(f"protectability: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
