"""Command-line surface for factorization, evaluation, and recommendations.

Exit codes: 0 success, 1 usage error, 2 data error (missing or malformed
files, unknown ids), 3 internal failure.  Diagnostics go to stderr; results
go to stdout or to ``--out``.
"""

from __future__ import annotations

import argparse
import sys

from . import bmf, evaluate, knn
from .dataio import (
    DataFormatError,
    load_movielens,
    load_split_files,
    save_model,
    scale,
    split,
)

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DEFAULT_K_SWEEP = (1, 5, 10, 20, 30, 50, 60)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _coverage_level(text: str) -> float:
    """One coverage level, as a percent (60, 80, 100) or a fraction (0.6)."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value > 1.0:
        value /= 100.0
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(
            f"coverage level {text} must land in (0, 1] after scaling"
        )
    return value


def _coverage_list(text: str) -> list[float]:
    return [_coverage_level(part) for part in text.split(",")]


def _k_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not values or any(k < 1 for k in values):
        raise argparse.ArgumentTypeError("neighbor counts must be >= 1")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fcarec",
                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_split=False):
        p.add_argument("--scaling", type=int, default=0, choices=(0, 1, 2, 3),
                       help="binarization threshold (rating > t)")
        p.add_argument("--sim", default="cosine", choices=("cosine", "pearson"))
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", help="output file path")
        p.add_argument("--profile-weighting", default="plain",
                       choices=("plain", "sigma"),
                       help="scale SVD profile columns by singular values")
        if with_split:
            p.add_argument("--test-fraction", type=float, default=0.2,
                           help="used when splitting --data internally")

    p_fact = sub.add_parser("factorize", help="factorize a ratings file")
    p_fact.add_argument("--data", required=True)
    p_fact.add_argument("--coverage", type=_coverage_level, default=1.0,
                        help="coverage target, percent or fraction")
    add_common(p_fact)

    p_eval = sub.add_parser("evaluate", help="run the MAE / top-N experiments")
    p_eval.add_argument("--data", help="single ratings file, split internally")
    p_eval.add_argument("--train")
    p_eval.add_argument("--test")
    p_eval.add_argument("--method", default="all", choices=evaluate.METHODS)
    p_eval.add_argument("--coverage", type=_coverage_list, default=[0.8],
                        help="comma-separated levels, percent or fraction")
    p_eval.add_argument("--k", type=_k_list, default=list(DEFAULT_K_SWEEP),
                        help="comma-separated neighbor counts")
    p_eval.add_argument("--task", default="mae", choices=("mae", "topn", "both"))
    p_eval.add_argument("--top-n", type=int, default=20)
    add_common(p_eval, with_split=True)

    p_cov = sub.add_parser("coverage", help="factor counts per coverage level")
    p_cov.add_argument("--data")
    p_cov.add_argument("--train")
    p_cov.add_argument("--coverage", type=_coverage_list,
                       default=[0.6, 0.8, 1.0])
    add_common(p_cov)

    p_rec = sub.add_parser("recommend", help="top-N items for one user id")
    p_rec.add_argument("--data")
    p_rec.add_argument("--train")
    p_rec.add_argument("--user", type=int, required=True,
                       help="external user id")
    p_rec.add_argument("--method", default="all", choices=evaluate.METHODS)
    p_rec.add_argument("--coverage", type=_coverage_level, default=0.8,
                       help="profile coverage level for svd/bmf methods")
    p_rec.add_argument("--k", type=int, default=20, help="neighbor count")
    p_rec.add_argument("--top-n", type=int, default=20)
    add_common(p_rec)

    return parser


def _load_single(args):
    path = args.train or args.data
    if not path:
        raise UsageError("provide --data or --train")
    return load_movielens(path)


def _load_train_test(args):
    if args.train or args.test:
        if not (args.train and args.test):
            raise UsageError("--train and --test must be given together")
        return load_split_files(args.train, args.test)
    if args.data:
        return split(load_movielens(args.data), args.test_fraction, args.seed)
    raise UsageError("provide --train/--test or --data")


def cmd_factorize(args) -> int:
    ratings = load_movielens(args.data)
    ctx = scale(ratings, args.scaling)
    model = bmf.factorize(ctx, args.coverage)
    if args.out:
        save_model(model, args.out)
    coverage = model.covered_count / ctx.ones_count
    print(f"factors={model.k} coverage={coverage:.3f}")
    return 0


def _emit_report(report, args) -> None:
    if args.out:
        report.to_csv(args.out)
        print(f"wrote {len(report.rows)} rows to {args.out}", file=sys.stderr)
    print(report.format_table())


def cmd_evaluate(args) -> int:
    train, test = _load_train_test(args)
    report = evaluate.EvalReport()
    if args.task in ("mae", "both"):
        report.extend(evaluate.run_mae_experiment(
            train, test, args.method, args.coverage, args.k,
            scaling=args.scaling, sim=args.sim,
            weighting=args.profile_weighting))
    if args.task in ("topn", "both"):
        report.extend(evaluate.run_topn_experiment(
            train, test, args.method, args.coverage, args.k,
            n=args.top_n, scaling=args.scaling, sim=args.sim,
            weighting=args.profile_weighting))
    _emit_report(report, args)
    return 0


def cmd_coverage(args) -> int:
    train = _load_single(args)
    report = evaluate.coverage_table(train, args.coverage, scaling=args.scaling)
    _emit_report(report, args)
    return 0


def cmd_recommend(args) -> int:
    ratings = _load_single(args)
    user = ratings.user_dense_index(args.user)
    profiles = evaluate.build_profiles(ratings, args.method, args.coverage,
                                       scaling=args.scaling,
                                       weighting=args.profile_weighting)
    picks = knn.recommend_top_n(user, profiles, ratings,
                                args.k, args.top_n, args.sim)
    if not picks:
        print(f"user {args.user} has rated every item; nothing to recommend",
              file=sys.stderr)
        return 0
    for item, predicted in picks:
        print(f"{int(ratings.item_ids[item])}\t{predicted:.4f}")
    return 0


_COMMANDS = {
    "factorize": cmd_factorize,
    "evaluate": cmd_evaluate,
    "coverage": cmd_coverage,
    "recommend": cmd_recommend,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, FileNotFoundError, KeyError, OSError) as err:
        message = err.args[0] if err.args else err
        print(f"error: {message}", file=sys.stderr)
        return EXIT_DATA
    except Exception as err:  # noqa: BLE001 - last-resort exit-code mapping
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL


def app() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    app()
