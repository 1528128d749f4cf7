"""Metrics, report plumbing, and the end-to-end evaluation experiments.

Experiments take a train/test pair sharing one id map, build user profiles
for the requested method (raw ratings, truncated singular vectors, factor
memberships, or factorization-filtered ratings), and sweep neighbor counts.
Factor-coverage sub-models are prefixes of one greedy run, so the levels
are nested and a single factorization serves every level.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import bitset, knn
from . import svd as svd_mod
from .bmf import FactorModel, factorize, profile_matrix
from .context import BooleanContext
from .dataio import RatingsMatrix, scale
from .knn import ProfileMatrix

METHODS = ("all", "svd", "bmf", "bmf-filtered")

CSV_HEADER = ["method", "coverage_pct", "scaling_threshold",
              "k_neighbors", "metric", "value"]


class Prediction(NamedTuple):
    user: int
    item: int
    predicted: float
    actual: float


def mae(predictions) -> float:
    """Mean absolute error of a nonempty prediction set."""
    preds = list(predictions)
    if not preds:
        raise ValueError("MAE of an empty prediction set is undefined")
    errors = []
    for p in preds:
        if not np.isfinite(p.predicted):
            raise ValueError(f"non-finite prediction for {p.user}/{p.item}")
        if not 1 <= p.actual <= 5:
            raise ValueError(f"actual rating {p.actual} outside the 1..5 scale")
        errors.append(abs(p.predicted - p.actual))
    return float(np.mean(errors))


@dataclass(frozen=True)
class PrecisionRecallF1:
    precision: float
    recall: float
    f1: float
    precision_defined: bool
    recall_defined: bool


def precision_recall_f1(recommended, test_items) -> PrecisionRecallF1:
    """Set-overlap quality of one recommendation list.

    Precision needs a nonempty recommendation list and recall a nonempty
    test set; an undefined metric is reported as 0 with its flag cleared.
    F1 is 0 whenever precision + recall is 0.
    """
    recommended = set(recommended)
    test_items = set(test_items)
    hits = len(recommended & test_items)
    precision_defined = bool(recommended)
    recall_defined = bool(test_items)
    precision = hits / len(recommended) if precision_defined else 0.0
    recall = hits / len(test_items) if recall_defined else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return PrecisionRecallF1(precision, recall, f1,
                             precision_defined, recall_defined)


@dataclass(frozen=True)
class ReportRow:
    method: str
    coverage_pct: float | None
    scaling_threshold: int | None
    k_neighbors: int | None
    metric: str
    value: float


@dataclass
class EvalReport:
    """Rows of (configuration, metric, value) measurements."""

    rows: list[ReportRow] = field(default_factory=list)

    def add(self, method, coverage_pct, scaling_threshold, k_neighbors,
            metric, value) -> None:
        self.rows.append(ReportRow(method, coverage_pct, scaling_threshold,
                                   k_neighbors, metric, float(value)))

    def extend(self, other: "EvalReport") -> None:
        self.rows.extend(other.rows)

    def value(self, metric: str, *, method=None, coverage_pct=None,
              k_neighbors=None, scaling_threshold=None) -> float:
        """The unique value matching the given dimensions."""
        found = [
            r.value for r in self.rows
            if r.metric == metric
            and (method is None or r.method == method)
            and (coverage_pct is None or r.coverage_pct == coverage_pct)
            and (k_neighbors is None or r.k_neighbors == k_neighbors)
            and (scaling_threshold is None or r.scaling_threshold == scaling_threshold)
        ]
        if len(found) != 1:
            raise KeyError(
                f"{len(found)} rows match metric={metric!r} "
                f"method={method!r} coverage={coverage_pct!r} k={k_neighbors!r}"
            )
        return found[0]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            self.write_csv(handle)

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([
                r.method,
                "" if r.coverage_pct is None else format(r.coverage_pct, "g"),
                "" if r.scaling_threshold is None else r.scaling_threshold,
                "" if r.k_neighbors is None else r.k_neighbors,
                r.metric,
                repr(r.value),
            ])

    @classmethod
    def from_csv(cls, path) -> "EvalReport":
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header {header}")
            report = cls()
            for row in reader:
                method, cov, t, k, metric, value = row
                report.add(method,
                           float(cov) if cov else None,
                           int(t) if t else None,
                           int(k) if k else None,
                           metric,
                           float(value))
        return report

    def format_table(self) -> str:
        """Human-readable aligned table."""
        header = ["method", "coverage%", "t", "K", "metric", "value"]
        cells = [header]
        for r in self.rows:
            cells.append([
                r.method,
                "-" if r.coverage_pct is None else format(r.coverage_pct, "g"),
                "-" if r.scaling_threshold is None else str(r.scaling_threshold),
                "-" if r.k_neighbors is None else str(r.k_neighbors),
                r.metric,
                format(r.value, ".4f"),
            ])
        widths = [max(len(row[c]) for row in cells) for c in range(len(header))]
        lines = []
        for i, row in enumerate(cells):
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines)

    def __str__(self):
        return self.format_table()


def filter_ratings_by_coverage(ratings: RatingsMatrix, model: FactorModel,
                               ctx: BooleanContext) -> RatingsMatrix:
    """Keep only ratings whose cell lies inside some factor rectangle.

    The result shares the input's id maps; uncovered cells become unrated.
    With a model covering everything this is the identity.
    """
    if (ctx.n_objects, ctx.n_attributes) != (ratings.n_users, ratings.n_items):
        raise ValueError("context and ratings dimensions differ")
    if (model.n_objects, model.n_attributes) != (ctx.n_objects, ctx.n_attributes):
        raise ValueError("model and context dimensions differ")
    covered = [0] * ctx.n_objects
    for factor in model.factors:
        for i in bitset.iter_indices(factor.extent):
            covered[i] |= factor.intent
    coo = ratings.matrix.tocoo()
    keep = np.fromiter(
        ((covered[u] >> i) & 1 for u, i in zip(coo.row, coo.col)),
        dtype=bool, count=coo.nnz,
    )
    return RatingsMatrix.with_entries(ratings.user_ids, ratings.item_ids,
                                      coo.row[keep], coo.col[keep],
                                      coo.data[keep])


def _check_experiment_inputs(train, test, method, coverage_levels, k_values):
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if (train.n_users, train.n_items) != (test.n_users, test.n_items):
        raise ValueError("train and test must share one id map")
    train_pairs = set(zip(*train.matrix.nonzero()))
    test_pairs = set(zip(*test.matrix.nonzero()))
    if train_pairs & test_pairs:
        raise ValueError("train and test overlap on (user, item) pairs")
    if not coverage_levels:
        raise ValueError("at least one coverage level is required")
    for level in coverage_levels:
        if not 0 < level <= 1:
            raise ValueError(f"coverage level {level} outside (0, 1]")
    if not k_values or any(k < 1 for k in k_values):
        raise ValueError("neighbor counts must be positive")


def build_profile_sets(train: RatingsMatrix, method: str, coverage_levels,
                       *, scaling: int = 0, weighting: str = "plain",
                       ) -> list[tuple[float, ProfileMatrix]]:
    """(level, profiles) per coverage level for the given method.

    The "all" method ignores levels and yields a single full-matrix entry.
    Factor methods run one greedy factorization to the highest level and
    slice prefixes; the SVD method picks the energy-coverage rank.
    """
    if method == "all":
        return [(1.0, ProfileMatrix(train.to_dense(), "raw"))]
    if method == "svd":
        res = svd_mod.svd(train.to_dense())
        out = []
        for level in coverage_levels:
            k = svd_mod.factors_for_coverage(res.sigma, level)
            out.append((level, ProfileMatrix(
                svd_mod.user_profiles(res, k, weighting), "svd-U")))
        return out
    ctx = scale(train, scaling)
    model = factorize(ctx, max(coverage_levels))
    out = []
    for level in coverage_levels:
        f = model.prefix_size_for_coverage(ctx.ones_count, level)
        sub = model.truncate(f)
        if method == "bmf":
            out.append((level, ProfileMatrix(profile_matrix(sub), "bmf-P")))
        else:  # bmf-filtered
            filtered = filter_ratings_by_coverage(train, sub, ctx)
            out.append((level, ProfileMatrix(filtered.to_dense(), "filtered-raw")))
    return out


def build_profiles(train: RatingsMatrix, method: str, level: float = 1.0,
                   *, scaling: int = 0, weighting: str = "plain") -> ProfileMatrix:
    """Single-level convenience wrapper around ``build_profile_sets``."""
    return build_profile_sets(train, method, [level],
                              scaling=scaling, weighting=weighting)[0][1]


def _test_items_by_user(test: RatingsMatrix) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    matrix = test.matrix
    out = {}
    for u in range(test.n_users):
        lo, hi = matrix.indptr[u], matrix.indptr[u + 1]
        if lo < hi:
            out[u] = (matrix.indices[lo:hi], matrix.data[lo:hi])
    return out


def _ranked_by_user(profiles: ProfileMatrix, users, sim: str):
    sims = knn.similarity_matrix(profiles, sim)
    return {u: knn.ranked_neighbors(sims[u], u) for u in users}


def run_mae_experiment(train: RatingsMatrix, test: RatingsMatrix, method: str,
                       coverage_levels=(0.8,), k_values=(1, 5, 10, 20, 30, 50, 60),
                       *, scaling: int = 0, sim: str = "cosine",
                       weighting: str = "plain") -> EvalReport:
    """MAE over the full test set per coverage level and neighbor count.

    Neighbors are searched in the method's profile space; the predicted
    rating is always the similarity-weighted mean of the neighbors'
    original training ratings.
    """
    _check_experiment_inputs(train, test, method, coverage_levels, k_values)
    report = EvalReport()
    per_user = _test_items_by_user(test)
    threshold = scaling if method in ("bmf", "bmf-filtered") else None

    for level, profiles in build_profile_sets(train, method, coverage_levels,
                                              scaling=scaling, weighting=weighting):
        ranked = _ranked_by_user(profiles, per_user, sim)
        for k in k_values:
            errors = []
            for u, (items, actuals) in per_user.items():
                idx, weights = ranked[u]
                neighbors = list(zip(idx[:k].tolist(), weights[:k].tolist()))
                preds = knn.predict_ratings_batch(u, items, neighbors, train)
                errors.append(np.abs(preds - actuals))
            value = float(np.mean(np.concatenate(errors)))
            report.add(method, level * 100, threshold, k, "mae", value)
    return report


def run_topn_experiment(train: RatingsMatrix, test: RatingsMatrix, method: str,
                        coverage_levels=(0.8,), k_values=(1, 5, 10, 20, 30, 50, 60),
                        *, n: int = 20, scaling: int = 0, sim: str = "cosine",
                        weighting: str = "plain") -> EvalReport:
    """Top-n recommendation quality, macro-averaged per test user.

    For each user holding test items, the n best-predicted unrated items
    are compared with that user's test items; precision, recall, and F1
    are averaged over users.  Users with nothing left to recommend are
    skipped and counted in a `users_skipped` row.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_experiment_inputs(train, test, method, coverage_levels, k_values)
    report = EvalReport()
    per_user = _test_items_by_user(test)
    threshold = scaling if method in ("bmf", "bmf-filtered") else None
    dense_train = train.to_dense()

    for level, profiles in build_profile_sets(train, method, coverage_levels,
                                              scaling=scaling, weighting=weighting):
        ranked = _ranked_by_user(profiles, per_user, sim)
        for k in k_values:
            scores = []
            skipped = 0
            for u, (items, _) in per_user.items():
                candidates = np.nonzero(dense_train[u] == 0)[0]
                if candidates.size == 0:
                    skipped += 1
                    continue
                idx, weights = ranked[u]
                neighbors = list(zip(idx[:k].tolist(), weights[:k].tolist()))
                preds = knn.predict_ratings_batch(u, candidates, neighbors, train)
                top = np.lexsort((candidates, -preds))[:n]
                prf = precision_recall_f1(candidates[top].tolist(), items.tolist())
                scores.append((prf.precision, prf.recall, prf.f1))
            for i, name in enumerate(("precision", "recall", "f1")):
                value = float(np.mean([s[i] for s in scores])) if scores else 0.0
                report.add(method, level * 100, threshold, k, name, value)
            report.add(method, level * 100, threshold, k, "users_evaluated",
                       len(scores))
            report.add(method, level * 100, threshold, k, "users_skipped", skipped)
    return report


def coverage_table(train: RatingsMatrix, levels=(0.6, 0.8, 1.0),
                   *, scaling: int = 0) -> EvalReport:
    """Factor counts needed by SVD energy and greedy factorization per level."""
    for level in levels:
        if not 0 < level <= 1:
            raise ValueError(f"coverage level {level} outside (0, 1]")
    report = EvalReport()
    sigma = svd_mod.svd(train.to_dense()).sigma
    for level in levels:
        report.add("svd", level * 100, None, None, "factor_count",
                   svd_mod.factors_for_coverage(sigma, level))
    ctx = scale(train, scaling)
    model = factorize(ctx, max(levels))
    for level in levels:
        report.add("bmf", level * 100, scaling, None, "factor_count",
                   model.prefix_size_for_coverage(ctx.ones_count, level))
    return report
