"""User-based kNN: similarity search over profile rows and rating prediction.

Neighbor search runs over whatever profile matrix it is handed (raw rating
rows, binary factor memberships, or truncated singular-vector profiles);
predictions always come from the neighbors' original training ratings.
Similarities can be computed on demand per query user or precomputed as a
full matrix; the two paths share the ranking code and return identical
results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import RatingsMatrix

RATING_MIN = 1.0
RATING_MAX = 5.0

PROFILE_KINDS = ("raw", "bmf-P", "svd-U", "filtered-raw")


@dataclass(frozen=True)
class ProfileMatrix:
    """Per-user profile rows plus a provenance tag.

    ``kind`` records where the rows came from: "raw" rating rows, "bmf-P"
    factor memberships, "svd-U" singular-vector profiles, or "filtered-raw"
    rating rows restricted to factorization-covered cells.
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("profile matrix must be 2-D")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile matrix contains non-finite entries")
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "values", values)


def _values(profiles) -> np.ndarray:
    if isinstance(profiles, ProfileMatrix):
        return profiles.values
    return np.asarray(profiles, dtype=float)


def cosine_sim(u, v) -> float:
    """Cosine of the angle between two vectors; 0 if either is all-zero."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("vectors have different lengths")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def pearson_sim(u, v) -> float:
    """Pearson correlation over positions rated in both vectors.

    Zero entries mean "unrated" and are ignored.  Returns 0 when fewer
    than two co-rated positions exist or either side has no variance.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("vectors have different lengths")
    both = (u != 0) & (v != 0)
    if np.count_nonzero(both) < 2:
        return 0.0
    x = u[both] - u[both].mean()
    y = v[both] - v[both].mean()
    denom = np.linalg.norm(x) * np.linalg.norm(y)
    if denom == 0.0:
        return 0.0
    return float(np.clip(np.dot(x, y) / denom, -1.0, 1.0))


_SIM_FUNCS = {"cosine": cosine_sim, "pearson": pearson_sim}


def user_similarities(profiles, user: int, sim: str = "cosine") -> np.ndarray:
    """Similarity of one user's profile row to every row (self included)."""
    values = _values(profiles)
    if not 0 <= user < values.shape[0]:
        raise ValueError(f"user index {user} outside 0..{values.shape[0] - 1}")
    if sim == "cosine":
        norms = np.linalg.norm(values, axis=1)
        nu = norms[user]
        if nu == 0.0:
            return np.zeros(values.shape[0])
        out = values @ values[user]
        nonzero = norms > 0
        out[nonzero] /= norms[nonzero] * nu
        out[~nonzero] = 0.0
        return np.clip(out, -1.0, 1.0)
    if sim == "pearson":
        return np.array([pearson_sim(values[user], row) for row in values])
    raise ValueError(f"unknown similarity {sim!r}")


def similarity_matrix(profiles, sim: str = "cosine") -> np.ndarray:
    """All-pairs similarities (the precompute strategy).

    Row u equals ``user_similarities(profiles, u, sim)`` exactly; callers
    may use either interchangeably.
    """
    values = _values(profiles)
    m = values.shape[0]
    if sim == "cosine":
        norms = np.linalg.norm(values, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        normalized = values / safe[:, None]
        normalized[norms == 0] = 0.0
        return np.clip(normalized @ normalized.T, -1.0, 1.0)
    if sim == "pearson":
        out = np.zeros((m, m))
        for i in range(m):
            out[i, i] = pearson_sim(values[i], values[i])
            for j in range(i + 1, m):
                out[i, j] = out[j, i] = pearson_sim(values[i], values[j])
        return out
    raise ValueError(f"unknown similarity {sim!r}")


def ranked_neighbors(sims: np.ndarray, user: int) -> tuple[np.ndarray, np.ndarray]:
    """All candidate neighbors in descending-similarity order.

    Excludes the query user and every nonpositive similarity (mixed-sign
    weights would break the prediction normalizer).  Ties are broken by
    ascending user index.
    """
    sims = np.asarray(sims, dtype=float)
    order = np.lexsort((np.arange(sims.size), -sims))
    keep = order[(order != user) & (sims[order] > 0.0)]
    return keep, sims[keep]


def nearest_neighbors(profiles, user: int, k: int,
                      sim: str = "cosine",
                      precomputed: np.ndarray | None = None) -> list[tuple[int, float]]:
    """Top-k most similar other users as (index, similarity) pairs.

    ``precomputed`` may carry the user's row of ``similarity_matrix``.
    Fewer than k pairs are returned when not enough users have positive
    similarity.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if precomputed is None:
        sims = user_similarities(profiles, user, sim)
    else:
        values = _values(profiles)
        if not 0 <= user < values.shape[0]:
            raise ValueError(f"user index {user} outside 0..{values.shape[0] - 1}")
        sims = np.asarray(precomputed, dtype=float)
    idx, vals = ranked_neighbors(sims, user)
    return [(int(i), float(s)) for i, s in zip(idx[:k], vals[:k])]


def _fallback_value(ratings: RatingsMatrix, user: int) -> float:
    user_mean = ratings.user_mean(user)
    if user_mean is not None:
        return user_mean
    global_mean = ratings.global_mean()
    if global_mean is not None:
        return global_mean
    return 3.0


def _clamp(value: float) -> float:
    return min(RATING_MAX, max(RATING_MIN, value))


def predict_rating(user: int, item: int,
                   neighbors: list[tuple[int, float]],
                   ratings: RatingsMatrix) -> float:
    """Similarity-weighted mean of neighbor ratings for one item.

    Only neighbors who rated the item contribute; the weight sum serves as
    the normalizer.  When none of them rated it, falls back to the user's
    training mean, then the global training mean, then the scale midpoint,
    so a prediction always exists.  The result is clamped to the rating
    scale.
    """
    num = 0.0
    den = 0.0
    for neighbor, weight in neighbors:
        r = ratings.rating(neighbor, item)
        if r > 0:
            num += weight * r
            den += weight
    if den > 0:
        return _clamp(num / den)
    return _clamp(_fallback_value(ratings, user))


def predict_ratings_batch(user: int, items, neighbors: list[tuple[int, float]],
                          ratings: RatingsMatrix) -> np.ndarray:
    """Vectorized ``predict_rating`` over many items for one user."""
    items = np.asarray(items, dtype=int)
    fallback = _clamp(_fallback_value(ratings, user))
    if not neighbors:
        return np.full(items.size, fallback)
    idx = np.fromiter((n for n, _ in neighbors), dtype=int, count=len(neighbors))
    weights = np.fromiter((w for _, w in neighbors), dtype=float, count=len(neighbors))
    block = ratings.to_dense()[idx][:, items]
    rated = block > 0
    den = (weights[:, None] * rated).sum(axis=0)
    num = (weights[:, None] * block).sum(axis=0)
    preds = np.where(den > 0, num / np.where(den > 0, den, 1.0), fallback)
    return np.clip(preds, RATING_MIN, RATING_MAX)


def recommend_top_n(user: int, profiles, ratings: RatingsMatrix,
                    k: int, n: int, sim: str = "cosine") -> list[tuple[int, float]]:
    """The n unrated items with the highest predicted ratings.

    Returns (item index, prediction) pairs, best first, ties broken by
    ascending item index.  A user with no unrated training items gets an
    empty list.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    neighbors = nearest_neighbors(profiles, user, k, sim)
    row = ratings.to_dense()[user]
    candidates = np.nonzero(row == 0)[0]
    if candidates.size == 0:
        return []
    preds = predict_ratings_batch(user, candidates, neighbors, ratings)
    order = np.lexsort((candidates, -preds))[:n]
    return [(int(candidates[i]), float(preds[i])) for i in order]
