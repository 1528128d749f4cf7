"""MovieLens-format ingestion, threshold scaling, splitting, and persistence.

External user/item ids live here and nowhere else: matrices carry id maps
alongside dense 0-based indices, and every file format speaks external ids.
All text output uses LF line endings; CRLF input is accepted.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import sparse

from . import bitset
from .bmf import Factor, FactorModel
from .context import BooleanContext

SCALING_THRESHOLDS = (0, 1, 2, 3)


class DataFormatError(ValueError):
    """Raised for malformed rating, matrix, or model files."""


class RatingsMatrix:
    """Sparse user x item ratings in {1..5} with external-id maps.

    Zero cells mean "unrated".  Instances are immutable once built; the
    dense view and per-user means are cached on first use.
    """

    def __init__(self, user_ids, item_ids, matrix: sparse.csr_matrix):
        self.user_ids = np.asarray(user_ids, dtype=np.int64)
        self.item_ids = np.asarray(item_ids, dtype=np.int64)
        self.matrix = matrix.tocsr()
        if self.matrix.shape != (self.user_ids.size, self.item_ids.size):
            raise ValueError("matrix shape does not match id maps")
        if len(set(self.user_ids.tolist())) != self.user_ids.size:
            raise ValueError("duplicate external user ids")
        if len(set(self.item_ids.tolist())) != self.item_ids.size:
            raise ValueError("duplicate external item ids")
        data = self.matrix.data
        if data.size and (np.any(data < 1) or np.any(data > 5)
                          or np.any(data != np.round(data))):
            raise ValueError("ratings must be integers in 1..5")
        self._user_index = {int(u): k for k, u in enumerate(self.user_ids)}
        self._item_index = {int(i): k for k, i in enumerate(self.item_ids)}
        self._dense = None
        self._user_means = None

    @classmethod
    def from_triples(cls, triples) -> "RatingsMatrix":
        """Build from (external user, external item, rating) triples.

        Dense indices are assigned by ascending external id.  Duplicate
        (user, item) pairs are rejected; deduplicate before calling.
        """
        triples = list(triples)
        pairs = {(u, i) for u, i, _ in triples}
        if len(pairs) != len(triples):
            raise ValueError("duplicate (user, item) pairs in triples")
        user_ids = sorted({u for u, _, _ in triples})
        item_ids = sorted({i for _, i, _ in triples})
        user_index = {u: k for k, u in enumerate(user_ids)}
        item_index = {i: k for k, i in enumerate(item_ids)}
        rows = np.fromiter((user_index[u] for u, _, _ in triples), dtype=int,
                           count=len(triples))
        cols = np.fromiter((item_index[i] for _, i, _ in triples), dtype=int,
                           count=len(triples))
        vals = np.fromiter((r for _, _, r in triples), dtype=float,
                           count=len(triples))
        shape = (len(user_ids), len(item_ids))
        matrix = sparse.csr_matrix((vals, (rows, cols)), shape=shape)
        return cls(user_ids, item_ids, matrix)

    @classmethod
    def with_entries(cls, user_ids, item_ids, rows, cols, values) -> "RatingsMatrix":
        """Build over fixed id maps from dense-index entries."""
        shape = (len(user_ids), len(item_ids))
        matrix = sparse.csr_matrix((values, (rows, cols)), shape=shape)
        return cls(user_ids, item_ids, matrix)

    @property
    def n_users(self) -> int:
        return self.user_ids.size

    @property
    def n_items(self) -> int:
        return self.item_ids.size

    @property
    def n_ratings(self) -> int:
        return self.matrix.nnz

    def to_dense(self) -> np.ndarray:
        """Dense float view, zeros for unrated cells.  Cached; do not mutate."""
        if self._dense is None:
            self._dense = self.matrix.toarray()
            self._dense.flags.writeable = False
        return self._dense

    def rating(self, user: int, item: int) -> float:
        """Rating at dense indices, 0.0 when unrated."""
        return float(self.to_dense()[user, item])

    def user_mean(self, user: int) -> float | None:
        """Mean of the user's ratings, None if the user rated nothing."""
        if self._user_means is None:
            sums = np.asarray(self.matrix.sum(axis=1)).ravel()
            counts = np.diff(self.matrix.indptr)
            self._user_means = (sums, counts)
        sums, counts = self._user_means
        if counts[user] == 0:
            return None
        return float(sums[user] / counts[user])

    def global_mean(self) -> float | None:
        if self.matrix.nnz == 0:
            return None
        return float(self.matrix.data.mean())

    def user_dense_index(self, external_id: int) -> int:
        try:
            return self._user_index[int(external_id)]
        except KeyError:
            raise KeyError(f"unknown user id {external_id}") from None

    def item_dense_index(self, external_id: int) -> int:
        try:
            return self._item_index[int(external_id)]
        except KeyError:
            raise KeyError(f"unknown item id {external_id}") from None

    def triples(self) -> list[tuple[int, int, int]]:
        """(external user, external item, rating) sorted by user then item."""
        coo = self.matrix.tocoo()
        out = [(int(self.user_ids[u]), int(self.item_ids[i]), int(r))
               for u, i, r in zip(coo.row, coo.col, coo.data)]
        out.sort()
        return out

    def __eq__(self, other):
        if not isinstance(other, RatingsMatrix):
            return NotImplemented
        return (np.array_equal(self.user_ids, other.user_ids)
                and np.array_equal(self.item_ids, other.item_ids)
                and self.triples() == other.triples())

    def __repr__(self):
        return (f"RatingsMatrix({self.n_users} users x {self.n_items} items, "
                f"{self.n_ratings} ratings)")


def _parse_movielens(path) -> dict[tuple[int, int], int]:
    """Parse one tab-separated ratings file; last duplicate wins."""
    entries: dict[tuple[int, int], int] = {}
    duplicates = 0
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 4 tab-separated fields, "
                    f"got {len(parts)}"
                )
            try:
                user, item, rating = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-integer user/item/rating field"
                ) from None
            if not 1 <= rating <= 5:
                raise DataFormatError(
                    f"{path}:{lineno}: rating {rating} outside 1..5"
                )
            if (user, item) in entries:
                duplicates += 1
            entries[(user, item)] = rating
    if duplicates:
        warnings.warn(
            f"{path}: {duplicates} duplicate (user, item) lines; "
            f"last occurrence kept"
        )
    return entries


def load_movielens(path) -> RatingsMatrix:
    """Load a `user TAB item TAB rating TAB timestamp` file.

    Timestamps are ignored.  Duplicate (user, item) lines keep the last
    occurrence and emit one warning with the count.
    """
    entries = _parse_movielens(path)
    return RatingsMatrix.from_triples(
        (u, i, r) for (u, i), r in entries.items()
    )


def save_ratings(ratings: RatingsMatrix, path) -> None:
    """Write MovieLens-format lines (timestamp 0), sorted by user then item."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for user, item, rating in ratings.triples():
            handle.write(f"{user}\t{item}\t{rating}\t0\n")


def scale(ratings: RatingsMatrix, threshold: int) -> BooleanContext:
    """Binarize: incidence is 1 iff the rating is strictly above ``threshold``.

    Unrated cells are 0 at every threshold, so threshold 0 marks exactly
    the rated cells.
    """
    if threshold not in SCALING_THRESHOLDS:
        raise ValueError(
            f"scaling threshold must be one of {SCALING_THRESHOLDS}"
        )
    matrix = ratings.matrix
    rows = []
    for u in range(ratings.n_users):
        lo, hi = matrix.indptr[u], matrix.indptr[u + 1]
        cols = matrix.indices[lo:hi][matrix.data[lo:hi] > threshold]
        rows.append(bitset.mask_from_indices(cols.tolist()))
    return BooleanContext(ratings.n_users, ratings.n_items, tuple(rows))


MIN_RATINGS_PER_USER = 20


def split(ratings: RatingsMatrix, test_fraction: float,
          seed: int) -> tuple[RatingsMatrix, RatingsMatrix]:
    """Random disjoint train/test partition of the rating triples.

    Users with 20 or fewer ratings are dropped first, then each remaining
    rating lands in the test set with the given fraction, uniformly at
    random under the seed.  Both outputs share one id map, so dense user
    and item indices agree across them.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    counts = np.diff(ratings.matrix.indptr)
    keep_user = counts > MIN_RATINGS_PER_USER
    coo = ratings.matrix.tocoo()
    mask = keep_user[coo.row]
    rows, cols, vals = coo.row[mask], coo.col[mask], coo.data[mask]

    kept_items = np.unique(cols)
    user_ids = ratings.user_ids[keep_user]
    item_ids = ratings.item_ids[kept_items]
    user_remap = np.cumsum(keep_user) - 1
    item_remap = np.full(ratings.n_items, -1)
    item_remap[kept_items] = np.arange(kept_items.size)
    rows = user_remap[rows]
    cols = item_remap[cols]

    rng = np.random.default_rng(seed)
    order = rng.permutation(vals.size)
    n_test = int(vals.size * test_fraction)
    test_idx, train_idx = order[:n_test], order[n_test:]
    train = RatingsMatrix.with_entries(user_ids, item_ids, rows[train_idx],
                                       cols[train_idx], vals[train_idx])
    test = RatingsMatrix.with_entries(user_ids, item_ids, rows[test_idx],
                                      cols[test_idx], vals[test_idx])
    return train, test


def load_split_files(train_path, test_path) -> tuple[RatingsMatrix, RatingsMatrix]:
    """Load a pre-split pair of rating files over one shared id map.

    The two files must not share any (user, item) pair.
    """
    train_entries = _parse_movielens(train_path)
    test_entries = _parse_movielens(test_path)
    overlap = train_entries.keys() & test_entries.keys()
    if overlap:
        raise DataFormatError(
            f"{len(overlap)} (user, item) pairs appear in both "
            f"{train_path} and {test_path}"
        )
    user_ids = sorted({u for u, _ in train_entries} | {u for u, _ in test_entries})
    item_ids = sorted({i for _, i in train_entries} | {i for _, i in test_entries})
    user_index = {u: k for k, u in enumerate(user_ids)}
    item_index = {i: k for k, i in enumerate(item_ids)}

    def build(entries):
        rows = [user_index[u] for u, _ in entries]
        cols = [item_index[i] for _, i in entries]
        vals = [float(r) for r in entries.values()]
        return RatingsMatrix.with_entries(user_ids, item_ids, rows, cols, vals)

    return build(train_entries), build(test_entries)


def save_matrix(matrix, path) -> None:
    """Write a dense real matrix: `dense <rows> <cols>` header, 9 significant digits."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"dense {a.shape[0]} {a.shape[1]}\n")
        for row in a:
            handle.write(" ".join(format(v, ".9g") for v in row) + "\n")


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\r\n") for line in handle]
    if not lines:
        raise DataFormatError(f"{path}:1: empty file, expected `dense` header")
    header = lines[0].split()
    if len(header) != 3 or header[0] != "dense":
        raise DataFormatError(f"{path}:1: expected header `dense <rows> <cols>`")
    try:
        n_rows, n_cols = int(header[1]), int(header[2])
    except ValueError:
        raise DataFormatError(f"{path}:1: non-integer dimensions") from None
    out = np.zeros((n_rows, n_cols))
    for r in range(n_rows):
        lineno = r + 2
        if r + 1 >= len(lines):
            raise DataFormatError(f"{path}:{lineno}: missing matrix row")
        tokens = lines[r + 1].split()
        if len(tokens) != n_cols:
            raise DataFormatError(
                f"{path}:{lineno}: expected {n_cols} values, got {len(tokens)}"
            )
        try:
            row = [float(t) for t in tokens]
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: non-numeric value") from None
        if not all(np.isfinite(row)):
            raise DataFormatError(f"{path}:{lineno}: non-finite value")
        out[r] = row
    for extra, line in enumerate(lines[n_rows + 1:], start=n_rows + 2):
        if line.strip():
            raise DataFormatError(f"{path}:{extra}: trailing content")
    return out


def save_model(model: FactorModel, path) -> None:
    """Write a factor model: `bmf <n_objects> <n_attributes> <k>` header,
    then per factor one line of extent indices and one of intent indices."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"bmf {model.n_objects} {model.n_attributes} {model.k}\n")
        for factor in model.factors:
            handle.write(" ".join(map(str, bitset.indices(factor.extent))) + "\n")
            handle.write(" ".join(map(str, bitset.indices(factor.intent))) + "\n")


def _parse_index_line(line: str, bound: int, path, lineno: int, what: str) -> int:
    mask = 0
    for token in line.split():
        try:
            idx = int(token)
        except ValueError:
            raise DataFormatError(
                f"{path}:{lineno}: non-integer {what} index {token!r}"
            ) from None
        if not 0 <= idx < bound:
            raise DataFormatError(
                f"{path}:{lineno}: {what} index {idx} outside 0..{bound - 1}"
            )
        mask |= 1 << idx
    return mask


def load_model(path) -> FactorModel:
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\r\n") for line in handle]
    if not lines:
        raise DataFormatError(f"{path}:1: empty file, expected `bmf` header")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "bmf":
        raise DataFormatError(
            f"{path}:1: expected header `bmf <n_objects> <n_attributes> <k>`"
        )
    try:
        n_objects, n_attributes, k = map(int, header[1:])
    except ValueError:
        raise DataFormatError(f"{path}:1: non-integer header field") from None

    factors = []
    for l in range(k):
        extent_line, intent_line = 1 + 2 * l, 2 + 2 * l
        if intent_line >= len(lines):
            raise DataFormatError(
                f"{path}:{len(lines) + 1}: truncated file, "
                f"expected {2 * k} factor lines"
            )
        extent = _parse_index_line(lines[extent_line], n_objects, path,
                                   extent_line + 1, "object")
        intent = _parse_index_line(lines[intent_line], n_attributes, path,
                                   intent_line + 1, "attribute")
        factors.append(Factor(extent=extent, intent=intent))
    for extra, line in enumerate(lines[1 + 2 * k:], start=2 + 2 * k):
        if line.strip():
            raise DataFormatError(f"{path}:{extra}: trailing content")

    # Coverage bookkeeping is derivable from the rectangles alone.
    acc = [0] * n_objects
    covered = 0
    cumulative = []
    for factor in factors:
        for i in bitset.iter_indices(factor.extent):
            covered += (factor.intent & ~acc[i]).bit_count()
            acc[i] |= factor.intent
        cumulative.append(covered)
    return FactorModel(n_objects, n_attributes, tuple(factors), tuple(cumulative))
