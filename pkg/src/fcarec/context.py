"""Formal contexts, derivation operators, and the Boolean matrix product.

A formal context is a binary objects-by-attributes incidence table.  Rows
are stored as bitsets (one int per object); a transposed copy is built once
per context so that both derivation directions reduce to AND-folds over
bitsets.  Contexts are immutable after construction and every operation
here is a pure function, so values can be shared freely across threads.

Index spaces are dense and 0-based.  Mapping to and from external ids is
the job of the data-loading layer, not of the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import bitset

# Object and attribute sets are int bitmasks (see fcarec.bitset).
ObjectSet = int
AttributeSet = int


@dataclass(frozen=True)
class BooleanContext:
    """Binary incidence between ``n_objects`` objects and ``n_attributes`` attributes.

    ``rows[i]`` is the attribute bitset of object i.  Every row must fit in
    ``n_attributes`` bits.
    """

    n_objects: int
    n_attributes: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n_objects < 0 or self.n_attributes < 0:
            raise ValueError("context dimensions must be nonnegative")
        if len(self.rows) != self.n_objects:
            raise ValueError(
                f"expected {self.n_objects} rows, got {len(self.rows)}"
            )
        for i, row in enumerate(self.rows):
            if row < 0 or row >> self.n_attributes:
                raise ValueError(
                    f"row {i} has bits outside the {self.n_attributes}-attribute range"
                )

    @classmethod
    def from_dense(cls, matrix) -> "BooleanContext":
        """Build a context from any 2-D 0/1 (or truthy) array-like."""
        rows = [bitset.mask_from_row(r) for r in matrix]
        width = max((len(list(r)) for r in matrix), default=0)
        return cls(len(rows), width, tuple(rows))

    def to_dense(self) -> list[list[int]]:
        return [bitset.row_from_mask(r, self.n_attributes) for r in self.rows]

    @cached_property
    def cols(self) -> tuple[int, ...]:
        """Object bitsets per attribute (the transposed incidence)."""
        cols = [0] * self.n_attributes
        for i, row in enumerate(self.rows):
            for j in bitset.iter_indices(row):
                cols[j] |= 1 << i
        return tuple(cols)

    @cached_property
    def ones_count(self) -> int:
        """Total number of incidences."""
        return sum(row.bit_count() for row in self.rows)


@dataclass(frozen=True)
class BooleanMatrixPair:
    """A pair of binary matrices P (objects x k) and Q (k x attributes).

    ``p_rows[i]`` holds the factor memberships of object i as a k-bit mask;
    ``q_rows[l]`` holds the attribute set of factor l.
    """

    n_objects: int
    n_attributes: int
    k: int
    p_rows: tuple[int, ...]
    q_rows: tuple[int, ...]

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("inner dimension k must be nonnegative")
        if len(self.p_rows) != self.n_objects:
            raise ValueError("P row count does not match n_objects")
        if len(self.q_rows) != self.k:
            raise ValueError("Q row count does not match k")
        for i, row in enumerate(self.p_rows):
            if row < 0 or row >> self.k:
                raise ValueError(f"P row {i} has bits outside the k-factor range")
        for l, row in enumerate(self.q_rows):
            if row < 0 or row >> self.n_attributes:
                raise ValueError(f"Q row {l} has bits outside the attribute range")


def _check_objects(objects: ObjectSet, ctx: BooleanContext) -> None:
    if objects < 0 or objects >> ctx.n_objects:
        raise ValueError("object set contains indices outside the context")


def _check_attributes(attributes: AttributeSet, ctx: BooleanContext) -> None:
    if attributes < 0 or attributes >> ctx.n_attributes:
        raise ValueError("attribute set contains indices outside the context")


def derive_attributes(objects: ObjectSet, ctx: BooleanContext) -> AttributeSet:
    """Attributes shared by every object in the set (the upward derivation).

    The empty object set derives to the full attribute set, which is what
    makes the composed derivations a closure operator.
    """
    _check_objects(objects, ctx)
    result = bitset.full_mask(ctx.n_attributes)
    for i in bitset.iter_indices(objects):
        result &= ctx.rows[i]
        if not result:
            break
    return result


def derive_objects(attributes: AttributeSet, ctx: BooleanContext) -> ObjectSet:
    """Objects having every attribute in the set (the downward derivation)."""
    _check_attributes(attributes, ctx)
    result = bitset.full_mask(ctx.n_objects)
    for j in bitset.iter_indices(attributes):
        result &= ctx.cols[j]
        if not result:
            break
    return result


def is_formal_concept(objects: ObjectSet, attributes: AttributeSet,
                      ctx: BooleanContext) -> bool:
    """True iff the pair is closed in both directions (extent, intent)."""
    return (derive_attributes(objects, ctx) == attributes
            and derive_objects(attributes, ctx) == objects)


def bool_product(pq: BooleanMatrixPair) -> BooleanContext:
    """Boolean matrix product: OR over factors of ANDed memberships.

    Entry (i, j) of the result is 1 iff some factor l has both object i in
    P and attribute j in Q.  An empty factor set yields the zero context.
    """
    rows = []
    for p_row in pq.p_rows:
        acc = 0
        for l in bitset.iter_indices(p_row):
            acc |= pq.q_rows[l]
        rows.append(acc)
    return BooleanContext(pq.n_objects, pq.n_attributes, tuple(rows))
