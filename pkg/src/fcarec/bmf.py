"""Greedy Boolean matrix factorization with formal concepts as factors.

The factorizer repeatedly picks the formal concept whose rectangle covers
the most not-yet-covered incidences, growing each concept one attribute at
a time and jumping to the closure after every adoption.  This finds good
factors without ever enumerating the full concept set.  A brute-force
Boolean-rank search over tiny contexts is included as an independent
testing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bitset
from .context import (
    BooleanContext,
    BooleanMatrixPair,
    derive_attributes,
    derive_objects,
)


@dataclass(frozen=True)
class Factor:
    """One formal concept used as a factor: (extent, intent) bitmasks."""

    extent: int
    intent: int


@dataclass(frozen=True)
class FactorModel:
    """An ordered factor list plus coverage bookkeeping.

    ``covered_cumulative[f]`` is the number of incidence cells lying inside
    the union of the first f+1 factor rectangles; it is strictly increasing
    because the greedy loop never emits a factor that covers nothing new.
    """

    n_objects: int
    n_attributes: int
    factors: tuple[Factor, ...]
    covered_cumulative: tuple[int, ...]

    def __post_init__(self):
        if len(self.covered_cumulative) != len(self.factors):
            raise ValueError("one cumulative count per factor required")

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def covered_count(self) -> int:
        return self.covered_cumulative[-1] if self.factors else 0

    def truncate(self, k: int) -> "FactorModel":
        """The sub-model made of the first k factors, in emission order."""
        if not 0 <= k <= self.k:
            raise ValueError(f"cannot truncate to {k} of {self.k} factors")
        return FactorModel(self.n_objects, self.n_attributes,
                           self.factors[:k], self.covered_cumulative[:k])

    def prefix_size_for_coverage(self, total_ones: int, level: float) -> int:
        """Smallest factor count whose covered cells reach ``level`` of ``total_ones``."""
        if not 0 < level <= 1:
            raise ValueError("coverage level must be in (0, 1]")
        threshold = level * total_ones
        for f, covered in enumerate(self.covered_cumulative, start=1):
            if covered >= threshold:
                return f
        raise ValueError(
            f"model covers {self.covered_count}/{total_ones} cells, "
            f"below the requested level {level}"
        )


def _intent_of(extent: int, rows, n_attributes: int) -> int:
    acc = bitset.full_mask(n_attributes)
    m = extent
    while m:
        low = m & -m
        acc &= rows[low.bit_length() - 1]
        m ^= low
    return acc


def _uncovered_in_rectangle(extent: int, intent: int, uncovered) -> int:
    count = 0
    m = extent
    while m:
        low = m & -m
        count += (uncovered[low.bit_length() - 1] & intent).bit_count()
        m ^= low
    return count


def factorize(ctx: BooleanContext, coverage_target: float = 1.0) -> FactorModel:
    """Greedy concept-by-concept factorization up to a coverage target.

    Maintains the set of uncovered incidences.  Each round grows an
    attribute set D from empty: every candidate attribute j outside D is
    scored by the number of uncovered cells inside the rectangle of the
    concept generated by D + {j}; the best candidate is adopted by jumping
    to that concept's full intent, and growth stops when no candidate
    strictly improves the score.  The resulting concept is emitted and its
    rectangle subtracted.  Rounds continue until the covered fraction
    reaches ``coverage_target``.

    Stopping is crossing-inclusive: the factor that first reaches the
    target is kept.  Ties between equally scoring candidates go to the
    lowest attribute index, which makes runs reproducible.
    """
    if not 0 < coverage_target <= 1:
        raise ValueError("coverage_target must be in (0, 1]")
    total = ctx.ones_count
    if total == 0:
        raise ValueError("cannot factorize an all-zero context")

    n, m = ctx.n_objects, ctx.n_attributes
    rows = ctx.rows
    cols = ctx.cols
    uncovered = list(rows)

    # The concept grown from a single attribute never changes across
    # rounds (only its score does), and the first growth step of every
    # round evaluates exactly these, so derive them once.
    single = [
        (cols[j], _intent_of(cols[j], rows, m)) if cols[j] else None
        for j in range(m)
    ]

    factors: list[Factor] = []
    cumulative: list[int] = []
    seen: set[tuple[int, int]] = set()
    covered = 0

    while covered < coverage_target * total and covered < total:
        intent = 0
        extent = bitset.full_mask(n)
        best_score = 0
        first_step = True
        while True:
            step_score = best_score
            step_intent = step_extent = None
            for j in range(m):
                if (intent >> j) & 1:
                    continue
                if first_step:
                    if single[j] is None:
                        continue
                    candidate_extent, candidate_intent = single[j]
                else:
                    candidate_extent = extent & cols[j]
                    if not candidate_extent:
                        continue
                    # Cheap upper bound: the rectangle cannot cover more
                    # than |extent| * n_attributes cells.
                    if candidate_extent.bit_count() * m <= step_score:
                        continue
                    candidate_intent = _intent_of(candidate_extent, rows, m)
                score = _uncovered_in_rectangle(candidate_extent,
                                                candidate_intent, uncovered)
                if score > step_score:
                    step_score = score
                    step_intent = candidate_intent
                    step_extent = candidate_extent
            first_step = False
            if step_intent is None:
                break
            intent, extent, best_score = step_intent, step_extent, step_score

        # An uncovered cell always admits a single-attribute concept that
        # covers it, so an empty round would mean corrupted bookkeeping.
        assert best_score > 0 and intent and extent
        key = (extent, intent)
        assert key not in seen, "greedy re-emitted a concept"
        seen.add(key)

        newly = 0
        rest = extent
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            newly += (uncovered[i] & intent).bit_count()
            uncovered[i] &= ~intent
            rest ^= low
        assert newly == best_score
        covered += newly
        factors.append(Factor(extent=extent, intent=intent))
        cumulative.append(covered)

    return FactorModel(n, m, tuple(factors), tuple(cumulative))


def build_pq(model: FactorModel) -> BooleanMatrixPair:
    """Membership matrices of a factor model.

    P has one column per factor marking extent membership, Q one row per
    factor holding the intent.  An empty model yields a 0-width P and a
    0-height Q, whose Boolean product is the zero context.
    """
    p_rows = [0] * model.n_objects
    for l, factor in enumerate(model.factors):
        rest = factor.extent
        while rest:
            low = rest & -rest
            p_rows[low.bit_length() - 1] |= 1 << l
            rest ^= low
    q_rows = tuple(factor.intent for factor in model.factors)
    return BooleanMatrixPair(model.n_objects, model.n_attributes,
                             model.k, tuple(p_rows), q_rows)


def profile_matrix(model: FactorModel) -> np.ndarray:
    """P as a dense float array (objects x factors), for neighbor search."""
    out = np.zeros((model.n_objects, model.k))
    for l, factor in enumerate(model.factors):
        for i in bitset.iter_indices(factor.extent):
            out[i, l] = 1.0
    return out


def bmf_coverage(model: FactorModel, ctx: BooleanContext) -> float:
    """Fraction of the context's incidences inside the union of factor rectangles.

    Recomputed from the rectangles themselves rather than the model's
    bookkeeping, so tests can cross-check the two.
    """
    if (model.n_objects, model.n_attributes) != (ctx.n_objects, ctx.n_attributes):
        raise ValueError("model and context dimensions differ")
    if ctx.ones_count == 0:
        return 0.0
    acc = [0] * ctx.n_objects
    for factor in model.factors:
        for i in bitset.iter_indices(factor.extent):
            acc[i] |= factor.intent
    covered = sum((acc_row & row).bit_count()
                  for acc_row, row in zip(acc, ctx.rows))
    return covered / ctx.ones_count


_BRUTEFORCE_CELL_LIMIT = 42


def enumerate_concepts(ctx: BooleanContext) -> list[Factor]:
    """All formal concepts with nonempty extent and intent.

    Exhaustive over subsets of the smaller side, so only meant for tiny
    contexts; the factorizer itself never calls this.
    """
    pairs = set()
    if ctx.n_attributes <= ctx.n_objects:
        for sub in range(1 << ctx.n_attributes):
            extent = derive_objects(sub, ctx)
            intent = derive_attributes(extent, ctx)
            if extent and intent:
                pairs.add((extent, intent))
    else:
        for sub in range(1 << ctx.n_objects):
            intent = derive_attributes(sub, ctx)
            extent = derive_objects(intent, ctx)
            if extent and intent:
                pairs.add((extent, intent))
    return [Factor(extent=e, intent=i) for e, i in sorted(pairs)]


def boolean_rank_bruteforce(ctx: BooleanContext, max_k: int) -> int | None:
    """Exact Boolean rank by exhaustive search, or None if it exceeds ``max_k``.

    Searching over formal concepts only is sufficient because any exact
    k-factor decomposition can be replaced by one using at most k concepts.
    Refuses contexts above 42 cells; the search is exponential.
    """
    cells = ctx.n_objects * ctx.n_attributes
    if cells > _BRUTEFORCE_CELL_LIMIT:
        raise ValueError(
            f"context has {cells} cells, above the exhaustive-search "
            f"bound of {_BRUTEFORCE_CELL_LIMIT}"
        )
    m = ctx.n_attributes
    target = 0
    for i, row in enumerate(ctx.rows):
        target |= row << (i * m)
    if target == 0:
        return 0

    rect_masks = []
    for concept in enumerate_concepts(ctx):
        mask = 0
        for i in bitset.iter_indices(concept.extent):
            mask |= concept.intent << (i * m)
        rect_masks.append(mask)
    rect_masks.sort(key=int.bit_count, reverse=True)

    def cover(remaining: int, budget: int) -> bool:
        if remaining == 0:
            return True
        if budget == 0:
            return False
        # Branch on the lowest uncovered cell: some chosen rectangle must
        # contain it, which prunes permutations of the same choice.
        low = remaining & -remaining
        for mask in rect_masks:
            if mask & low and cover(remaining & ~mask, budget - 1):
                return True
        return False

    for k in range(1, max_k + 1):
        if cover(target, k):
            return k
    return None
