"""Derivation operators, concepts, and the Boolean product."""

import numpy as np
import pytest

import fcarec as fr
from fcarec.bitset import full_mask, indices, mask_from_indices, mask_from_row

from conftest import BINARY_6X7, FACTORS_6X7, random_context


def brute_derive_attributes(object_indices, dense):
    """Independent oracle: scan columns shared by all chosen rows."""
    n, m = dense.shape
    return [j for j in range(m)
            if all(dense[i][j] for i in object_indices)]


def brute_derive_objects(attr_indices, dense):
    n, m = dense.shape
    return [i for i in range(n)
            if all(dense[i][j] for j in attr_indices)]


class TestDerivations:
    def test_user_pair_shares_first_three_movies(self, toy_ctx):
        got = fr.derive_attributes(mask_from_indices([0, 1]), toy_ctx)
        assert indices(got) == [0, 1, 2]
        assert indices(got) == brute_derive_attributes([0, 1], BINARY_6X7)

    def test_empty_object_set_derives_all_attributes(self, toy_ctx):
        assert fr.derive_attributes(0, toy_ctx) == full_mask(7)

    def test_single_user_row_scan(self, toy_ctx):
        got = fr.derive_attributes(mask_from_indices([4]), toy_ctx)
        assert indices(got) == [5, 6]
        assert indices(got) == brute_derive_attributes([4], BINARY_6X7)

    def test_attribute_pair_shared_by_middle_users(self, toy_ctx):
        got = fr.derive_objects(mask_from_indices([3, 4]), toy_ctx)
        assert indices(got) == [1, 2, 3]
        assert indices(got) == brute_derive_objects([3, 4], BINARY_6X7)

    def test_empty_attribute_set_derives_all_objects(self, toy_ctx):
        assert fr.derive_objects(0, toy_ctx) == full_mask(6)

    def test_disjoint_columns_derive_empty(self, toy_ctx):
        got = fr.derive_objects(mask_from_indices([0, 5]), toy_ctx)
        assert got == 0
        assert brute_derive_objects([0, 5], BINARY_6X7) == []

    def test_out_of_range_object_raises(self, toy_ctx):
        with pytest.raises(ValueError):
            fr.derive_attributes(1 << 6, toy_ctx)

    def test_out_of_range_attribute_raises(self, toy_ctx):
        with pytest.raises(ValueError):
            fr.derive_objects(1 << 7, toy_ctx)


class TestGaloisProperties:
    def test_antitone_and_closure_properties(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            ctx = random_context(rng, max_side=8)
            a1 = int(rng.integers(0, 1 << ctx.n_objects))
            a2 = a1 | int(rng.integers(0, 1 << ctx.n_objects))
            # antitone: growing the object set shrinks the derived attributes
            assert fr.derive_attributes(a2, ctx) & fr.derive_attributes(a1, ctx) \
                == fr.derive_attributes(a2, ctx)
            b1 = int(rng.integers(0, 1 << ctx.n_attributes))
            b2 = b1 | int(rng.integers(0, 1 << ctx.n_attributes))
            assert fr.derive_objects(b2, ctx) & fr.derive_objects(b1, ctx) \
                == fr.derive_objects(b2, ctx)

    def test_extensive_and_idempotent(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            ctx = random_context(rng, max_side=8)
            a = int(rng.integers(0, 1 << ctx.n_objects))
            closed = fr.derive_objects(fr.derive_attributes(a, ctx), ctx)
            assert closed | a == closed  # A is contained in its closure
            again = fr.derive_objects(fr.derive_attributes(closed, ctx), ctx)
            assert again == closed


class TestIsFormalConcept:
    def test_known_concept(self, toy_ctx):
        extent, intent = FACTORS_6X7[0]
        assert fr.is_formal_concept(mask_from_indices(extent),
                                    mask_from_indices(intent), toy_ctx)

    def test_boundary_concept_empty_extent(self, toy_ctx):
        # No user saw all seven movies, so (empty, M) is closed both ways.
        assert fr.derive_objects(full_mask(7), toy_ctx) == 0
        assert fr.is_formal_concept(0, full_mask(7), toy_ctx)

    def test_non_closed_pair_rejected(self, toy_ctx):
        # {m0} is rated by users 0 and 1, so ({0}, {m0}) is not closed.
        assert fr.derive_objects(mask_from_indices([0]), toy_ctx) \
            == mask_from_indices([0, 1])
        assert not fr.is_formal_concept(mask_from_indices([0]),
                                        mask_from_indices([0]), toy_ctx)


class TestBoolProduct:
    def test_reconstructs_worked_example(self, toy_ctx):
        pair = fr.BooleanMatrixPair(
            n_objects=6, n_attributes=7, k=3,
            p_rows=tuple(
                mask_from_indices([l for l, (ext, _) in enumerate(FACTORS_6X7)
                                   if i in ext])
                for i in range(6)),
            q_rows=tuple(mask_from_indices(int_) for _, int_ in FACTORS_6X7),
        )
        assert fr.bool_product(pair) == toy_ctx

    def test_single_factor_broadcasts_row(self):
        row = mask_from_indices([1, 3])
        pair = fr.BooleanMatrixPair(4, 5, 1, (1, 1, 1, 1), (row,))
        product = fr.bool_product(pair)
        assert all(r == row for r in product.rows)

    def test_zero_factors_gives_zero_matrix(self):
        pair = fr.BooleanMatrixPair(3, 4, 0, (0, 0, 0), ())
        product = fr.bool_product(pair)
        assert product.rows == (0, 0, 0)
        assert product.ones_count == 0

    def test_matches_triple_loop_on_random_matrices(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            n, k, m = (int(rng.integers(1, 9)) for _ in range(3))
            p = rng.random((n, k)) < 0.4
            q = rng.random((k, m)) < 0.4
            pair = fr.BooleanMatrixPair(
                n, m, k,
                tuple(mask_from_row(r) for r in p),
                tuple(mask_from_row(r) for r in q),
            )
            got = np.array(fr.bool_product(pair).to_dense(), dtype=bool)
            want = np.zeros((n, m), dtype=bool)
            for i in range(n):
                for j in range(m):
                    for l in range(k):
                        if p[i, l] and q[l, j]:
                            want[i, j] = True
            assert np.array_equal(got, want)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fr.BooleanMatrixPair(2, 3, 1, (1,), (0b101,))  # wrong P length
        with pytest.raises(ValueError):
            fr.BooleanMatrixPair(2, 3, 2, (0b1, 0b1), (0b101,))  # wrong Q length
        with pytest.raises(ValueError):
            fr.BooleanMatrixPair(2, 3, 1, (0b10, 0b1), (0b101,))  # P bit beyond k


class TestBooleanContext:
    def test_dense_round_trip(self, toy_ctx):
        assert fr.BooleanContext.from_dense(toy_ctx.to_dense()) == toy_ctx

    def test_ones_count_matches_row_popcounts(self, toy_ctx):
        assert toy_ctx.ones_count == 18
        assert toy_ctx.ones_count == sum(r.bit_count() for r in toy_ctx.rows)

    def test_columns_transpose_rows(self, toy_ctx):
        dense = np.array(toy_ctx.to_dense())
        for j, col in enumerate(toy_ctx.cols):
            assert indices(col) == list(np.nonzero(dense[:, j])[0])

    def test_row_outside_width_rejected(self):
        with pytest.raises(ValueError):
            fr.BooleanContext(1, 2, (0b100,))

    def test_row_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fr.BooleanContext(2, 2, (0b1,))
