"""SVD decomposition, energy coverage, and user profiles."""

import numpy as np
import pytest

import fcarec as fr

from conftest import RATINGS_6X7, SIGMA_6X7, U3_6X7


def column_close_up_to_sign(got, want, atol):
    direct = np.max(np.abs(got - want))
    flipped = np.max(np.abs(got + want))
    return min(direct, flipped) <= atol


class TestSvd:
    def test_worked_example_singular_values(self):
        res = fr.svd(RATINGS_6X7)
        assert res.sigma.shape == (6,)
        np.testing.assert_allclose(res.sigma, SIGMA_6X7, atol=0.01)

    def test_worked_example_user_columns(self):
        res = fr.svd(RATINGS_6X7)
        profiles = fr.user_profiles(res, 3)
        for c in range(3):
            assert column_close_up_to_sign(profiles[:, c], U3_6X7[:, c], 0.01)

    def test_diagonal_matrix(self):
        res = fr.svd(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(res.sigma, [3.0, 1.0])
        np.testing.assert_allclose(np.abs(res.U), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(np.abs(res.V), np.eye(2), atol=1e-12)

    def test_rank_one_outer_product(self):
        rng = np.random.default_rng(31)
        u = rng.normal(size=6)
        v = rng.normal(size=4)
        res = fr.svd(np.outer(u, v))
        expected = np.linalg.norm(u) * np.linalg.norm(v)
        assert abs(res.sigma[0] - expected) < 1e-8
        assert np.all(res.sigma[1:] < 1e-8)

    def test_invariants_on_random_matrices(self):
        rng = np.random.default_rng(32)
        for _ in range(20):
            m = int(rng.integers(1, 51))
            n = int(rng.integers(1, 81))
            a = rng.normal(size=(m, n)) * rng.uniform(0.1, 10)
            res = fr.svd(a)
            r = min(m, n)
            assert res.sigma.shape == (r,)
            assert np.all(res.sigma >= 0)
            assert np.all(np.diff(res.sigma) <= 0)
            np.testing.assert_allclose(res.U.T @ res.U, np.eye(r), atol=1e-8)
            np.testing.assert_allclose(res.V.T @ res.V, np.eye(r), atol=1e-8)
            recon = res.U @ np.diag(res.sigma) @ res.V.T
            assert np.linalg.norm(recon - a) <= 1e-6 * max(np.linalg.norm(a), 1e-30)

    def test_singular_values_permutation_invariant(self):
        rng = np.random.default_rng(33)
        a = rng.normal(size=(8, 5))
        shuffled = a[rng.permutation(8)][:, rng.permutation(5)]
        np.testing.assert_allclose(fr.svd(a).sigma, fr.svd(shuffled).sigma,
                                   atol=1e-10)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            fr.svd(np.array([[1.0, np.nan]]))
        with pytest.raises(ValueError):
            fr.svd(np.array([[np.inf, 1.0]]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fr.svd(np.zeros((0, 3)))


class TestEnergyCoverage:
    def test_top_three_carry_most_energy(self):
        sigma = np.array(SIGMA_6X7)
        total = np.sum(sigma**2)
        assert fr.energy_coverage(sigma, 3) == pytest.approx(
            np.sum(sigma[:3] ** 2) / total)
        assert fr.energy_coverage(sigma, 3) >= 0.985

    def test_two_factor_energy_by_direct_arithmetic(self):
        sigma = np.array(SIGMA_6X7)
        want = (12.62**2 + 10.66**2) / np.sum(sigma**2)
        assert fr.energy_coverage(sigma, 2) == pytest.approx(want)
        assert fr.energy_coverage(sigma, 2) == pytest.approx(0.828, abs=5e-4)

    def test_full_length_is_one(self):
        rng = np.random.default_rng(34)
        sigma = np.sort(rng.uniform(0, 5, size=7))[::-1]
        assert fr.energy_coverage(sigma, 7) == 1.0

    def test_nondecreasing_in_k(self):
        sigma = np.array(SIGMA_6X7)
        values = [fr.energy_coverage(sigma, k) for k in range(7)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert values[0] == 0.0

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            fr.energy_coverage([1.0], 2)
        with pytest.raises(ValueError):
            fr.energy_coverage([1.0], -1)


class TestFactorsForCoverage:
    def test_worked_example_cumulative_energies(self):
        sigma = np.array(SIGMA_6X7)
        # Oracle: cumulative energy fractions from the values themselves.
        cum = np.cumsum(sigma**2) / np.sum(sigma**2)
        assert cum[0] == pytest.approx(0.483, abs=5e-4)
        assert cum[1] == pytest.approx(0.828, abs=5e-4)
        assert fr.factors_for_coverage(sigma, 0.80) == 2

    def test_full_coverage_counts_nonzero_values(self):
        assert fr.factors_for_coverage([3.0, 1.0, 0.0, 0.0], 1.0) == 2

    def test_nonincreasing_as_p_decreases(self):
        sigma = np.array(SIGMA_6X7)
        ps = [1.0, 0.9, 0.8, 0.5, 0.2, 0.05]
        counts = [fr.factors_for_coverage(sigma, p) for p in ps]
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_p_out_of_range(self):
        for bad in (0.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                fr.factors_for_coverage([1.0], bad)


class TestUserProfiles:
    def test_full_width_plain_is_u(self):
        res = fr.svd(RATINGS_6X7)
        np.testing.assert_array_equal(fr.user_profiles(res, 6), res.U)

    def test_sigma_weighting_with_uniform_spectrum(self):
        # Orthogonal input gives equal singular values, so weighting is a
        # uniform scaling of the plain profiles.
        a = np.array([[0.0, 2.0], [2.0, 0.0]])
        res = fr.svd(a)
        np.testing.assert_allclose(res.sigma, [2.0, 2.0])
        np.testing.assert_allclose(fr.user_profiles(res, 2, "sigma"),
                                   2.0 * fr.user_profiles(res, 2, "plain"))

    def test_k_out_of_range(self):
        res = fr.svd(RATINGS_6X7)
        with pytest.raises(ValueError):
            fr.user_profiles(res, 7)

    def test_unknown_weighting(self):
        res = fr.svd(RATINGS_6X7)
        with pytest.raises(ValueError):
            fr.user_profiles(res, 2, "bogus")


class TestMatrixRoundTrip:
    def test_save_load_after_quantization(self, tmp_path):
        rng = np.random.default_rng(35)
        path = tmp_path / "profiles.txt"
        a = rng.normal(size=(5, 4))
        fr.save_matrix(a, path)
        once = fr.load_matrix(path)
        # 9 significant digits quantize once; after that the format is a
        # fixed point.
        np.testing.assert_allclose(once, a, rtol=1e-8)
        fr.save_matrix(once, path)
        np.testing.assert_array_equal(fr.load_matrix(path), once)
