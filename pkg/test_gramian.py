"""
Tests des gramiens d'atteignabilité, de la récursion de covariance et de γ̄.
"""

import numpy as np
import pytest

from conftest import random_psd, random_stable
from src.cli.config import jordan
from src.core.errors import DimensionMismatchError, UnstableMatrixError
from src.core.gramian import (
    finite_horizon_objective, gamma_bar, gramian_finite, gramian_infinite, gramian_sum,
    norm_series, sigma_recursion, summarize_gramians, xi_finite, xi_infinite
)
from src.core.linalg_core import min_eigenvalue, spectral_norm


def truncated_series(A, Q, terms=201):
    total = np.zeros_like(A)
    power = np.eye(A.shape[0])
    for _ in range(terms):
        total += power @ Q @ power.T
        power = A @ power
    return total


class TestFiniteGramians:
    """Sommes partielles Γ_s et Ξ_s"""

    def test_empty_sum(self, jordan4):
        np.testing.assert_array_equal(gramian_finite(jordan4, 0), np.zeros((4, 4)))

    def test_single_term_is_identity(self, jordan4):
        np.testing.assert_allclose(gramian_finite(jordan4, 1), np.eye(4))

    def test_scalar_partial_sum(self):
        assert gramian_finite([[0.5]], 3)[0, 0] == pytest.approx(1.3125)

    def test_negative_horizon(self):
        with pytest.raises(ValueError):
            gramian_finite([[0.5]], -1)

    def test_xi_empty_and_zero_input(self, jordan4):
        np.testing.assert_array_equal(xi_finite(jordan4, np.eye(4), np.eye(4), 0), np.zeros((4, 4)))
        np.testing.assert_allclose(xi_finite(jordan4, np.zeros((4, 2)), np.eye(2), 7), np.zeros((4, 4)))

    def test_xi_scalar_hand_sum(self):
        u0 = 0.7
        assert xi_finite([[0.5]], [[1.0]], [[u0]], 2)[0, 0] == pytest.approx(1.25 * u0)

    def test_xi_time_varying_sequence(self):
        # Ξ_2 = A B U_0 Bᵀ Aᵀ + B U_1 Bᵀ
        seq = np.array([[[2.0]], [[3.0]]])
        assert xi_finite([[0.5]], [[1.0]], seq, 2)[0, 0] == pytest.approx(0.25 * 2.0 + 3.0)

    def test_xi_sequence_too_short(self):
        with pytest.raises(DimensionMismatchError):
            xi_finite([[0.5]], [[1.0]], np.ones((1, 1, 1)), 3)

    def test_xi_wrong_covariance_shape(self, jordan4):
        with pytest.raises(DimensionMismatchError):
            xi_finite(jordan4, np.eye(4), np.eye(3), 2)


class TestInfiniteGramians:
    """Γ_∞ et Ξ_∞ par Lyapunov"""

    def test_zero_dynamics(self):
        np.testing.assert_allclose(gramian_infinite(np.zeros((4, 4))), np.eye(4))

    def test_scalar_total(self):
        total = gramian_infinite([[0.8]]) + xi_infinite([[0.8]], [[1.0]], [[1.0]])
        assert total[0, 0] == pytest.approx(2.0 / (1.0 - 0.64), rel=1e-12)

    def test_jordan_matches_truncation(self, jordan4):
        U = 0.25 * np.eye(4)
        expected = truncated_series(jordan4, np.eye(4) + U)
        got = gramian_infinite(jordan4) + xi_infinite(jordan4, np.eye(4), U)
        assert np.max(np.abs(got - expected)) <= 1e-9 * spectral_norm(got)

    def test_finite_converges_to_infinite(self, rng):
        A = random_stable(rng, 3, radius=0.6)
        np.testing.assert_allclose(gramian_finite(A, 200), gramian_infinite(A), rtol=1e-9, atol=1e-12)

    def test_monotone_partial_sums(self, rng):
        # Γ_s ⪯ Γ_{s+1} ⪯ Γ_∞
        for _ in range(10):
            A = random_stable(rng, 3)
            limit = gramian_infinite(A)
            previous = gramian_finite(A, 0)
            for s in range(1, 30):
                current = gramian_finite(A, s)
                scale = spectral_norm(limit)
                assert min_eigenvalue(current - previous) >= -1e-12 * scale
                assert min_eigenvalue(limit - current) >= -1e-9 * scale
                previous = current

    def test_xi_is_affine_in_covariance(self, rng):
        A = random_stable(rng, 3)
        B = rng.standard_normal((3, 2))
        U1, U2 = random_psd(rng, 2), random_psd(rng, 2)
        alpha, beta = 0.3, 1.7
        combined = xi_infinite(A, B, alpha * U1 + beta * U2)
        expected = alpha * xi_infinite(A, B, U1) + beta * xi_infinite(A, B, U2)
        np.testing.assert_allclose(combined, expected, rtol=1e-10, atol=1e-12 * spectral_norm(expected))

    def test_lyapunov_fixed_point_on_random_systems(self, rng):
        # Γ_∞ + Ξ_∞ = A (Γ_∞ + Ξ_∞) Aᵀ + I + B U Bᵀ
        for _ in range(100):
            A = random_stable(rng, 4)
            B = rng.standard_normal((4, 2))
            U = random_psd(rng, 2, trace=1.0)
            P = gramian_infinite(A) + xi_infinite(A, B, U)
            residual = spectral_norm(P - A @ P @ A.T - np.eye(4) - B @ U @ B.T)
            assert residual <= 1e-9 * max(1.0, spectral_norm(P))

    def test_unstable_rejected(self):
        with pytest.raises(UnstableMatrixError):
            gramian_infinite([[1.2]])

    def test_summary_contraction_in_unit_interval(self, jordan4):
        summary = summarize_gramians(jordan4, np.eye(4), 0.25 * np.eye(4), 1.0)
        assert 0.0 < summary.gamma_contraction < 1.0
        assert summary.gamma_bar >= 1.0


class TestSigmaRecursion:
    """Récursion Σ_{s+1} = A Σ_s Aᵀ + B U_s Bᵀ + I"""

    def test_first_step(self, rng):
        A = random_stable(rng, 3)
        B = rng.standard_normal((3, 2))
        U = random_psd(rng, 2, trace=1.0)
        rec = sigma_recursion(A, B, U, 1)
        np.testing.assert_allclose(rec.sigmas[0], B @ U @ B.T + np.eye(3), atol=1e-14)

    def test_zero_dynamics(self):
        B = np.eye(2)
        seq = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 2.0]), np.diag([0.5, 0.5])])
        rec = sigma_recursion(np.zeros((2, 2)), B, seq, 3)
        for s in range(3):
            np.testing.assert_allclose(rec.sigmas[s], seq[s] + np.eye(2))

    def test_matches_gramian_identity(self, rng):
        # Σ_s = Γ_s(A) + Ξ_s(A, {U_k}) depuis Σ_0 = 0, séquence variable dans le temps
        horizon = 50
        for _ in range(10):
            A = random_stable(rng, 3)
            B = rng.standard_normal((3, 2))
            seq = np.array([random_psd(rng, 2, trace=1.0) for _ in range(horizon)])
            rec = sigma_recursion(A, B, seq, horizon)
            for s in range(1, horizon + 1):
                expected = gramian_finite(A, s) + xi_finite(A, B, seq, s)
                scale = spectral_norm(expected)
                assert spectral_norm(rec.sigmas[s - 1] - expected) <= 1e-10 * scale

    def test_sum_matches_gramian_sum(self, jordan4):
        U = 0.25 * np.eye(4)
        tau = 40
        rec_total = sigma_recursion(jordan4, np.eye(4), U, tau - 1).total
        np.testing.assert_allclose(gramian_sum(jordan4, np.eye(4), U, tau), rec_total, rtol=1e-12, atol=1e-10)
        assert finite_horizon_objective(jordan4, np.eye(4), U, tau) == pytest.approx(
            min_eigenvalue(rec_total), rel=1e-10
        )

    def test_gramian_sum_short_horizon(self, jordan4):
        np.testing.assert_array_equal(gramian_sum(jordan4, np.eye(4), np.eye(4), 1), np.zeros((4, 4)))

    def test_pure_noise_objective(self):
        tau = 25
        assert finite_horizon_objective(np.zeros((3, 3)), np.zeros((3, 1)), [[0.0]], tau) == pytest.approx(tau - 1)

    def test_invalid_horizon(self, jordan4):
        with pytest.raises(ValueError):
            sigma_recursion(jordan4, np.eye(4), np.eye(4), 0)
        with pytest.raises(ValueError):
            finite_horizon_objective(jordan4, np.eye(4), np.eye(4), 1)


class TestGammaBar:
    """Série Σ‖A^s‖ et constante γ̄"""

    def test_trivial_system(self):
        assert gamma_bar(np.zeros((2, 2)), np.zeros((2, 2)), 1.0) == pytest.approx(1.0, rel=1e-9)

    def test_scalar_geometric(self):
        assert gamma_bar([[0.5]], [[1.0]], 1.0) == pytest.approx(8.0, rel=1e-9)

    def test_jordan_matches_direct_summation(self, jordan4):
        direct = 0.0
        power = np.eye(4)
        for _ in range(10_000):
            direct += spectral_norm(power)
            power = jordan4 @ power
        expected = 2.0 * direct ** 2
        assert gamma_bar(jordan4, np.eye(4), 1.0) == pytest.approx(expected, rel=1e-6)

    def test_series_is_upper_bound(self, rng):
        for _ in range(10):
            A = random_stable(rng, 3)
            direct = 0.0
            power = np.eye(3)
            for _ in range(2000):
                direct += spectral_norm(power)
                power = A @ power
            assert norm_series(A) >= direct * (1 - 1e-12)

    def test_unstable(self):
        with pytest.raises(UnstableMatrixError):
            norm_series([[1.0]])
