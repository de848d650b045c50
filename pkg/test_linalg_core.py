"""
Tests des noyaux d'algèbre linéaire : quantités spectrales, pseudo-inverse,
racine carrée symétrique et solveur de Lyapunov par doublement.
"""

import numpy as np
import pytest
import scipy.linalg

from conftest import random_psd, random_stable
from src.cli.config import jordan
from src.core.errors import DimensionMismatchError, NonFiniteError, NotPSDError, UnstableMatrixError
from src.core.linalg_core import (
    as_matrix, check_symmetric_psd, max_eigenvalue, min_eigenpair, pseudo_inverse, solve_discrete_lyapunov,
    spectral_norm, spectral_radius, sym_sqrt
)


class TestValidation:
    """Conversion et contrôle des matrices"""

    def test_scalar_becomes_1x1(self):
        assert as_matrix(0.8).shape == (1, 1)

    def test_rejects_nan(self):
        with pytest.raises(NonFiniteError):
            as_matrix([[1.0, np.nan]])

    def test_rejects_vector(self):
        with pytest.raises(DimensionMismatchError):
            as_matrix([1.0, 2.0])

    def test_asymmetric_is_not_psd(self):
        with pytest.raises(NotPSDError):
            check_symmetric_psd([[1.0, 0.5], [0.0, 1.0]])

    def test_negative_definite_is_not_psd(self):
        with pytest.raises(NotPSDError) as exc:
            check_symmetric_psd(np.diag([1.0, -1.0]))
        assert exc.value.min_eigenvalue == pytest.approx(-1.0)


class TestSpectral:
    """Rayon spectral et norme spectrale"""

    def test_radius_zero_matrix(self):
        assert spectral_radius(np.zeros((4, 4))) == 0.0

    def test_radius_jordan(self):
        assert spectral_radius(jordan(4, 0.8)) == pytest.approx(0.8, abs=1e-3)

    def test_radius_complex_pair(self):
        assert spectral_radius([[0.0, 1.0], [-0.25, 0.0]]) == pytest.approx(0.5, abs=1e-12)

    def test_radius_requires_square(self):
        with pytest.raises(DimensionMismatchError):
            spectral_radius(np.zeros((2, 3)))

    def test_norm_examples(self):
        assert spectral_norm(np.eye(3)) == pytest.approx(1.0)
        assert spectral_norm(np.diag([2.0, -3.0])) == pytest.approx(3.0)
        assert spectral_norm([[1.0, 1.0], [0.0, 1.0]]) == pytest.approx((1 + np.sqrt(5)) / 2, rel=1e-12)

    def test_norm_dominates_radius(self, rng):
        for _ in range(50):
            A = rng.standard_normal((4, 4))
            assert spectral_norm(A) >= spectral_radius(A) - 1e-12

    def test_min_eigenpair_sign_is_canonical(self):
        _, v = min_eigenpair(np.diag([3.0, 1.0]))
        assert v[np.flatnonzero(np.abs(v) > 1e-12)[0]] > 0

    def test_min_eigenpair_tie_takes_lexicographic_vector(self):
        # sous-espace propre minimal engendré par (1, 1, 0) et (0, 0, 1)
        u = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
        value, v = min_eigenpair(np.eye(3) + 2.0 * np.outer(u, u))
        assert value == pytest.approx(1.0)
        np.testing.assert_allclose(v, np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0), atol=1e-12)

    def test_min_eigenpair_tie_is_basis_independent(self, rng):
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        S = Q @ np.diag([0.5, 0.5, 2.0, 3.0]) @ Q.T
        _, v = min_eigenpair(S)
        _, w = min_eigenpair(S.T.copy())
        projector = Q[:, :2] @ Q[:, :2].T
        np.testing.assert_allclose(v, projector[:, 0] / np.linalg.norm(projector[:, 0]), atol=1e-10)
        np.testing.assert_allclose(v, w, atol=1e-12)

    def test_max_eigenvalue(self):
        assert max_eigenvalue(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(3.0)


class TestPseudoInverse:
    """Inverse de Moore-Penrose"""

    def test_diagonal_rank_deficient(self):
        np.testing.assert_allclose(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_identity(self):
        np.testing.assert_allclose(pseudo_inverse(np.eye(3)), np.eye(3))

    def test_zero_matrix(self):
        np.testing.assert_array_equal(pseudo_inverse(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_full_rank_residual(self, rng):
        S = random_psd(rng, 4) + 0.1 * np.eye(4)
        assert spectral_norm(S @ pseudo_inverse(S) - np.eye(4)) <= 1e-8

    def test_idempotence(self, rng):
        for _ in range(20):
            S = random_psd(rng, 4) + 0.1 * np.eye(4)
            np.testing.assert_allclose(pseudo_inverse(pseudo_inverse(S)), S, rtol=1e-8, atol=1e-8 * spectral_norm(S))


class TestSymSqrt:
    """Racine carrée symétrique"""

    def test_examples(self):
        np.testing.assert_allclose(sym_sqrt(np.eye(3)), np.eye(3))
        np.testing.assert_allclose(sym_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_consistency(self, rng):
        for _ in range(20):
            S = random_psd(rng, 4)
            R = sym_sqrt(S)
            assert spectral_norm(R @ R.T - S) <= 1e-9 * spectral_norm(S)

    def test_clips_round_off(self):
        S = np.diag([1.0, -1e-12])
        np.testing.assert_allclose(sym_sqrt(S), np.diag([1.0, 0.0]), atol=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(NotPSDError):
            sym_sqrt(np.diag([1.0, -0.1]))


class TestLyapunov:
    """Solveur de Lyapunov discret par doublement"""

    def test_zero_dynamics(self):
        np.testing.assert_allclose(solve_discrete_lyapunov(np.zeros((3, 3)), np.eye(3)), np.eye(3))

    def test_scalar_geometric_series(self):
        P = solve_discrete_lyapunov([[0.8]], [[1.0]])
        assert P[0, 0] == pytest.approx(1.0 / (1.0 - 0.64), rel=1e-12)

    def test_jordan_matches_truncated_series(self):
        A = jordan(4, 0.8)
        expected = np.zeros((4, 4))
        power = np.eye(4)
        for _ in range(201):
            expected += power @ power.T
            power = A @ power
        P = solve_discrete_lyapunov(A, np.eye(4))
        assert np.max(np.abs(P - expected)) <= 1e-9 * max(1.0, spectral_norm(P))

    def test_residual_on_random_systems(self, rng):
        for _ in range(100):
            A = random_stable(rng, 4)
            Q = random_psd(rng, 4)
            P = solve_discrete_lyapunov(A, Q)
            residual = spectral_norm(P - A @ P @ A.T - Q)
            assert residual <= 1e-10 * max(1.0, spectral_norm(P))

    def test_matches_scipy_solver(self, rng):
        for _ in range(10):
            A = random_stable(rng, 3)
            Q = random_psd(rng, 3)
            expected = scipy.linalg.solve_discrete_lyapunov(A, Q)
            np.testing.assert_allclose(solve_discrete_lyapunov(A, Q), expected, rtol=1e-8, atol=1e-10)

    def test_unstable_rejected(self):
        with pytest.raises(UnstableMatrixError) as exc:
            solve_discrete_lyapunov(np.diag([1.0, 0.5]), np.eye(2))
        assert exc.value.spectral_radius == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            solve_discrete_lyapunov(np.eye(2) * 0.5, np.eye(3))
