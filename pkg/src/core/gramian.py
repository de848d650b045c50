"""
Gramiens d'atteignabilité à horizon fini et infini, récursion de covariance
Σ_{s+1} = A Σ_s Aᵀ + B U_s Bᵀ + I et constantes dérivées (γ, γ̄).
"""

import logging
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.errors import DimensionMismatchError, UnstableMatrixError
from src.core.linalg_core import (
    Matrix, SymmetricPSD, as_matrix, as_square, min_eigenvalue, solve_discrete_lyapunov,
    spectral_norm, spectral_radius, symmetrize
)

logger = logging.getLogger(__name__)

CovarianceInput = Union[Matrix, Sequence[Matrix]]

SIGMA_STORAGE_LIMIT = 100_000
NORM_SERIES_TOL = 1e-12
NORM_SERIES_MAX_TERMS = 1_000_000


class GramianSummary(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gamma_inf: SymmetricPSD
    xi_inf: SymmetricPSD
    gamma_contraction: float
    gamma_bar: float


class SigmaRecursion(BaseModel):
    """Résultat de la récursion : Σ_1 … Σ_horizon (si conservés) et leur somme"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    horizon: int
    sigmas: Optional[list[SymmetricPSD]]
    total: SymmetricPSD

    def min_eig_of_sum(self) -> float:
        """λ_min(Σ_{s=1}^{horizon} Σ_s)"""
        return min_eigenvalue(self.total)


# ──────────────────────────────────────────────────────────────────────────────
# Séquences de covariances d'entrée
# ──────────────────────────────────────────────────────────────────────────────

def _covariance_sequence(U_seq: CovarianceInput, count: int, n_u: int) -> list[Matrix]:
    """Normalise une covariance constante ou une séquence en liste d'au moins `count` matrices"""
    arr = np.asarray(U_seq, dtype=np.float64)
    if arr.ndim <= 2:
        U = as_matrix(arr, "U")
        if U.shape != (n_u, n_u):
            raise DimensionMismatchError(f"U de forme {U.shape}, attendu {(n_u, n_u)}")
        return [U] * count
    if arr.ndim != 3 or arr.shape[1:] != (n_u, n_u):
        raise DimensionMismatchError(f"Séquence de covariances de forme {arr.shape}, attendu (k, {n_u}, {n_u})")
    if arr.shape[0] < count:
        raise DimensionMismatchError(f"Séquence de {arr.shape[0]} covariances, au moins {count} requises")
    return [arr[k] for k in range(count)]


def _check_pair(A, B) -> tuple[Matrix, Matrix]:
    A = as_square(A, "A")
    B = as_matrix(B, "B")
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatchError(f"B a {B.shape[0]} lignes, A est {A.shape[0]}×{A.shape[0]}")
    return A, B


# ──────────────────────────────────────────────────────────────────────────────
# Gramiens à horizon fini
# ──────────────────────────────────────────────────────────────────────────────

def gramian_finite(A, s: int) -> SymmetricPSD:
    """Γ_s(A) = Σ_{k=0}^{s-1} A^k (A^k)ᵀ, avec Γ_0 = 0"""
    A = as_square(A, "A")
    if s < 0:
        raise ValueError("s doit être positif ou nul")
    n = A.shape[0]
    gram = np.zeros((n, n))
    power = np.eye(n)
    for _ in range(s):
        gram += power @ power.T
        power = A @ power
    return symmetrize(gram)


def xi_finite(A, B, U_seq: CovarianceInput, s: int) -> SymmetricPSD:
    """Ξ_s(A, {U_k}) = Σ_{k=0}^{s-1} A^{s-1-k} B U_k Bᵀ (A^{s-1-k})ᵀ"""
    A, B = _check_pair(A, B)
    if s < 0:
        raise ValueError("s doit être positif ou nul")
    covariances = _covariance_sequence(U_seq, s, B.shape[1])
    xi = np.zeros_like(A)
    for k in range(s):
        xi = A @ xi @ A.T + B @ covariances[k] @ B.T
    return symmetrize(xi)


def gramian_sum_steps(A, B, U) -> Iterator[tuple[int, SymmetricPSD]]:
    """Produit (t, Σ_{s=1}^{t-1} (Γ_s(A) + Ξ_s(A, U))) pour t = 2, 3, ..."""
    A, B = _check_pair(A, B)
    U = _covariance_sequence(U, 1, B.shape[1])[0]
    n = A.shape[0]
    BUB = B @ U @ B.T
    total = np.zeros((n, n))
    gamma_s = np.zeros((n, n))
    xi_s = np.zeros((n, n))
    power = np.eye(n)
    t = 1
    while True:
        gamma_s = gamma_s + power @ power.T
        power = A @ power
        xi_s = A @ xi_s @ A.T + BUB
        total += gamma_s + xi_s
        t += 1
        yield t, total


def gramian_sum(A, B, U, t: int) -> SymmetricPSD:
    """Σ_{s=1}^{t-1} (Γ_s(A) + Ξ_s(A, U)) pour une covariance constante U"""
    A, B = _check_pair(A, B)
    if t < 2:
        return np.zeros_like(A)
    for step, total in gramian_sum_steps(A, B, U):
        if step == t:
            return symmetrize(total)


# ──────────────────────────────────────────────────────────────────────────────
# Gramiens à horizon infini
# ──────────────────────────────────────────────────────────────────────────────

def gramian_infinite(A) -> SymmetricPSD:
    """Γ_∞(A), solution de P = A P Aᵀ + I"""
    A = as_square(A, "A")
    return solve_discrete_lyapunov(A, np.eye(A.shape[0]))


def xi_infinite(A, B, U) -> SymmetricPSD:
    """Ξ_∞(A, U), solution de P = A P Aᵀ + B U Bᵀ"""
    A, B = _check_pair(A, B)
    U = _covariance_sequence(U, 1, B.shape[1])[0]
    return solve_discrete_lyapunov(A, symmetrize(B @ U @ B.T))


def gamma_contraction(A) -> float:
    """γ := 1 - ‖Γ_∞(A)‖⁻¹"""
    return 1.0 - 1.0 / spectral_norm(gramian_infinite(A))


# ──────────────────────────────────────────────────────────────────────────────
# Récursion de covariance
# ──────────────────────────────────────────────────────────────────────────────

def sigma_recursion(A, B, U_seq: CovarianceInput, horizon: int) -> SigmaRecursion:
    """Σ_{s+1} = A Σ_s Aᵀ + B U_s Bᵀ + I depuis Σ_0 = 0 ; renvoie Σ_1 … Σ_horizon"""
    A, B = _check_pair(A, B)
    if horizon < 1:
        raise ValueError("horizon doit être ≥ 1")
    covariances = _covariance_sequence(U_seq, horizon, B.shape[1])
    n = A.shape[0]
    keep = horizon <= SIGMA_STORAGE_LIMIT
    identity = np.eye(n)
    sigma = np.zeros((n, n))
    total = np.zeros((n, n))
    sigmas: list[Matrix] = []
    for s in range(horizon):
        sigma = symmetrize(A @ sigma @ A.T + B @ covariances[s] @ B.T + identity)
        total += sigma
        if keep:
            sigmas.append(sigma)
    if not keep:
        logger.debug(f"Horizon {horizon} > {SIGMA_STORAGE_LIMIT} : seule la somme courante est conservée")
    return SigmaRecursion(horizon=horizon, sigmas=sigmas if keep else None, total=symmetrize(total))


def finite_horizon_objective(A, B, U_seq: CovarianceInput, tau: int) -> float:
    """λ_min(Σ_{s=1}^{τ-1} Σ_s), objectif du problème de conception à horizon fini"""
    if tau < 2:
        raise ValueError("tau doit être ≥ 2")
    return sigma_recursion(A, B, U_seq, tau - 1).min_eig_of_sum()


# ──────────────────────────────────────────────────────────────────────────────
# γ̄
# ──────────────────────────────────────────────────────────────────────────────

def norm_series(A) -> float:
    """
    Majorant certifié de Σ_{s≥0} ‖A^s‖ : somme tronquée quand ‖A^s‖ < 1e-12,
    plus le plus petit de deux restes géométriques certifiés.
    """
    A = as_square(A, "A")
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise UnstableMatrixError(rho)
    n = A.shape[0]
    power = np.eye(n)
    partial = 0.0
    term = 1.0
    k = 0
    while k < NORM_SERIES_MAX_TERMS:
        term = spectral_norm(power)
        if term < NORM_SERIES_TOL and k > 0:
            break
        partial += term
        power = A @ power
        k += 1

    # ‖A^k‖ ≤ γ^{k/2} / (1-γ)^{1/2}
    gamma = gamma_contraction(A)
    root = np.sqrt(max(gamma, 0.0))
    tail = root ** k / (np.sqrt(1.0 - gamma) * (1.0 - root))
    # sous-multiplicativité : Σ_{j≥k} ‖A^j‖ ≤ ‖A^k‖ · Σ_{m≥0} ‖A^m‖
    if term < 1.0:
        tail = min(tail, partial * term / (1.0 - term))
    return partial + tail


def gamma_bar(A, B, u_bar: float) -> float:
    """γ̄ := (1 + ‖B‖² ū) (Σ_{s≥0} ‖A^s‖)²"""
    A, B = _check_pair(A, B)
    return (1.0 + spectral_norm(B) ** 2 * u_bar) * norm_series(A) ** 2


def summarize_gramians(A, B, U, u_bar: float) -> GramianSummary:
    gamma_inf = gramian_infinite(A)
    return GramianSummary(
        gamma_inf=gamma_inf,
        xi_inf=xi_infinite(A, B, U),
        gamma_contraction=1.0 - 1.0 / spectral_norm(gamma_inf),
        gamma_bar=gamma_bar(A, B, u_bar),
    )
