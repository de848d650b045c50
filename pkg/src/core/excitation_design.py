"""
Conception de la covariance d'excitation :
    max_{U ⪰ 0, tr(U) ≤ ū} λ_min(Γ_∞(A) + Ξ_∞(A, U))
par Frank-Wolfe certifié par un point intérieur de barrière logarithmique,
projection stable Π sur Θ_d et bornes de sensibilité.
"""

import logging
from typing import Optional

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import HypothesisViolationError, UnstableMatrixError
from src.core.gramian import gramian_infinite, xi_infinite
from src.core.linalg_core import (
    Matrix, SymmetricPSD, as_matrix, as_square, max_eigenpair, max_eigenvalue, min_eigenpair,
    min_eigenvalue, solve_discrete_lyapunov, spectral_norm, spectral_radius, symmetrize
)
from src.util.config.setting import settings

logger = logging.getLogger(__name__)

INTERIOR_CANDIDATE_AFTER = 500
BARRIER_SHRINK = 0.1
BARRIER_FLOOR = 1e-11
NEWTON_MAX_STEPS = 100
NEWTON_TOL = 1e-10


# ──────────────────────────────────────────────────────────────────────────────
# Types du domaine
# ──────────────────────────────────────────────────────────────────────────────

class DesignResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    U_star: SymmetricPSD
    objective: float          # J = λ_min(Γ_∞ + Ξ_∞(A, U_star))
    upper_bound: float        # majorant dual de l'optimum
    fw_gap: float             # certificat : optimum - objective ≤ fw_gap
    iterations: int
    trace_used: float
    tol: float
    converged: bool


class ProjectionConfig(BaseModel):
    d: float = Field(default_factory=lambda: settings.DEFAULT_STABILITY_MARGIN, gt=0, lt=1)


# ──────────────────────────────────────────────────────────────────────────────
# Objectif et sur-gradient
# ──────────────────────────────────────────────────────────────────────────────

def design_objective(A, B, U) -> float:
    """J_A(U) = λ_min(Γ_∞(A) + Ξ_∞(A, U))"""
    return min_eigenvalue(gramian_infinite(A) + xi_infinite(A, B, U))


def isotropic_covariance(n_u: int, u_bar: float) -> SymmetricPSD:
    return (u_bar / n_u) * np.eye(n_u)


def supergradient(A, B, W) -> Matrix:
    """
    G = Bᵀ Φ(W) B où Φ résout l'équation transposée Φ = Aᵀ Φ A + W.
    Forme de référence de _grad, qui passe par le tenseur input_responses.
    """
    A = as_square(A, "A")
    B = as_matrix(B, "B")
    return symmetrize(B.T @ solve_discrete_lyapunov(A.T, symmetrize(W)) @ B)


def input_responses(A, B) -> np.ndarray:
    """
    R[i, j] = Ξ_∞(A, (E_ij + E_ji)/2). Ξ_∞(A, U) = Σ_ij U_ij R[i, j] pour U symétrique,
    et G_ij = ⟨W, R[i, j]⟩ redonne Bᵀ Φ(W) B.
    """
    A = as_square(A, "A")
    B = as_matrix(B, "B")
    n_u = B.shape[1]
    n_x = A.shape[0]
    responses = np.zeros((n_u, n_u, n_x, n_x))
    for i in range(n_u):
        for j in range(i, n_u):
            basis = np.zeros((n_u, n_u))
            basis[i, j] += 0.5
            basis[j, i] += 0.5
            responses[i, j] = responses[j, i] = xi_infinite(A, B, basis)
    return responses


def _xi(U: Matrix, responses: np.ndarray) -> Matrix:
    return np.einsum("ij,ijkl->kl", U, responses)


def _grad(W: Matrix, responses: np.ndarray) -> Matrix:
    return symmetrize(np.einsum("kl,ijkl->ij", W, responses))


# ──────────────────────────────────────────────────────────────────────────────
# Majorant dual et point intérieur
# ──────────────────────────────────────────────────────────────────────────────

class InteriorPoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    U: SymmetricPSD
    value: float              # J(U)
    upper_bound: float        # dual_bound(W) pour W = μ Z⁻¹ normalisé
    barrier: float            # μ final
    newton_steps: int


def dual_bound(W: SymmetricPSD, gamma_inf: SymmetricPSD, responses: np.ndarray, u_bar: float) -> float:
    """⟨W, Γ_∞⟩ + ū max(λ_max(G_W), 0) : majorant de l'optimum pour tout W ⪰ 0 de trace 1"""
    return float(np.sum(W * gamma_inf)) + u_bar * max(max_eigenvalue(_grad(W, responses)), 0.0)


def _symmetric_basis(n_u: int) -> np.ndarray:
    """Base orthonormée des matrices symétriques n_u×n_u (diagonale d'abord)"""
    basis = [np.diag(np.eye(n_u)[i]) for i in range(n_u)]
    for i in range(n_u):
        for j in range(i + 1, n_u):
            D = np.zeros((n_u, n_u))
            D[i, j] = D[j, i] = np.sqrt(0.5)
            basis.append(D)
    return np.array(basis)


def interior_point(
    gamma_inf: SymmetricPSD,
    responses: np.ndarray,
    u_bar: float,
    tol: float,
) -> Optional[InteriorPoint]:
    """
    Chemin central de la barrière logarithmique de
        max t  s.c.  Z = Γ_∞ + Ξ_∞(U) - t I ⪰ 0,  U ⪰ 0,  tr(U) ≤ ū,
    suivi par Newton amorti. Au point central de paramètre μ, W = μ Z⁻¹ est de
    trace 1 et l'écart entre dual_bound(W) et J(U) est au plus μ (n_x + n_u + 1).
    Renvoie None si l'algèbre linéaire échoue.
    """
    n_x = gamma_inf.shape[0]
    n_u = responses.shape[0]
    basis = _symmetric_basis(n_u)
    d_Z = np.concatenate([-np.eye(n_x)[None], np.array([_xi(D, responses) for D in basis])])
    d_U = np.concatenate([np.zeros((1, n_u, n_u)), basis])
    d_s = np.concatenate([[0.0], -np.trace(basis, axis1=1, axis2=2)])
    nu = n_x + n_u + 1

    def unpack(x):
        return gamma_inf + np.einsum("q,qij->ij", x, d_Z), np.einsum("q,qij->ij", x, d_U), u_bar + x @ d_s

    def potential(x, mu) -> float:
        Z, U, s = unpack(x)
        if s <= 0 or np.linalg.eigvalsh(Z)[0] <= 0 or np.linalg.eigvalsh(U)[0] <= 0:
            return -np.inf
        return x[0] / mu + np.linalg.slogdet(Z)[1] + np.linalg.slogdet(U)[1] + np.log(s)

    x = np.zeros(len(d_s))
    x[1:1 + n_u] = u_bar / (2 * n_u)
    Z0, _, _ = unpack(x)
    x[0] = min_eigenvalue(Z0) - 1.0
    scale = max(1.0, spectral_norm(gamma_inf))
    target = max(tol / (10.0 * nu), BARRIER_FLOOR * scale)
    mu = scale
    newton_steps = 0
    try:
        while True:
            for _ in range(NEWTON_MAX_STEPS):
                Z, U, s = unpack(x)
                dz = np.linalg.inv(Z) @ d_Z
                du = np.linalg.inv(U) @ d_U
                grad = np.trace(dz, axis1=1, axis2=2) + np.trace(du, axis1=1, axis2=2) + d_s / s
                grad[0] += 1.0 / mu
                curvature = (
                    np.einsum("qij,rji->qr", dz, dz) + np.einsum("qij,rji->qr", du, du) + np.outer(d_s, d_s) / s ** 2
                )
                step = scipy.linalg.solve(curvature, grad, assume_a="pos")
                decrement = float(grad @ step)
                newton_steps += 1
                if decrement <= NEWTON_TOL:
                    break
                current = potential(x, mu)
                alpha = 1.0
                while potential(x + alpha * step, mu) < current + 0.25 * alpha * decrement:
                    alpha *= 0.5
                    if alpha < 1e-12:
                        break
                if alpha < 1e-12:
                    break
                x = x + alpha * step
            if mu <= target:
                break
            mu = max(mu * BARRIER_SHRINK, target)
    except np.linalg.LinAlgError as e:
        logger.warning(f"Point intérieur abandonné : {e}")
        return None

    Z, U, _ = unpack(x)
    W = symmetrize(mu * np.linalg.inv(Z))
    W /= np.trace(W)
    U = symmetrize(U)
    value = min_eigenvalue(gamma_inf + _xi(U, responses))
    upper = dual_bound(W, gamma_inf, responses, u_bar)
    if not np.isfinite(value) or not np.isfinite(upper):
        logger.warning("Point intérieur non fini, certificat ignoré")
        return None
    logger.debug(f"Point intérieur : μ = {mu:.2e}, J = {value:.9g}, majorant {upper:.9g}, {newton_steps} pas de Newton")
    return InteriorPoint(U=U, value=value, upper_bound=upper, barrier=mu, newton_steps=newton_steps)


# ──────────────────────────────────────────────────────────────────────────────
# Frank-Wolfe
# ──────────────────────────────────────────────────────────────────────────────

def default_tol(gamma_inf: SymmetricPSD) -> float:
    return 1e-6 * (1.0 + min_eigenvalue(gamma_inf))


def design_covariance(
    A,
    B,
    u_bar: float,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> DesignResult:
    """
    Montée de Frank-Wolfe sur U ↦ λ_min(Γ_∞ + Ξ_∞(A, U)) sur {U ⪰ 0, tr(U) ≤ ū}.

    À l'itéré U_k : v vecteur propre minimal de P(U_k), sur-gradient G = Bᵀ Φ(vvᵀ) B,
    oracle linéaire S_k = ū qqᵀ (q vecteur propre maximal de G, ou 0 si λ_max(G) ≤ 0),
    pas 2/(k+2). Le majorant de l'optimum est le meilleur de value + écart FW,
    de dual_bound sur la moyenne courante des vvᵀ et de dual_bound au point
    intérieur. Aux égalités de valeurs propres la montée peut plafonner : après
    INTERIOR_CANDIDATE_AFTER itérations, le point intérieur devient candidat.
    L'arrêt a lieu quand l'écart entre le majorant et le meilleur candidat passe sous tol.
    """
    A = as_square(A, "A")
    B = as_matrix(B, "B")
    if u_bar < 0:
        raise ValueError("ū doit être positif ou nul")
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise UnstableMatrixError(rho)
    max_iter = max_iter or settings.DESIGN_MAX_ITER
    n_u = B.shape[1]

    gamma_inf = gramian_infinite(A)
    tol = default_tol(gamma_inf) if tol is None else tol
    if tol <= 0:
        raise ValueError("tol doit être strictement positif")
    responses = input_responses(A, B)

    if u_bar == 0.0 or not np.any(responses):
        objective = min_eigenvalue(gamma_inf)
        return DesignResult(
            U_star=np.zeros((n_u, n_u)), objective=objective, upper_bound=objective,
            fw_gap=0.0, iterations=0, trace_used=0.0, tol=tol, converged=True,
        )

    certificate = interior_point(gamma_inf, responses, u_bar, tol)
    upper = certificate.upper_bound if certificate is not None else np.inf
    candidate_at = min(INTERIOR_CANDIDATE_AFTER, max_iter)

    U = isotropic_covariance(n_u, u_bar)
    best_value, best_U = -np.inf, U
    W_avg = np.zeros_like(gamma_inf)
    converged = False
    iterations = 0
    for k in range(max_iter):
        iterations = k + 1
        value, v = min_eigenpair(gamma_inf + _xi(U, responses))
        W = np.outer(v, v)
        G = _grad(W, responses)
        g_max, q = max_eigenpair(G)
        S = u_bar * np.outer(q, q) if g_max > 0 else np.zeros_like(U)
        gap = float(np.sum(G * (S - U)))

        if value > best_value:
            best_value, best_U = value, U
        if iterations == candidate_at and certificate is not None and certificate.value > best_value:
            logger.info(f"Frank-Wolfe : point intérieur retenu après {iterations} itérations")
            best_value, best_U = certificate.value, certificate.U
        step = 2.0 / (k + 2)
        W_avg = (1.0 - step) * W_avg + step * W
        upper = min(upper, value + gap, dual_bound(W_avg, gamma_inf, responses, u_bar))

        if upper - best_value <= tol:
            converged = True
            break
        U = symmetrize((1.0 - step) * U + step * S)

    objective = design_objective(A, B, best_U)
    fw_gap = max(upper - objective, 0.0)
    if converged:
        logger.info(f"Conception convergée en {iterations} itérations : J = {objective:.6g}, écart {fw_gap:.2e}")
    else:
        logger.warning(f"Frank-Wolfe non convergé après {iterations} itérations : écart {fw_gap:.2e} > tol {tol:.2e}")
    return DesignResult(
        U_star=best_U, objective=objective, upper_bound=upper, fw_gap=fw_gap, iterations=iterations,
        trace_used=float(np.trace(best_U)), tol=tol, converged=converged,
    )


# ──────────────────────────────────────────────────────────────────────────────
# Projection stable
# ──────────────────────────────────────────────────────────────────────────────

def project_stable(A_hat, cfg: ProjectionConfig) -> Matrix:
    """Π : Â inchangée si ρ(Â) < 1, sinon mise à l'échelle vers le rayon 1 - d"""
    A_hat = as_square(A_hat, "A_hat")
    rho = spectral_radius(A_hat)
    if rho < 1.0:
        return A_hat
    logger.info(f"Projection stable : ρ(Â) = {rho:.4f} ramené à {1.0 - cfg.d:.4f}")
    return ((1.0 - cfg.d) / rho) * A_hat


# ──────────────────────────────────────────────────────────────────────────────
# Sensibilité aux perturbations
# ──────────────────────────────────────────────────────────────────────────────

def admissible_perturbation_radius(A) -> float:
    """‖Γ_∞(A)‖^{-3/2} / 4"""
    return spectral_norm(gramian_infinite(A)) ** -1.5 / 4.0


def _sensitivity(A, B, u_bar: float, delta_norm: float, factor: float) -> float:
    B = as_matrix(B, "B")
    gamma_norm = spectral_norm(gramian_infinite(A))
    radius = gamma_norm ** -1.5 / 4.0
    if delta_norm < 0:
        raise ValueError("‖Δ‖ doit être positif ou nul")
    if delta_norm > radius:
        raise HypothesisViolationError(f"‖Δ‖ = {delta_norm:.6g} hors du domaine de validité", radius)
    return factor * (1.0 + spectral_norm(B) ** 2 * u_bar) * delta_norm * gamma_norm ** 3


def perturbation_bound(A, B, u_bar: float, delta_norm: float) -> float:
    """J_A(U*(A)) - J_A(U*(A+Δ)) ≤ 64 (1 + ‖B‖² ū) ‖Δ‖ ‖Γ_∞(A)‖³"""
    return _sensitivity(A, B, u_bar, delta_norm, 64.0)


def gramian_perturbation_bound(A, B, u_bar: float, delta_norm: float) -> float:
    """‖Γ_s(A+Δ) + Ξ_s(A+Δ, {U_k}) - (Γ_s(A) + Ξ_s(A, {U_k}))‖ ≤ 32 (1 + ‖B‖² ū) ‖Δ‖ ‖Γ_∞(A)‖³"""
    return _sensitivity(A, B, u_bar, delta_norm, 32.0)
