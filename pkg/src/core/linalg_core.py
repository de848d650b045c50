"""
Noyaux d'algèbre linéaire dense partagés par tous les modules :
rayon spectral, norme spectrale, pseudo-inverse, racine carrée symétrique
et solveur de Lyapunov discret par doublement.
"""

import logging

import numpy as np
import numpy.typing as npt
import scipy.linalg

from src.core.errors import (
    ConvergenceError, DimensionMismatchError, NonFiniteError, NotPSDError, UnstableMatrixError
)

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]
SymmetricPSD = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]

PINV_REL_TOL = 1e-10
SQRT_CLIP_TOL = 1e-8
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
LYAPUNOV_MAX_ITER = 200
LYAPUNOV_RESIDUAL_TOL = 1e-10
EIGEN_TIE_TOL = 1e-12


# ──────────────────────────────────────────────────────────────────────────────
# Validation
# ──────────────────────────────────────────────────────────────────────────────

def as_matrix(data, name: str = "matrice") -> Matrix:
    """Convertit en tableau float64 2-D et vérifie la finitude des entrées"""
    arr = np.array(data, dtype=np.float64)
    if arr.size == 1 and arr.ndim < 2:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} doit être 2-D, reçu ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contient des valeurs NaN ou infinies")
    return arr


def as_square(data, name: str = "A") -> Matrix:
    arr = as_matrix(data, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{name} doit être carrée, forme {arr.shape}")
    return arr


def symmetrize(S: Matrix) -> Matrix:
    return 0.5 * (S + S.T)


def check_symmetric_psd(S, name: str = "S") -> SymmetricPSD:
    """Vérifie la symétrie et la semi-définie positivité numériques"""
    S = as_square(S, name)
    scale = max(1.0, spectral_norm(S))
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise NotPSDError(f"{name} n'est pas symétrique", float("nan"))
    lam_min = min_eigenvalue(S)
    if lam_min < -PSD_TOL * scale:
        raise NotPSDError(f"{name} n'est pas semi-définie positive", lam_min)
    return symmetrize(S)


# ──────────────────────────────────────────────────────────────────────────────
# Quantités spectrales
# ──────────────────────────────────────────────────────────────────────────────

def spectral_radius(A) -> float:
    """max |λ_i(A)| via une décomposition propre complète"""
    A = as_square(A)
    if A.size == 0:
        return 0.0
    try:
        eigenvalues = scipy.linalg.eigvals(A)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"Échec du calcul des valeurs propres : {e}", 0, float("nan"))
    return float(np.max(np.abs(eigenvalues)))


def spectral_norm(A) -> float:
    """Plus grande valeur singulière"""
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(A)[0])


def min_eigenvalue(S: Matrix) -> float:
    return float(np.linalg.eigvalsh(symmetrize(S))[0])


def max_eigenvalue(S: Matrix) -> float:
    return float(np.linalg.eigvalsh(symmetrize(S))[-1])


def min_eigenpair(S: Matrix, tie_tol: float = EIGEN_TIE_TOL) -> tuple[float, Vector]:
    """
    Plus petite valeur propre et vecteur propre unitaire. Si elle est multiple
    (écart relatif ≤ tie_tol), le vecteur retenu est le vecteur unitaire
    lexicographiquement maximal du sous-espace propre : projection normalisée
    du premier vecteur de base non orthogonal au sous-espace.
    """
    eigenvalues, eigenvectors = np.linalg.eigh(symmetrize(S))
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    cluster = eigenvectors[:, eigenvalues <= eigenvalues[0] + tie_tol * scale]
    if cluster.shape[1] == 1:
        return float(eigenvalues[0]), _canonical_sign(cluster[:, 0])
    projector = cluster @ cluster.T
    first = int(np.flatnonzero(np.diag(projector) > 1e-12)[0])
    return float(eigenvalues[0]), projector[:, first] / np.linalg.norm(projector[:, first])


def max_eigenpair(S: Matrix) -> tuple[float, Vector]:
    eigenvalues, eigenvectors = np.linalg.eigh(symmetrize(S))
    return float(eigenvalues[-1]), _canonical_sign(eigenvectors[:, -1])


def _canonical_sign(v: Vector) -> Vector:
    nonzero = np.flatnonzero(np.abs(v) > 1e-12)
    if nonzero.size and v[nonzero[0]] < 0:
        return -v
    return v


# ──────────────────────────────────────────────────────────────────────────────
# Pseudo-inverse et racine carrée
# ──────────────────────────────────────────────────────────────────────────────

def pseudo_inverse(M, rel_tol: float = PINV_REL_TOL) -> SymmetricPSD:
    """
    Inverse de Moore-Penrose d'une matrice symétrique semi-définie positive
    par décomposition propre. Les valeurs propres sous rel_tol·λ_max sont nulles.
    """
    M = as_square(M, "M")
    eigenvalues, eigenvectors = np.linalg.eigh(symmetrize(M))
    lam_max = eigenvalues[-1] if eigenvalues.size else 0.0
    if lam_max <= 0.0:
        return np.zeros_like(M)
    keep = eigenvalues > rel_tol * lam_max
    inv = np.zeros_like(eigenvalues)
    inv[keep] = 1.0 / eigenvalues[keep]
    return symmetrize((eigenvectors * inv) @ eigenvectors.T)


def numerical_rank(M, rel_tol: float = PINV_REL_TOL) -> int:
    eigenvalues = np.linalg.eigvalsh(symmetrize(as_square(M, "M")))
    lam_max = eigenvalues[-1] if eigenvalues.size else 0.0
    if lam_max <= 0.0:
        return 0
    return int(np.count_nonzero(eigenvalues > rel_tol * lam_max))


def sym_sqrt(S, clip_tol: float = SQRT_CLIP_TOL) -> Matrix:
    """Racine carrée symétrique ; les valeurs propres légèrement négatives sont ramenées à 0"""
    S = as_square(S, "S")
    eigenvalues, eigenvectors = np.linalg.eigh(symmetrize(S))
    scale = float(np.max(np.abs(eigenvalues), initial=0.0))
    if eigenvalues.size and eigenvalues[0] < -clip_tol * scale:
        raise NotPSDError("Racine carrée d'une matrice non semi-définie positive", float(eigenvalues[0]))
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return symmetrize((eigenvectors * roots) @ eigenvectors.T)


# ──────────────────────────────────────────────────────────────────────────────
# Équation de Lyapunov discrète
# ──────────────────────────────────────────────────────────────────────────────

def solve_discrete_lyapunov(A, Q, max_iter: int = LYAPUNOV_MAX_ITER) -> SymmetricPSD:
    """
    Résout P = A P Aᵀ + Q pour A stable par l'itération de doublement
    P ← P + A_k P A_kᵀ, A_k ← A_k², soit P_k = Σ_{s<2^k} A^s Q (A^s)ᵀ.
    """
    A = as_square(A, "A")
    Q = as_square(Q, "Q")
    if Q.shape != A.shape:
        raise DimensionMismatchError(f"Q de forme {Q.shape} incompatible avec A {A.shape}")
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise UnstableMatrixError(rho)

    P = symmetrize(Q)
    A_k = A.copy()
    iterations = 0
    for iterations in range(1, max_iter + 1):
        increment = A_k @ P @ A_k.T
        P = P + increment
        A_k = A_k @ A_k
        p_norm = np.linalg.norm(P, ord="fro")
        if np.linalg.norm(increment, ord="fro") <= np.finfo(float).eps * p_norm or not np.any(A_k):
            break
    P = symmetrize(P)

    residual = spectral_norm(P - A @ P @ A.T - Q)
    if residual > LYAPUNOV_RESIDUAL_TOL * max(1.0, spectral_norm(P)):
        logger.warning(f"Lyapunov : résidu {residual:.3e} après {iterations} itérations de doublement")
        raise ConvergenceError("Le solveur de Lyapunov n'a pas convergé", iterations, residual)
    logger.debug(f"Lyapunov résolu en {iterations} itérations (résidu {residual:.2e})")
    return P
