"""
Estimateur des moindres carrés de A sur une fenêtre de trajectoire,
accumulateurs incrémentaux et identité d'erreur Â - A = Wᵀ X (Xᵀ X)^†.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.errors import DimensionMismatchError, EmptyWindowError
from src.core.linalg_core import (
    Matrix, SymmetricPSD, as_matrix, numerical_rank, pseudo_inverse, spectral_norm, symmetrize
)
from src.core.simulator import Trajectory

logger = logging.getLogger(__name__)


class LseResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A_hat: Matrix
    window: tuple[int, int]
    gram: SymmetricPSD
    rank: int
    rank_deficient: bool


def _solve(cross: Matrix, gram: SymmetricPSD) -> tuple[Matrix, int]:
    """Â = (Σ (x_{s+1} - B u_s) x_sᵀ)(Σ x_s x_sᵀ)^†"""
    return cross @ pseudo_inverse(gram), numerical_rank(gram)


def _window_data(traj: Trajectory, B, window: tuple[int, int]) -> tuple[Matrix, Matrix]:
    start, end = window
    if end - start < 1:
        raise EmptyWindowError(f"Fenêtre vide : {window}")
    if start < 0 or end > traj.horizon:
        raise EmptyWindowError(f"Fenêtre {window} hors de la trajectoire [0, {traj.horizon}]")
    B = as_matrix(B, "B")
    if B.shape != (traj.states.shape[1], traj.inputs.shape[1]):
        raise DimensionMismatchError(f"B de forme {B.shape} incompatible avec la trajectoire")
    X = traj.states[start:end]
    Y = traj.next_states()[start:end] - traj.inputs[start:end] @ B.T
    return X, Y


def lse(traj: Trajectory, B, window: Optional[tuple[int, int]] = None) -> LseResult:
    """
    Moindres carrés sur les paires s ∈ [start, end) : régression de x_{s+1} - B u_s sur x_s.
    La fenêtre (0, t) donne Â_t ; x_0 = 0 rend équivalents les départs s = 0 et s = 1.
    """
    window = window or (0, traj.horizon)
    X, Y = _window_data(traj, B, window)
    gram = symmetrize(X.T @ X)
    A_hat, rank = _solve(Y.T @ X, gram)
    n_x = X.shape[1]
    if rank < n_x:
        logger.warning(f"Matrice de Gram de rang {rank} < {n_x} sur la fenêtre {window}")
    return LseResult(A_hat=A_hat, window=tuple(window), gram=gram, rank=rank, rank_deficient=rank < n_x)


def lse_path(traj: Trajectory, B, start: int, ends: Sequence[int]) -> list[LseResult]:
    """Â sur les fenêtres (start, end) pour chaque end ; Gram et produit croisé accumulés par segments"""
    ends = [int(e) for e in ends]
    if not ends:
        return []
    for end in ends:
        if end - start < 1:
            raise EmptyWindowError(f"Fenêtre vide : {(start, end)}")
    X, Y = _window_data(traj, B, (start, max(ends)))
    n_x = X.shape[1]
    gram = np.zeros((n_x, n_x))
    cross = np.zeros((n_x, n_x))
    by_end = {}
    cursor = 0
    for end in sorted(set(ends)):
        stop = end - start
        gram += X[cursor:stop].T @ X[cursor:stop]
        cross += Y[cursor:stop].T @ X[cursor:stop]
        cursor = stop
        window_gram = symmetrize(gram)
        A_hat, rank = _solve(cross.copy(), window_gram)
        by_end[end] = LseResult(
            A_hat=A_hat, window=(start, end), gram=window_gram, rank=rank, rank_deficient=rank < n_x
        )
    return [by_end[end] for end in ends]


class LseAccumulator:
    """Accumulateurs de Gram et de moments croisés mis à jour pas à pas"""

    def __init__(self, B, start: int = 0):
        self.B = as_matrix(B, "B")
        n_x = self.B.shape[0]
        self.start = start
        self.count = 0
        self.gram = np.zeros((n_x, n_x))
        self.cross = np.zeros((n_x, n_x))

    def update(self, x, u, x_next) -> None:
        x = np.asarray(x, dtype=np.float64)
        target = np.asarray(x_next, dtype=np.float64) - self.B @ np.asarray(u, dtype=np.float64)
        self.gram += np.outer(x, x)
        self.cross += np.outer(target, x)
        self.count += 1

    def estimate(self) -> LseResult:
        if self.count == 0:
            raise EmptyWindowError("Aucune donnée accumulée")
        gram = symmetrize(self.gram)
        A_hat, rank = _solve(self.cross, gram)
        n_x = gram.shape[0]
        return LseResult(
            A_hat=A_hat, window=(self.start, self.start + self.count), gram=gram,
            rank=rank, rank_deficient=rank < n_x,
        )


def estimation_error(A_hat, A) -> float:
    """‖Â - A‖ en norme spectrale"""
    A_hat = as_matrix(A_hat, "A_hat")
    A = as_matrix(A, "A")
    if A_hat.shape != A.shape:
        raise DimensionMismatchError(f"Formes incompatibles {A_hat.shape} et {A.shape}")
    return spectral_norm(A_hat - A)


def noise_error_term(traj: Trajectory, window: Optional[tuple[int, int]] = None) -> Matrix:
    """Wᵀ X (Xᵀ X)^† calculé à partir des bruits enregistrés"""
    if traj.noises is None:
        raise ValueError("Bruits non enregistrés sur cette trajectoire")
    start, end = window or (0, traj.horizon)
    if end - start < 1:
        raise EmptyWindowError(f"Fenêtre vide : {(start, end)}")
    X = traj.states[start:end]
    W = traj.noises[start:end]
    return W.T @ X @ pseudo_inverse(X.T @ X)
