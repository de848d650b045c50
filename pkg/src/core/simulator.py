"""
Simulation de x_{t+1} = A x_t + B u_t + w_t sous excitation centrée
sous-gaussienne, avec aléa reproductible et remise à zéro optionnelle de l'état.
"""

import logging
import zlib
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.errors import DimensionMismatchError, InvalidPolicyError
from src.core.linalg_core import Matrix, Vector, as_matrix, as_square, check_symmetric_psd, sym_sqrt
from src.util.helper.enum import NoiseFamilyEnum, PolicyKindEnum

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-9
CSV_FLOAT_FORMAT = "%.17g"


# ──────────────────────────────────────────────────────────────────────────────
# Types du domaine
# ──────────────────────────────────────────────────────────────────────────────

class SystemSpec(BaseModel):
    """Système réel (A, B, σ_w) : vérité terrain pour la simulation et l'oracle"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    A: Matrix
    B: Matrix
    sigma_w: float = Field(1.0, gt=0)

    @field_validator("A", mode="before")
    def check_A(cls, v):
        return as_square(v, "A")

    @field_validator("B", mode="before")
    def check_B(cls, v):
        return as_matrix(v, "B")

    @model_validator(mode="after")
    def check_dimensions(self):
        if self.B.shape[0] != self.A.shape[0]:
            raise DimensionMismatchError(f"B a {self.B.shape[0]} lignes, A est {self.n_x}×{self.n_x}")
        return self

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def normalized_B(self) -> Matrix:
        """B/σ_w : matrice d'entrée du système renormalisé x' = x/σ_w"""
        return self.B / self.sigma_w


class NoiseConfig(BaseModel):
    family: NoiseFamilyEnum = NoiseFamilyEnum.GAUSSIAN
    psi2_bound: float = Field(1.0, gt=0)  # K, enregistré mais non imposé


class ExcitationPolicy(BaseModel):
    """Loi de u_t : nulle, isotrope (ū/n_u) I, ou covariance U imposée"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: PolicyKindEnum
    u_bar: float = Field(0.0, ge=0)
    U: Optional[Matrix] = None

    @field_validator("U", mode="before")
    def check_U(cls, v):
        if v is None:
            return v
        return check_symmetric_psd(v, "U")

    @model_validator(mode="after")
    def check_budget(self):
        if self.kind == PolicyKindEnum.COVARIANCE:
            if self.U is None:
                raise InvalidPolicyError("Une politique 'covariance' exige U")
            if np.trace(self.U) > self.u_bar + TRACE_TOL:
                raise InvalidPolicyError(f"tr(U) = {np.trace(self.U):.6g} dépasse ū = {self.u_bar:.6g}")
        return self

    @classmethod
    def zero(cls) -> "ExcitationPolicy":
        return cls(kind=PolicyKindEnum.ZERO)

    @classmethod
    def isotropic(cls, u_bar: float) -> "ExcitationPolicy":
        return cls(kind=PolicyKindEnum.ISOTROPIC, u_bar=u_bar)

    @classmethod
    def from_covariance(cls, U, u_bar: float) -> "ExcitationPolicy":
        return cls(kind=PolicyKindEnum.COVARIANCE, u_bar=u_bar, U=U)

    def covariance(self, n_u: int) -> Matrix:
        if self.kind == PolicyKindEnum.ZERO:
            return np.zeros((n_u, n_u))
        if self.kind == PolicyKindEnum.ISOTROPIC:
            return (self.u_bar / n_u) * np.eye(n_u)
        if self.U.shape != (n_u, n_u):
            raise DimensionMismatchError(f"U de forme {self.U.shape}, attendu {(n_u, n_u)}")
        return self.U


class Trajectory(BaseModel):
    """États x_0..x_T, entrées u_0..u_{T-1} et bruits w_0..w_{T-1} d'une simulation"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: Matrix             # (T+1, n_x)
    inputs: Matrix             # (T, n_u)
    noises: Optional[Matrix]   # (T, n_x)
    seed: int
    stream: tuple[int, ...] = ()
    reset_at: Optional[int] = None
    pre_reset_state: Optional[Vector] = None

    @property
    def horizon(self) -> int:
        return self.inputs.shape[0]

    def next_states(self) -> Matrix:
        """x_1..x_T tels que produits par la dynamique (état avant remise à zéro inclus)"""
        nxt = self.states[1:].copy()
        if self.reset_at is not None and self.pre_reset_state is not None:
            nxt[self.reset_at - 1] = self.pre_reset_state
        return nxt

    def replay(self, A, B) -> Matrix:
        """Rejoue la dynamique à partir de (x_0, entrées, bruits)"""
        if self.noises is None:
            raise ValueError("Bruits non enregistrés : rejeu impossible")
        A = as_square(A, "A")
        B = as_matrix(B, "B")
        states = np.empty_like(self.states)
        states[0] = self.states[0]
        drive = self.inputs @ B.T + self.noises
        for t in range(self.horizon):
            states[t + 1] = A @ states[t] + drive[t]
            if self.reset_at is not None and t + 1 == self.reset_at:
                states[t + 1] = 0.0
        return states

    def to_frame(self) -> pd.DataFrame:
        n_x = self.states.shape[1]
        n_u = self.inputs.shape[1]
        frame = pd.DataFrame(self.states, columns=[f"x_{i + 1}" for i in range(n_x)])
        padded = np.vstack([self.inputs, np.full((1, n_u), np.nan)])
        for j in range(n_u):
            frame[f"u_{j + 1}"] = padded[:, j]
        frame.insert(0, "t", np.arange(self.horizon + 1))
        return frame

    def to_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n", na_rep="")
        return path


# ──────────────────────────────────────────────────────────────────────────────
# Aléa reproductible
# ──────────────────────────────────────────────────────────────────────────────

def method_key(name: str) -> int:
    """Clé entière stable associée à un nom de méthode"""
    return zlib.crc32(name.encode("utf-8"))


def derive_seed(master_seed: int, *keys: int) -> int:
    """Graine d'essai dérivée de (graine maîtresse, clés) indépendamment de l'ordre d'exécution"""
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_rng(seed: int, stream: tuple[int, ...] = ()) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=stream))


def standard_draws(rng: np.random.Generator, family: NoiseFamilyEnum, size: tuple[int, ...]) -> np.ndarray:
    """Tirages centrés de covariance identité"""
    if family == NoiseFamilyEnum.GAUSSIAN:
        return rng.standard_normal(size)
    if family == NoiseFamilyEnum.RADEMACHER:
        return 2.0 * rng.integers(0, 2, size=size) - 1.0
    if family == NoiseFamilyEnum.UNIFORM:
        bound = np.sqrt(3.0)
        return rng.uniform(-bound, bound, size=size)
    raise ValueError(f"Famille de bruit inconnue : {family}")


# ──────────────────────────────────────────────────────────────────────────────
# Simulation
# ──────────────────────────────────────────────────────────────────────────────

def step(spec: SystemSpec, x, u, w) -> Vector:
    """x_{t+1} = A x + B u + w"""
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape != (spec.n_x,) or w.shape != (spec.n_x,) or u.shape != (spec.n_u,):
        raise DimensionMismatchError(
            f"Dimensions x={x.shape}, u={u.shape}, w={w.shape} incompatibles avec n_x={spec.n_x}, n_u={spec.n_u}"
        )
    return spec.A @ x + spec.B @ u + w


def simulate(
    spec: SystemSpec,
    policy: ExcitationPolicy,
    noise: NoiseConfig,
    horizon: int,
    seed: int,
    reset_at: Optional[int] = None,
    *,
    x0=None,
    stream: tuple[int, ...] = (),
    noiseless: bool = False,
    record_noise: bool = True,
) -> Trajectory:
    """
    Simule `horizon` pas avec u_t = U^{1/2} z_t et w_t = σ_w ζ_t, (z_t, ζ_t) i.i.d.
    centrés de covariance identité. Si reset_at = t₀, x_{t₀} est remis à 0.
    """
    if horizon < 1:
        raise ValueError("horizon doit être ≥ 1")
    if reset_at is not None and not 1 <= reset_at <= horizon:
        raise ValueError(f"reset_at={reset_at} hors de [1, {horizon}]")
    U = policy.covariance(spec.n_u)
    if policy.kind != PolicyKindEnum.ZERO and np.trace(U) > policy.u_bar + TRACE_TOL:
        raise InvalidPolicyError(f"tr(U) = {np.trace(U):.6g} dépasse ū = {policy.u_bar:.6g}")

    rng = make_rng(seed, stream)
    input_draws = standard_draws(rng, noise.family, (horizon, spec.n_u))
    noise_draws = standard_draws(rng, noise.family, (horizon, spec.n_x))
    inputs = input_draws @ sym_sqrt(U).T
    noises = np.zeros_like(noise_draws) if noiseless else spec.sigma_w * noise_draws

    states = np.empty((horizon + 1, spec.n_x))
    states[0] = 0.0 if x0 is None else np.asarray(x0, dtype=np.float64)
    drive = inputs @ spec.B.T + noises
    A = spec.A
    pre_reset_state = None
    for t in range(horizon):
        states[t + 1] = A @ states[t] + drive[t]
        if reset_at is not None and t + 1 == reset_at:
            pre_reset_state = states[t + 1].copy()
            states[t + 1] = 0.0
    if reset_at is not None:
        logger.debug(f"État remis à zéro à t={reset_at}")

    return Trajectory(
        states=states,
        inputs=inputs,
        noises=noises if record_noise else None,
        seed=seed,
        stream=tuple(stream),
        reset_at=reset_at,
        pre_reset_state=pre_reset_state,
    )
