"""
Apprentissage actif de A en deux phases (excitation isotrope, projection stable,
conception de Û puis excitation conçue) et lignes de base isotrope / oracle.
"""

import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.errors import UnstableMatrixError
from src.core.estimator import estimation_error, lse, lse_path
from src.core.excitation_design import DesignResult, ProjectionConfig, design_covariance, project_stable
from src.core.linalg_core import Matrix, SymmetricPSD, spectral_radius
from src.core.simulator import ExcitationPolicy, NoiseConfig, SystemSpec, Trajectory, simulate
from src.util.helper.enum import BaselineKindEnum, MethodEnum

logger = logging.getLogger(__name__)

GEOMETRIC_RATIO = 1.25
LINEAR_PREFIX_POINTS = 10

PHASE1_STREAM = (0,)
PHASE2_STREAM = (1,)


# ──────────────────────────────────────────────────────────────────────────────
# Calendrier d'enregistrement
# ──────────────────────────────────────────────────────────────────────────────

def default_t0(total_horizon: int) -> int:
    """t₀ = ⌈T^{2/3}⌉, borné à T"""
    return min(total_horizon, max(1, math.ceil(total_horizon ** (2.0 / 3.0) - 1e-9)))


def default_log_schedule(t0: int, total_horizon: int) -> list[int]:
    """Préfixe linéaire dense jusqu'à t₀ puis grille géométrique (×1.25) jusqu'à T"""
    prefix = np.linspace(t0 / LINEAR_PREFIX_POINTS, t0, LINEAR_PREFIX_POINTS)
    times = {max(1, int(round(t))) for t in prefix}
    t = float(t0)
    while t < total_horizon:
        t *= GEOMETRIC_RATIO
        times.add(min(total_horizon, int(math.ceil(t))))
    times.add(total_horizon)
    return sorted(times)


# ──────────────────────────────────────────────────────────────────────────────
# Configuration et résultats
# ──────────────────────────────────────────────────────────────────────────────

class LearnerConfig(BaseModel):
    u_bar: float = Field(..., ge=0)
    total_horizon: int = Field(..., ge=1)
    t0: Optional[int] = None
    reset: bool = False
    projection: ProjectionConfig = Field(default_factory=ProjectionConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    log_schedule: Optional[list[int]] = None
    design_tol: Optional[float] = Field(None, gt=0)
    noiseless: bool = False

    @model_validator(mode="after")
    def resolve_schedule(self):
        if self.t0 is None:
            self.t0 = default_t0(self.total_horizon)
        if not 1 <= self.t0 <= self.total_horizon:
            raise ValueError(f"t0 = {self.t0} hors de [1, {self.total_horizon}]")
        if self.log_schedule is None:
            self.log_schedule = default_log_schedule(self.t0, self.total_horizon)
        schedule = self.log_schedule
        if not schedule:
            raise ValueError("log_schedule vide")
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ValueError("log_schedule doit être strictement croissant")
        if schedule[0] < 1 or schedule[-1] > self.total_horizon:
            raise ValueError(f"log_schedule doit être dans [1, {self.total_horizon}]")
        return self


class LearnerRun(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: MethodEnum
    seed: int
    times: list[int]
    errors: list[float]
    U_hat: SymmetricPSD
    A_hat_t0: Optional[Matrix] = None
    A_bar_t0: Optional[Matrix] = None
    projected: bool = False
    design: Optional[DesignResult] = None

    @field_validator("errors")
    def check_errors(cls, v):
        if any(e < 0 for e in v):
            raise ValueError("Erreurs d'estimation négatives")
        return v

    @property
    def errors_at_log_times(self) -> list[tuple[int, float]]:
        return list(zip(self.times, self.errors))

    @property
    def final_error(self) -> float:
        return self.errors[-1]


# ──────────────────────────────────────────────────────────────────────────────
# Algorithme en deux phases
# ──────────────────────────────────────────────────────────────────────────────

def _errors_on(traj: Trajectory, spec: SystemSpec, times: list[int], offset: int) -> list[float]:
    """‖Â_t - A‖ pour chaque t, Â_t estimé sur les paires [0, t - offset) de traj"""
    if not times:
        return []
    results = lse_path(traj, spec.B, 0, [t - offset for t in times])
    return [estimation_error(r.A_hat, spec.A) for r in results]


def run_algorithm1(spec: SystemSpec, cfg: LearnerConfig, seed: int) -> LearnerRun:
    """
    Phase 1 : t₀ pas d'excitation isotrope et Â_{t₀}. Projection Ā_{t₀} = Π(Â_{t₀}),
    conception Û sur (Ā_{t₀}, B/σ_w), remise à zéro optionnelle de x_{t₀}.
    Phase 2 : excitation de covariance Û ; Â_t n'utilise que les paires s ≥ t₀.
    """
    t0, total = cfg.t0, cfg.total_horizon
    phase1_times = [t for t in cfg.log_schedule if t <= t0]
    phase2_times = [t for t in cfg.log_schedule if t > t0]

    phase1 = simulate(
        spec, ExcitationPolicy.isotropic(cfg.u_bar), cfg.noise, t0, seed,
        stream=PHASE1_STREAM, noiseless=cfg.noiseless, record_noise=False,
    )
    errors = _errors_on(phase1, spec, phase1_times, 0)
    A_hat_t0 = lse(phase1, spec.B).A_hat
    A_bar_t0 = project_stable(A_hat_t0, cfg.projection)
    rho_hat = spectral_radius(A_hat_t0)
    projected = rho_hat >= 1.0
    if projected:
        logger.info(f"Seed {seed} : Â_t0 instable (ρ = {rho_hat:.4f}), projection appliquée")

    design = design_covariance(A_bar_t0, spec.normalized_B, cfg.u_bar, tol=cfg.design_tol)
    logger.debug(f"Seed {seed} : phase 1 terminée, J(Û) = {design.objective:.6g}")

    if phase2_times:
        x0 = np.zeros(spec.n_x) if cfg.reset else phase1.states[-1]
        phase2 = simulate(
            spec, ExcitationPolicy.from_covariance(design.U_star, cfg.u_bar), cfg.noise, total - t0, seed,
            x0=x0, stream=PHASE2_STREAM, noiseless=cfg.noiseless, record_noise=False,
        )
        errors += _errors_on(phase2, spec, phase2_times, t0)

    return LearnerRun(
        method=MethodEnum.ALGORITHM1,
        seed=seed,
        times=phase1_times + phase2_times,
        errors=errors,
        U_hat=design.U_star,
        A_hat_t0=A_hat_t0,
        A_bar_t0=A_bar_t0,
        projected=projected,
        design=design,
    )


# ──────────────────────────────────────────────────────────────────────────────
# Lignes de base
# ──────────────────────────────────────────────────────────────────────────────

def oracle_design(spec: SystemSpec, cfg: LearnerConfig) -> DesignResult:
    """U*(A) conçu avec la vraie matrice A (système renormalisé par σ_w)"""
    rho = spectral_radius(spec.A)
    if rho >= 1.0:
        raise UnstableMatrixError(rho)
    return design_covariance(spec.A, spec.normalized_B, cfg.u_bar, tol=cfg.design_tol)


def run_baseline(
    spec: SystemSpec,
    cfg: LearnerConfig,
    kind: BaselineKindEnum,
    seed: int,
    design: Optional[DesignResult] = None,
) -> LearnerRun:
    """Une seule phase à politique fixe, Â_t sur toute la trajectoire"""
    kind = BaselineKindEnum(kind)
    if kind == BaselineKindEnum.ORACLE:
        design = design or oracle_design(spec, cfg)
        policy = ExcitationPolicy.from_covariance(design.U_star, cfg.u_bar)
        method = MethodEnum.ORACLE
    else:
        design = None
        policy = ExcitationPolicy.isotropic(cfg.u_bar)
        method = MethodEnum.ISOTROPIC

    traj = simulate(
        spec, policy, cfg.noise, cfg.total_horizon, seed,
        stream=PHASE1_STREAM, noiseless=cfg.noiseless, record_noise=False,
    )
    times = list(cfg.log_schedule)
    return LearnerRun(
        method=method,
        seed=seed,
        times=times,
        errors=_errors_on(traj, spec, times, 0),
        U_hat=policy.covariance(spec.n_u),
        design=design,
    )


def run_method(
    spec: SystemSpec,
    cfg: LearnerConfig,
    method: MethodEnum,
    seed: int,
    oracle: Optional[DesignResult] = None,
) -> LearnerRun:
    method = MethodEnum(method)
    if method == MethodEnum.ALGORITHM1:
        return run_algorithm1(spec, cfg, seed)
    return run_baseline(spec, cfg, BaselineKindEnum(method.value), seed, design=oracle)
