from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

from src.core.bounds import UniversalConstants
from src.core.simulator import NoiseConfig
from src.util.config.setting import settings
from src.util.helper.enum import BoundKindEnum, MethodEnum, PolicyKindEnum

MatrixRows = list[list[float]]


# Système
class SystemSchema(BaseModel):
    A: MatrixRows
    B: MatrixRows
    sigma_w: float = Field(1.0, gt=0)


# Conception Schemas
class DesignRequest(SystemSchema):
    u_bar: float = Field(..., ge=0)
    tol: Optional[float] = Field(None, gt=0)


class DesignResponse(BaseModel):
    U_star: MatrixRows
    J: float
    J_isotropic: float
    fw_gap: float
    tol: float
    iterations: int
    converged: bool
    trace_used: float


# Bornes Schemas
class BoundsRequest(BaseModel):
    A: MatrixRows
    B: MatrixRows
    u_bar: float = Field(..., ge=0)
    epsilon: float = Field(..., gt=0)
    delta: float = Field(..., gt=0, lt=1)
    constants: UniversalConstants = Field(default_factory=UniversalConstants)
    tau: Optional[int] = Field(None, ge=2)
    t: Optional[int] = Field(None, ge=1)
    t0: Optional[int] = Field(None, ge=1)
    kinds: Optional[list[BoundKindEnum]] = None


class BoundReportResponse(BaseModel):
    kind: BoundKindEnum
    value: Optional[float]          # None si la borne est infinie
    unbounded: bool = False
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    satisfied: Optional[bool] = None
    warnings: list[str] = []
    inputs_echo: dict = {}
    label: str


# Simulation Schemas
class PolicySchema(BaseModel):
    kind: PolicyKindEnum = PolicyKindEnum.ISOTROPIC
    u_bar: float = Field(0.0, ge=0)
    U: Optional[MatrixRows] = None


class SimulationRequest(SystemSchema):
    policy: PolicySchema = Field(default_factory=PolicySchema)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    horizon: int = Field(..., ge=1, le=100_000)
    seed: int = 0
    reset_at: Optional[int] = Field(None, ge=1)


class SimulationResponse(BaseModel):
    seed: int
    horizon: int
    states: MatrixRows
    inputs: MatrixRows


# Apprentissage Schemas
class LearnerRunRequest(BaseModel):
    system: SystemSchema
    u_bar: float = Field(..., ge=0)
    total_horizon: int = Field(..., ge=1, le=1_000_000)
    t0: Optional[int] = Field(None, ge=1)
    reset: bool = False
    stability_margin: float = Field(default_factory=lambda: settings.DEFAULT_STABILITY_MARGIN, gt=0, lt=1)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    seed: int = 0
    method: MethodEnum = MethodEnum.ALGORITHM1


class LearnerRunResponse(BaseModel):
    method: MethodEnum
    seed: int
    t0: int
    times: list[int]
    errors: list[float]
    U_hat: MatrixRows
    A_bar_t0: Optional[MatrixRows] = None
    projected: bool = False
    J_hat: Optional[float] = None
