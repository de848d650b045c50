"""
Fichiers de configuration des expériences (TOML) : schéma pydantic,
constructeurs de matrices nommés et résolution des valeurs par défaut.
"""

import json
import logging
import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.active_learner import LearnerConfig, default_t0
from src.core.bounds import UniversalConstants
from src.core.errors import ConfigError
from src.core.excitation_design import ProjectionConfig
from src.core.linalg_core import Matrix, as_matrix
from src.core.simulator import ExcitationPolicy, NoiseConfig, SystemSpec
from src.util.config.setting import settings
from src.util.helper.enum import BoundKindEnum, MethodEnum, PolicyKindEnum

logger = logging.getLogger(__name__)

MatrixInput = Union[str, float, list]

_CONSTRUCTOR = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


# ──────────────────────────────────────────────────────────────────────────────
# Constructeurs de matrices
# ──────────────────────────────────────────────────────────────────────────────

def jordan(n: int, a: float) -> Matrix:
    """Bloc de Jordan n×n de valeur propre a"""
    return a * np.eye(n) + np.eye(n, k=1)


def _count(value: float, name: str) -> int:
    if value != int(value) or value < 1:
        raise ConfigError(f"{name}: dimension entière ≥ 1 attendue, reçu {value}")
    return int(value)


def parse_matrix(value: MatrixInput) -> Matrix:
    """
    Matrice donnée ligne par ligne (listes imbriquées), scalaire, ou par constructeur :
    jordan(n, a), identity(n), diag(a1, ..., an), zeros(n) ou zeros(n, m).
    """
    if not isinstance(value, str):
        return as_matrix(value, "matrice")
    match = _CONSTRUCTOR.match(value)
    if not match:
        raise ConfigError(f"Constructeur de matrice illisible : '{value}'")
    name, raw_args = match.groups()
    try:
        args = [float(a) for a in raw_args.split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"Arguments non numériques dans '{value}'")

    if name == "jordan" and len(args) == 2:
        return jordan(_count(args[0], "jordan"), args[1])
    if name == "identity" and len(args) == 1:
        return np.eye(_count(args[0], "identity"))
    if name == "diag" and args:
        return np.diag(args)
    if name == "zeros" and len(args) in (1, 2):
        n = _count(args[0], "zeros")
        m = _count(args[1], "zeros") if len(args) == 2 else n
        return np.zeros((n, m))
    raise ConfigError(f"Constructeur inconnu ou arité invalide : '{value}'")


# ──────────────────────────────────────────────────────────────────────────────
# Schéma
# ──────────────────────────────────────────────────────────────────────────────

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SystemConfig(_Section):
    A: MatrixInput
    B: MatrixInput
    sigma_w: float = Field(1.0, gt=0)

    @field_validator("A", "B", mode="after")
    def check_matrix(cls, v):
        parse_matrix(v)
        return v

    def to_spec(self) -> SystemSpec:
        return SystemSpec(A=parse_matrix(self.A), B=parse_matrix(self.B), sigma_w=self.sigma_w)


class ExperimentConfig(_Section):
    methods: list[MethodEnum] = Field(default_factory=lambda: list(MethodEnum))
    trials: int = Field(default_factory=lambda: settings.DEFAULT_TRIALS, ge=1)
    horizon: int = Field(..., ge=1)
    t0: Union[int, Literal["auto"]] = "auto"
    u_bar: float = Field(1.0, ge=0)
    master_seed: int = 0
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)
    reset: bool = False
    stability_margin: float = Field(default_factory=lambda: settings.DEFAULT_STABILITY_MARGIN, gt=0, lt=1)
    design_tol: Optional[float] = Field(None, gt=0)
    log_schedule: Optional[list[int]] = None

    @model_validator(mode="after")
    def resolve_t0(self):
        if self.t0 == "auto":
            self.t0 = default_t0(self.horizon)
        if self.t0 < 1:
            raise ValueError("t0 doit être ≥ 1")
        if MethodEnum.ALGORITHM1 in self.methods and self.horizon <= self.t0:
            raise ValueError(f"horizon ({self.horizon}) doit dépasser t0 ({self.t0}) pour algorithm1")
        if not self.methods:
            raise ValueError("Au moins une méthode est requise")
        return self

    def learner_config(self, noise: NoiseConfig) -> LearnerConfig:
        return LearnerConfig(
            u_bar=self.u_bar,
            total_horizon=self.horizon,
            t0=self.t0,
            reset=self.reset,
            projection=ProjectionConfig(d=self.stability_margin),
            noise=noise,
            log_schedule=self.log_schedule,
            design_tol=self.design_tol,
        )


class SimulationConfig(_Section):
    policy: PolicyKindEnum = PolicyKindEnum.ISOTROPIC
    U: Optional[MatrixInput] = None
    reset_at: Optional[int] = Field(None, ge=1)

    def to_policy(self, u_bar: float) -> ExcitationPolicy:
        if self.policy == PolicyKindEnum.ZERO:
            return ExcitationPolicy.zero()
        if self.policy == PolicyKindEnum.ISOTROPIC:
            return ExcitationPolicy.isotropic(u_bar)
        if self.U is None:
            raise ConfigError("simulation.U requis pour la politique 'covariance'")
        return ExcitationPolicy.from_covariance(parse_matrix(self.U), u_bar)


class BoundsConfig(_Section):
    epsilon: float = Field(0.1, gt=0)
    delta: float = Field(0.1, gt=0, lt=1)
    kinds: list[BoundKindEnum] = Field(default_factory=lambda: list(BoundKindEnum))
    tau: Optional[int] = Field(None, ge=2)
    t: Optional[int] = Field(None, ge=1)
    t0: Optional[int] = Field(None, ge=1)
    constants: UniversalConstants = Field(default_factory=UniversalConstants)


class RunConfig(_Section):
    system: SystemConfig
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    experiment: ExperimentConfig
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    bounds: BoundsConfig = Field(default_factory=BoundsConfig)

    def resolved(self) -> dict[str, Any]:
        """Configuration entièrement résolue, matrices développées, sérialisable en JSON"""
        data = self.model_dump(mode="json")
        spec = self.system.to_spec()
        data["system"]["A"] = spec.A.tolist()
        data["system"]["B"] = spec.B.tolist()
        if self.simulation.U is not None:
            data["simulation"]["U"] = parse_matrix(self.simulation.U).tolist()
        return data


# ──────────────────────────────────────────────────────────────────────────────
# Chargement
# ──────────────────────────────────────────────────────────────────────────────

def load_config(path: Path) -> RunConfig:
    """
    Lit un fichier TOML, ou le JSON résumé d'une expérience précédente
    (clé 'config'), et le valide.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier de configuration introuvable : {path}")
    try:
        if path.suffix == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
            data = data.get("config", data)
        else:
            with path.open("rb") as f:
                data = tomllib.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"{path} : {e}")
    config = RunConfig.model_validate(data)
    logger.info(f"Configuration chargée depuis {path}")
    return config
