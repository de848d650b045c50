"""
Évaluation des bornes de complexité d'échantillonnage : bornes inférieures
(générale, dimensionnelle, horizon infini), condition de performance du LSE,
ε_{t₀} et seuil supérieur de l'algorithme en deux phases.

Toutes les valeurs sont données à constantes universelles près.
"""

import logging
import math
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.core.excitation_design import DesignResult, admissible_perturbation_radius, design_covariance
from src.core.gramian import (
    CovarianceInput, gamma_bar, gramian_infinite, gramian_sum, gramian_sum_steps,
    sigma_recursion
)
from src.core.linalg_core import as_matrix, as_square, min_eigenvalue, spectral_norm
from src.util.helper.enum import BoundKindEnum

logger = logging.getLogger(__name__)

CONSTANTS_LABEL = "up to universal constants"
THRESHOLD_CAP = 1e8
FIXED_POINT_MAX_ITER = 10_000
MINIMAL_T0_CAP = 10_000_000


# ──────────────────────────────────────────────────────────────────────────────
# Types du domaine
# ──────────────────────────────────────────────────────────────────────────────

class UniversalConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    c_lower: float = Field(1.0, gt=0)
    c_prime: float = Field(1.0, gt=0)
    K: float = Field(1.0, gt=0)

    @property
    def C(self) -> float:
        """C := c′ K⁴"""
        return self.c_prime * self.K ** 4

    @classmethod
    def parse(cls, text: str) -> "UniversalConstants":
        """Lit 'c_lower=..,c_prime=..,K=..' (clés absentes : valeur par défaut)"""
        values: dict[str, float] = {}
        for item in filter(None, (part.strip() for part in text.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"Constante mal formée : '{item}'")
            values[key.strip()] = float(value)
        unknown = set(values) - set(cls.model_fields)
        if unknown:
            raise ValueError(f"Constantes inconnues : {sorted(unknown)}")
        return cls(**values)


class BoundQuery(BaseModel):
    epsilon: float = Field(..., gt=0)
    delta: float = Field(..., gt=0, lt=1)
    u_bar: float = Field(..., ge=0)
    constants: UniversalConstants = Field(default_factory=UniversalConstants)


class BoundReport(BaseModel):
    kind: BoundKindEnum
    value: float
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    satisfied: Optional[bool] = None
    warnings: list[str] = Field(default_factory=list)
    inputs_echo: dict[str, Any] = Field(default_factory=dict)
    label: str = CONSTANTS_LABEL

    def to_row(self) -> dict[str, Any]:
        echo = self.inputs_echo
        return {
            "kind": self.kind.value,
            "value": self.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "satisfied": self.satisfied,
            "epsilon": echo.get("epsilon"),
            "delta": echo.get("delta"),
            "n_x": echo.get("n_x"),
            "c_lower": echo.get("c_lower"),
            "c_prime": echo.get("c_prime"),
            "K": echo.get("K"),
            "warnings": "; ".join(self.warnings),
        }


def _echo(q: BoundQuery, n_x: int, **extra) -> dict[str, Any]:
    return {
        "epsilon": q.epsilon,
        "delta": q.delta,
        "u_bar": q.u_bar,
        "n_x": n_x,
        **q.constants.model_dump(),
        **extra,
    }


def _input_gain(B, u_bar: float) -> float:
    """1 + ‖B‖² ū"""
    return 1.0 + spectral_norm(as_matrix(B, "B")) ** 2 * u_bar


def _optimal_objective(A, B, q: BoundQuery, design: Optional[DesignResult]) -> float:
    """max_U λ_min(Γ_∞(A) + Ξ_∞(A, U)) sous tr(U) ≤ ū"""
    if design is None:
        design = design_covariance(A, B, q.u_bar)
    return design.objective


# ──────────────────────────────────────────────────────────────────────────────
# Bornes inférieures
# ──────────────────────────────────────────────────────────────────────────────

def lower_bound_general(A, B, U_seq: CovarianceInput, q: BoundQuery, tau: int) -> BoundReport:
    """λ_min(Σ_{s=1}^{τ-1} Σ_s) ≥ (1/(2ε²)) log(1/(3δ))"""
    A = as_square(A, "A")
    if tau < 2:
        raise ValueError("tau doit être ≥ 2")
    lhs = sigma_recursion(A, B, U_seq, tau - 1).min_eig_of_sum()
    rhs = math.log(1.0 / (3.0 * q.delta)) / (2.0 * q.epsilon ** 2)
    return BoundReport(
        kind=BoundKindEnum.LOWER_EQ5, value=rhs, lhs=lhs, rhs=rhs, satisfied=lhs >= rhs,
        inputs_echo=_echo(q, A.shape[0], tau=tau),
    )


def lower_bound_thm1(A, B, U_seq: CovarianceInput, q: BoundQuery, tau: int) -> BoundReport:
    """λ_min(Σ_{s=1}^{τ-1} Σ_s) ≥ c/((1+‖B‖²ū) ε²) (log(1/δ) + n_x)"""
    A = as_square(A, "A")
    if tau < 2:
        raise ValueError("tau doit être ≥ 2")
    n_x = A.shape[0]
    lhs = sigma_recursion(A, B, U_seq, tau - 1).min_eig_of_sum()
    rhs = q.constants.c_lower * (math.log(1.0 / q.delta) + n_x) / (_input_gain(B, q.u_bar) * q.epsilon ** 2)
    return BoundReport(
        kind=BoundKindEnum.LOWER_THM1, value=rhs, lhs=lhs, rhs=rhs, satisfied=lhs >= rhs,
        inputs_echo=_echo(q, n_x, tau=tau),
    )


def lower_bound_cor1(A, B, q: BoundQuery, design: Optional[DesignResult] = None) -> BoundReport:
    """τ_A - 1 ≥ log(1/(3δ)) / (2ε² max_U λ_min(Γ_∞ + Ξ_∞(A, U)))"""
    A = as_square(A, "A")
    J = _optimal_objective(A, B, q, design)
    value = math.log(1.0 / (3.0 * q.delta)) / (2.0 * q.epsilon ** 2 * J)
    return BoundReport(kind=BoundKindEnum.LOWER_COR1, value=value, inputs_echo=_echo(q, A.shape[0], J_star=J))


def lower_bound_cor2(A, B, q: BoundQuery, design: Optional[DesignResult] = None) -> BoundReport:
    """τ_A - 1 ≥ c (log(1/δ) + n_x) / ((1+‖B‖²ū) ε² max_U λ_min(Γ_∞ + Ξ_∞(A, U)))"""
    A = as_square(A, "A")
    n_x = A.shape[0]
    J = _optimal_objective(A, B, q, design)
    value = q.constants.c_lower * (math.log(1.0 / q.delta) + n_x) / (_input_gain(B, q.u_bar) * q.epsilon ** 2 * J)

    warnings = []
    eps_max = spectral_norm(gramian_infinite(A)) ** -3 / (12.0 * math.sqrt(2.0))
    if q.epsilon >= eps_max:
        warnings.append(f"ε = {q.epsilon:.6g} hors de (0, {eps_max:.6g})")
    if q.delta >= 0.5:
        warnings.append(f"δ = {q.delta:.6g} hors de (0, 1/2)")
    for message in warnings:
        logger.warning(f"Borne dimensionnelle : {message}")
    return BoundReport(
        kind=BoundKindEnum.LOWER_COR2, value=value, warnings=warnings,
        inputs_echo=_echo(q, n_x, J_star=J, epsilon_max=eps_max),
    )


# ──────────────────────────────────────────────────────────────────────────────
# Performance du LSE
# ──────────────────────────────────────────────────────────────────────────────

def lse_condition_prop4(A, B, U, q: BoundQuery, t: int) -> BoundReport:
    """
    λ_min(Σ_{s=1}^{t-1} (Γ_s + Ξ_s(A, U))) ≥ C max{1/ε², γ̄} (log(1/δ) + n_x),
    γ̄ majorant de ‖Γ_U‖²
    """
    A = as_square(A, "A")
    n_x = A.shape[0]
    g_bar = gamma_bar(A, B, q.u_bar)
    lhs = min_eigenvalue(gramian_sum(A, B, U, t))
    rhs = q.constants.C * max(1.0 / q.epsilon ** 2, g_bar) * (math.log(1.0 / q.delta) + n_x)
    return BoundReport(
        kind=BoundKindEnum.LSE_CONDITION_PROP4, value=rhs, lhs=lhs, rhs=rhs, satisfied=lhs >= rhs,
        inputs_echo=_echo(q, n_x, t=t, gamma_bar=g_bar),
    )


def _isotropic(B, u_bar: float) -> np.ndarray:
    n_u = as_matrix(B, "B").shape[1]
    return (u_bar / n_u) * np.eye(n_u)


def eps_t0(A, B, q: BoundQuery, t0: int) -> BoundReport:
    """
    Plus petit ε satisfaisant la condition du LSE pour t = t₀, U = (ū/n_u) I et δ/2 :
    ε_{t₀} = sqrt(C (log(2/δ) + n_x) / λ_min(Σ_{s<t₀} (Γ_s + Ξ_s))).
    +∞ si la branche γ̄ du max rend la condition infaisable.
    """
    A = as_square(A, "A")
    n_x = A.shape[0]
    g_bar = gamma_bar(A, B, q.u_bar)
    log_term = math.log(2.0 / q.delta) + n_x
    lhs = min_eigenvalue(gramian_sum(A, B, _isotropic(B, q.u_bar), t0))
    echo = _echo(q, n_x, t0=t0, gamma_bar=g_bar)

    if lhs < q.constants.C * g_bar * log_term:
        message = f"λ_min = {lhs:.6g} < C γ̄ (log(2/δ) + n_x) = {q.constants.C * g_bar * log_term:.6g} : condition infaisable"
        logger.warning(f"ε_t0 : {message}")
        return BoundReport(kind=BoundKindEnum.EPS_T0, value=math.inf, lhs=lhs, warnings=[message], inputs_echo=echo)
    value = math.sqrt(q.constants.C * log_term / lhs)
    return BoundReport(kind=BoundKindEnum.EPS_T0, value=value, lhs=lhs, inputs_echo=echo)


def minimal_t0(A, B, q: BoundQuery, t_max: int = MINIMAL_T0_CAP) -> float:
    """
    Plus petit t₀ tel que ε_{t₀} ≤ ‖Γ_∞(A)‖^{-3/2}/4, par doublement puis balayage
    de la dernière octave. +∞ si non atteint avant t_max.
    """
    A = as_square(A, "A")
    n_x = A.shape[0]
    radius = admissible_perturbation_radius(A)
    log_term = math.log(2.0 / q.delta) + n_x
    C = q.constants.C
    # ε_{t₀} ≤ r  ⇔  λ_min ≥ max(C γ̄ L, C L / r²)
    threshold = max(C * gamma_bar(A, B, q.u_bar) * log_term, C * log_term / radius ** 2)
    U = _isotropic(B, q.u_bar)

    checkpoint = 2
    previous = 1
    for t, total in gramian_sum_steps(A, B, U):
        if t > t_max:
            logger.warning(f"t₀ minimal non atteint avant {t_max}")
            return math.inf
        if t == checkpoint:
            if min_eigenvalue(total) >= threshold:
                break
            previous, checkpoint = checkpoint, 2 * checkpoint

    for t, total in gramian_sum_steps(A, B, U):
        if t > previous and min_eigenvalue(total) >= threshold:
            return t
    return math.inf  # pragma: no cover


# ──────────────────────────────────────────────────────────────────────────────
# Seuil supérieur de l'algorithme en deux phases
# ──────────────────────────────────────────────────────────────────────────────

class UpperBoundTerms(BaseModel):
    """Constantes du seuil : t ≥ rhs(t)"""

    J_star: float
    gamma_norm: float
    gamma_bar: float
    eps_t0: float
    t0: int
    C: float
    C1: float
    C2: float
    log_term: float
    epsilon: float

    def rhs(self, t: float) -> float:
        contraction = 1.0 - 1.0 / self.gamma_norm
        statistical = self.C / self.J_star * max(1.0 / self.epsilon ** 2, self.gamma_bar) * self.log_term
        losses = (
            self.C1 * (t - 1) * self.eps_t0
            + self.C2 * self.t0
            + self.C2 * (t - 1) * contraction ** (t - 1)
            + self.C2 * (self.gamma_norm - 1.0)
        )
        return 1.0 + statistical + self.gamma_norm ** 2 / self.J_star * losses


def upper_bound_terms(A, B, q: BoundQuery, t0: int, design: Optional[DesignResult] = None) -> tuple[UpperBoundTerms, BoundReport]:
    A = as_square(A, "A")
    gamma_norm = spectral_norm(gramian_infinite(A))
    gain = _input_gain(B, q.u_bar)
    eps_report = eps_t0(A, B, q, t0)
    terms = UpperBoundTerms(
        J_star=_optimal_objective(A, B, q, design),
        gamma_norm=gamma_norm,
        gamma_bar=eps_report.inputs_echo["gamma_bar"],
        eps_t0=eps_report.value,
        t0=t0,
        C=q.constants.C,
        C1=64.0 * gain * gamma_norm,
        C2=gain,
        log_term=math.log(2.0 / q.delta) + A.shape[0],
        epsilon=q.epsilon,
    )
    return terms, eps_report


def upper_bound_thm2(A, B, q: BoundQuery, t0: int, design: Optional[DesignResult] = None) -> BoundReport:
    """
    Plus petit t ≥ t₀ + 1 vérifiant la condition du seuil supérieur, par l'itération
    de point fixe t ← ⌈rhs(t)⌉. +∞ si l'itération diverge ou dépasse 1e8.
    """
    A = as_square(A, "A")
    terms, eps_report = upper_bound_terms(A, B, q, t0, design)
    warnings = list(eps_report.warnings)
    radius = terms.gamma_norm ** -1.5 / 4.0
    if terms.eps_t0 > radius:
        warnings.append(f"ε_t0 = {terms.eps_t0:.6g} > ‖Γ_∞‖^(-3/2)/4 = {radius:.6g}")
    echo = _echo(q, A.shape[0], t0=t0, **terms.model_dump(exclude={"t0", "epsilon"}))

    value = math.inf
    if math.isfinite(terms.eps_t0):
        t = float(t0 + 1)
        for _ in range(FIXED_POINT_MAX_ITER):
            bound = terms.rhs(t)
            if bound <= t:
                value = t
                break
            t = float(math.ceil(bound))
            if t > THRESHOLD_CAP:
                warnings.append(f"Seuil au-delà de {THRESHOLD_CAP:.0e}")
                break
        else:
            warnings.append("Itération de point fixe non convergée")
    for message in warnings:
        logger.warning(f"Seuil supérieur : {message}")
    return BoundReport(kind=BoundKindEnum.UPPER_THM2, value=value, warnings=warnings, inputs_echo=echo)


# ──────────────────────────────────────────────────────────────────────────────
# Tableaux de rapports
# ──────────────────────────────────────────────────────────────────────────────

def bound_report_table(
    A,
    B,
    q: BoundQuery,
    kinds: Sequence[BoundKindEnum],
    *,
    U=None,
    tau: Optional[int] = None,
    t: Optional[int] = None,
    t0: Optional[int] = None,
) -> list[BoundReport]:
    """Évalue chaque type de borne demandé ; la conception optimale est partagée"""
    A = as_square(A, "A")
    B = as_matrix(B, "B")
    kinds = [BoundKindEnum(k) for k in kinds]
    U = _isotropic(B, q.u_bar) if U is None else U
    needs_design = {BoundKindEnum.LOWER_COR1, BoundKindEnum.LOWER_COR2, BoundKindEnum.UPPER_THM2}
    design = design_covariance(A, B, q.u_bar) if needs_design.intersection(kinds) else None

    def require(value, name: str, kind: BoundKindEnum):
        if value is None:
            raise ValueError(f"La borne {kind.value} requiert {name}")
        return value

    reports = []
    for kind in kinds:
        if kind == BoundKindEnum.LOWER_EQ5:
            reports.append(lower_bound_general(A, B, U, q, require(tau, "tau", kind)))
        elif kind == BoundKindEnum.LOWER_THM1:
            reports.append(lower_bound_thm1(A, B, U, q, require(tau, "tau", kind)))
        elif kind == BoundKindEnum.LOWER_COR1:
            reports.append(lower_bound_cor1(A, B, q, design))
        elif kind == BoundKindEnum.LOWER_COR2:
            reports.append(lower_bound_cor2(A, B, q, design))
        elif kind == BoundKindEnum.LSE_CONDITION_PROP4:
            reports.append(lse_condition_prop4(A, B, U, q, require(t, "t", kind)))
        elif kind == BoundKindEnum.EPS_T0:
            reports.append(eps_t0(A, B, q, require(t0, "t0", kind)))
        elif kind == BoundKindEnum.UPPER_THM2:
            reports.append(upper_bound_thm2(A, B, q, require(t0, "t0", kind), design))
    return reports


def reports_to_frame(reports: Sequence[BoundReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports])


def write_reports_csv(reports: Sequence[BoundReport], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    reports_to_frame(reports).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
