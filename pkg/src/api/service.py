import logging
import math
import threading
from contextlib import contextmanager
from typing import Any, Iterator

import numpy as np
from cachetools import LRUCache
from fastapi import HTTPException, status
from pydantic import ValidationError

from src.api.schema import (
    BoundReportResponse, BoundsRequest, DesignRequest, DesignResponse,
    LearnerRunRequest, LearnerRunResponse, SimulationRequest, SimulationResponse
)
from src.core.active_learner import LearnerConfig, run_method
from src.core.bounds import BoundQuery, BoundReport, bound_report_table
from src.core.errors import INPUT_ERRORS, ConvergenceError
from src.core.excitation_design import (
    DesignResult, ProjectionConfig, design_covariance, design_objective, isotropic_covariance
)
from src.core.simulator import ExcitationPolicy, SystemSpec, simulate
from src.util.config.setting import settings
from src.util.helper.enum import BoundKindEnum, PolicyKindEnum

logger = logging.getLogger(__name__)


# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────
# Erreurs du domaine → HTTP
# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────

@contextmanager
def domain_errors(operation: str) -> Iterator[None]:
    try:
        yield
    except HTTPException:
        raise
    except ConvergenceError as e:
        logger.error(f"Non-convergence pendant {operation} : {e}")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(e))
    except (ValidationError, *INPUT_ERRORS) as e:
        logger.warning(f"Entrée invalide pour {operation} : {e}")
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except ValueError as e:
        logger.warning(f"Paramètres refusés pour {operation} : {e}")
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except Exception as e:
        logger.error(f"Erreur inattendue pendant {operation} : {str(e)}", exc_info=True)
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=f"Erreur inattendue pendant {operation}.")


def _finite_or_none(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────
# Service Conception
# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────

class DesignService:
    _cache: LRUCache = LRUCache(maxsize=settings.DESIGN_CACHE_SIZE)
    _lock = threading.Lock()

    @staticmethod
    def _key(spec: SystemSpec, u_bar: float, tol: float | None) -> tuple:
        return (spec.A.shape, spec.A.tobytes(), spec.B.shape, spec.B.tobytes(), spec.sigma_w, u_bar, tol)

    def design(self, spec: SystemSpec, u_bar: float, tol: float | None = None) -> DesignResult:
        """Conception sur (A, B/σ_w), mise en cache LRU par valeur des entrées"""
        key = self._key(spec, u_bar, tol)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            logger.debug("Conception servie depuis le cache")
            return cached
        result = design_covariance(spec.A, spec.normalized_B, u_bar, tol=tol)
        with self._lock:
            self._cache[key] = result
        return result

    def create(self, data: DesignRequest) -> DesignResponse:
        with domain_errors("la conception"):
            spec = SystemSpec(A=data.A, B=data.B, sigma_w=data.sigma_w)
            result = self.design(spec, data.u_bar, data.tol)
            J_iso = design_objective(spec.A, spec.normalized_B, isotropic_covariance(spec.n_u, data.u_bar))
            logger.info(f"Conception : J = {result.objective:.6g} (isotrope {J_iso:.6g})")
            return DesignResponse(
                U_star=result.U_star.tolist(),
                J=result.objective,
                J_isotropic=J_iso,
                fw_gap=result.fw_gap,
                tol=result.tol,
                iterations=result.iterations,
                converged=result.converged,
                trace_used=result.trace_used,
            )


# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────
# Service Bornes
# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────

class BoundService:
    @staticmethod
    def _default_kinds(data: BoundsRequest) -> list[BoundKindEnum]:
        kinds = [BoundKindEnum.LOWER_COR1, BoundKindEnum.LOWER_COR2]
        if data.tau is not None:
            kinds += [BoundKindEnum.LOWER_EQ5, BoundKindEnum.LOWER_THM1]
        if data.t is not None:
            kinds.append(BoundKindEnum.LSE_CONDITION_PROP4)
        if data.t0 is not None:
            kinds += [BoundKindEnum.EPS_T0, BoundKindEnum.UPPER_THM2]
        return kinds

    @staticmethod
    def _to_response(report: BoundReport) -> BoundReportResponse:
        return BoundReportResponse(
            kind=report.kind,
            value=_finite_or_none(report.value),
            unbounded=math.isinf(report.value),
            lhs=_finite_or_none(report.lhs),
            rhs=_finite_or_none(report.rhs),
            satisfied=report.satisfied,
            warnings=report.warnings,
            inputs_echo={k: _finite_or_none(v) for k, v in report.inputs_echo.items()},
            label=report.label,
        )

    def evaluate(self, data: BoundsRequest) -> list[BoundReportResponse]:
        with domain_errors("l'évaluation des bornes"):
            query = BoundQuery(epsilon=data.epsilon, delta=data.delta, u_bar=data.u_bar, constants=data.constants)
            kinds = data.kinds or self._default_kinds(data)
            reports = bound_report_table(
                np.asarray(data.A), np.asarray(data.B), query, kinds, tau=data.tau, t=data.t, t0=data.t0
            )
            logger.info(f"{len(reports)} borne(s) évaluée(s)")
            return [self._to_response(r) for r in reports]


# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────
# Service Simulation
# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────

class SimulationService:
    def create(self, data: SimulationRequest) -> SimulationResponse:
        with domain_errors("la simulation"):
            spec = SystemSpec(A=data.A, B=data.B, sigma_w=data.sigma_w)
            if data.policy.kind == PolicyKindEnum.ZERO:
                policy = ExcitationPolicy.zero()
            elif data.policy.kind == PolicyKindEnum.ISOTROPIC:
                policy = ExcitationPolicy.isotropic(data.policy.u_bar)
            else:
                policy = ExcitationPolicy.from_covariance(data.policy.U, data.policy.u_bar)
            traj = simulate(spec, policy, data.noise, data.horizon, data.seed, data.reset_at)
            logger.info(f"Simulation de {data.horizon} pas (seed {data.seed})")
            return SimulationResponse(
                seed=traj.seed, horizon=traj.horizon, states=traj.states.tolist(), inputs=traj.inputs.tolist()
            )


# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────
# Service Apprentissage
# ────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────────

class LearnerService:
    def run(self, data: LearnerRunRequest) -> LearnerRunResponse:
        with domain_errors("l'apprentissage"):
            spec = SystemSpec(A=data.system.A, B=data.system.B, sigma_w=data.system.sigma_w)
            cfg = LearnerConfig(
                u_bar=data.u_bar,
                total_horizon=data.total_horizon,
                t0=data.t0,
                reset=data.reset,
                projection=ProjectionConfig(d=data.stability_margin),
                noise=data.noise,
            )
            run = run_method(spec, cfg, data.method, data.seed)
            logger.info(f"Exécution {run.method.value} (seed {run.seed}) : erreur finale {run.final_error:.6g}")
            return LearnerRunResponse(
                method=run.method,
                seed=run.seed,
                t0=cfg.t0,
                times=run.times,
                errors=run.errors,
                U_hat=run.U_hat.tolist(),
                A_bar_t0=run.A_bar_t0.tolist() if run.A_bar_t0 is not None else None,
                projected=run.projected,
                J_hat=run.design.objective if run.design is not None else None,
            )
