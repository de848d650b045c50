from typing import List

from fastapi import APIRouter, status
from starlette.concurrency import run_in_threadpool

from src.api.schema import (
    BoundReportResponse, BoundsRequest, DesignRequest, DesignResponse,
    LearnerRunRequest, LearnerRunResponse, SimulationRequest, SimulationResponse
)
from src.api.service import BoundService, DesignService, LearnerService, SimulationService


# ============================
# Router Conceptions
# ============================
designs = APIRouter(
    prefix="/designs",
    tags=["designs"],
)

@designs.post(
    "",
    response_model=DesignResponse,
    status_code=status.HTTP_200_OK,
    summary="Concevoir une covariance d'excitation",
    description="Maximise λ_min(Γ_∞(A) + Ξ_∞(A, U)) sous tr(U) ≤ ū par Frank-Wolfe sur le système renormalisé (A, B/σ_w). Les résultats sont mis en cache. Retourne 422 si A est instable."
)
async def create_design(data: DesignRequest):
    service = DesignService()
    return await run_in_threadpool(service.create, data)


# ============================
# Router Bornes
# ============================
bounds = APIRouter(
    prefix="/bounds",
    tags=["bounds"],
)

@bounds.post(
    "",
    response_model=List[BoundReportResponse],
    summary="Évaluer des bornes de complexité",
    description="Évalue les bornes demandées (à constantes universelles près). Sans liste explicite, les bornes évaluables avec les paramètres fournis (tau, t, t0) sont retournées."
)
async def evaluate_bounds(data: BoundsRequest):
    service = BoundService()
    return await run_in_threadpool(service.evaluate, data)


# ============================
# Router Simulations
# ============================
simulations = APIRouter(
    prefix="/simulations",
    tags=["simulations"],
)

@simulations.post(
    "",
    response_model=SimulationResponse,
    summary="Simuler une trajectoire",
    description="Simule x_{t+1} = A x_t + B u_t + w_t depuis x_0 = 0 avec la politique d'excitation et la graine données."
)
async def create_simulation(data: SimulationRequest):
    service = SimulationService()
    return await run_in_threadpool(service.create, data)


# ============================
# Router Apprentissage
# ============================
learners = APIRouter(
    prefix="/learners",
    tags=["learners"],
)

@learners.post(
    "/runs",
    response_model=LearnerRunResponse,
    summary="Lancer une exécution d'apprentissage",
    description="Exécute l'apprentissage actif en deux phases ou une ligne de base (isotrope, oracle) et retourne la courbe d'erreur ‖Â_t - A‖."
)
async def create_learner_run(data: LearnerRunRequest):
    service = LearnerService()
    return await run_in_threadpool(service.run, data)
