"""
Interface en ligne de commande : simulate, design, bounds, learn, experiment.

Codes de sortie : 0 succès, 1 échec d'exécution, 2 entrée invalide.
"""

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, model_validator

from src.cli.config import RunConfig, load_config
from src.cli.export import design_report_text, runs_frame, write_frame, write_json
from src.core.active_learner import LearnerConfig, LearnerRun, oracle_design, run_method
from src.core.bounds import BoundQuery, UniversalConstants, bound_report_table, reports_to_frame
from src.core.errors import UnstableMatrixError
from src.core.excitation_design import DesignResult, design_covariance, design_objective, isotropic_covariance
from src.core.linalg_core import spectral_radius
from src.core.simulator import SystemSpec, derive_seed, method_key, simulate
from src.util.config.setting import configure_logging, settings
from src.util.helper.enum import MethodEnum

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_INPUT = 2

SIMULATE_KEY = "simulate"


# ──────────────────────────────────────────────────────────────────────────────
# Agrégation
# ──────────────────────────────────────────────────────────────────────────────

class AggregateCurve(BaseModel):
    method: MethodEnum
    times: list[int]
    mean: list[float]
    p10: list[float]
    p90: list[float]

    @model_validator(mode="after")
    def check_percentiles(self):
        if any(lo > hi for lo, hi in zip(self.p10, self.p90)):
            raise ValueError("p10 > p90")
        return self

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "mean": self.mean, "p10": self.p10, "p90": self.p90})


def nearest_rank(values: Sequence[float], percentile: float) -> float:
    """Percentile au rang le plus proche : élément de rang ⌈p n / 100⌉ des valeurs triées"""
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        raise ValueError("Aucune valeur à agréger")
    rank = max(1, math.ceil(percentile / 100.0 * ordered.size - 1e-12))
    return float(ordered[rank - 1])


def aggregate_curve(method: MethodEnum, frame: pd.DataFrame) -> AggregateCurve:
    grouped = frame.groupby("t", sort=True)["error"]
    stats = grouped.agg(
        mean="mean",
        p10=lambda v: nearest_rank(v, 10),
        p90=lambda v: nearest_rank(v, 90),
    )
    return AggregateCurve(
        method=method,
        times=[int(t) for t in stats.index],
        mean=stats["mean"].tolist(),
        p10=stats["p10"].tolist(),
        p90=stats["p90"].tolist(),
    )


# ──────────────────────────────────────────────────────────────────────────────
# Expérience Monte-Carlo
# ──────────────────────────────────────────────────────────────────────────────

TrialTask = tuple[int, SystemSpec, LearnerConfig, MethodEnum, int, Optional[DesignResult]]


def _run_trial(task: TrialTask) -> tuple[int, Optional[LearnerRun], Optional[str]]:
    trial, spec, cfg, method, seed, oracle = task
    try:
        return trial, run_method(spec, cfg, method, seed, oracle), None
    except Exception as e:
        logger.error(f"Essai {method.value} #{trial} (seed {seed}) en échec : {e}")
        return trial, None, f"{type(e).__name__}: {e}"


def trial_seed(master_seed: int, method: MethodEnum, trial: int) -> int:
    return derive_seed(master_seed, method_key(method.value), trial)


class ExperimentOutcome(BaseModel):
    curves: dict[str, AggregateCurve]
    summary: dict
    failures: list[dict]


def run_experiment(config: RunConfig, workers: int = 1) -> ExperimentOutcome:
    """
    Lance chaque méthode sur `trials` graines dérivées de (graine maîtresse, méthode, essai),
    écrit errors_<méthode>.csv, curve_<méthode>.csv, summary.json et failures.json en cas d'échec.
    Les sorties ne dépendent pas du nombre de workers.
    """
    exp = config.experiment
    spec = config.system.to_spec()
    cfg = exp.learner_config(config.noise)
    out_dir = Path(exp.output_dir)
    stable = spectral_radius(spec.A) < 1.0

    if MethodEnum.ORACLE in exp.methods and not stable:
        raise UnstableMatrixError(spectral_radius(spec.A))
    oracle = oracle_design(spec, cfg) if stable else None

    tasks: list[TrialTask] = [
        (trial, spec, cfg, method, trial_seed(exp.master_seed, method, trial), oracle)
        for method in exp.methods
        for trial in range(exp.trials)
    ]
    logger.info(f"Expérience : {len(exp.methods)} méthode(s) × {exp.trials} essais, {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_trial(task) for task in tasks]

    curves: dict[str, AggregateCurve] = {}
    methods_summary: dict[str, dict] = {}
    failures: list[dict] = []
    designed_J: list[float] = []
    for method in exp.methods:
        method_results = [(task, res) for task, res in zip(tasks, results) if task[3] == method]
        runs = []
        for task, (trial, run, error) in method_results:
            if run is None:
                failures.append({"method": method.value, "trial": trial, "seed": task[4], "error": error})
            else:
                runs.append((trial, run))
        if not runs:
            continue
        frame = runs_frame(runs)
        write_frame(frame, out_dir / f"errors_{method.value}.csv")
        curve = aggregate_curve(method, frame)
        write_frame(curve.to_frame(), out_dir / f"curve_{method.value}.csv")
        curves[method.value] = curve
        methods_summary[method.value] = {
            "trials_completed": len(runs),
            "final_t": curve.times[-1],
            "final_mean": curve.mean[-1],
            "final_p10": curve.p10[-1],
            "final_p90": curve.p90[-1],
        }
        if method == MethodEnum.ALGORITHM1:
            methods_summary[method.value]["projected_trials"] = sum(run.projected for _, run in runs)
            if stable:
                designed_J = [design_objective(spec.A, spec.normalized_B, run.U_hat) for _, run in runs]

    design_summary = {"oracle_J": None, "isotropic_J": None, "algorithm1_J_mean": None}
    if stable:
        design_summary["oracle_J"] = oracle.objective
        design_summary["isotropic_J"] = design_objective(
            spec.A, spec.normalized_B, isotropic_covariance(spec.n_u, exp.u_bar)
        )
        if designed_J:
            design_summary["algorithm1_J_mean"] = float(np.mean(designed_J))

    summary = {
        "config": config.resolved(),
        "methods": methods_summary,
        "design": design_summary,
        "failures": len(failures),
    }
    write_json(summary, out_dir / "summary.json")
    if failures:
        write_json({"failures": failures}, out_dir / "failures.json")
        logger.error(f"{len(failures)} essai(s) en échec, voir {out_dir / 'failures.json'}")
    logger.info(f"✅ Résultats écrits dans {out_dir}")
    return ExperimentOutcome(curves=curves, summary=summary, failures=failures)


# ──────────────────────────────────────────────────────────────────────────────
# Sous-commandes
# ──────────────────────────────────────────────────────────────────────────────

def cmd_simulate(config: RunConfig, args: argparse.Namespace) -> int:
    exp = config.experiment
    spec = config.system.to_spec()
    policy = config.simulation.to_policy(exp.u_bar)
    out_dir = Path(exp.output_dir)
    for trial in range(exp.trials):
        seed = derive_seed(exp.master_seed, method_key(SIMULATE_KEY), trial)
        traj = simulate(spec, policy, config.noise, exp.horizon, seed, config.simulation.reset_at)
        path = traj.to_csv(out_dir / f"trajectory_{trial:04d}.csv")
        print(f"{path}")
    return EXIT_OK


def cmd_design(config: RunConfig, args: argparse.Namespace) -> int:
    exp = config.experiment
    spec = config.system.to_spec()
    result = design_covariance(spec.A, spec.normalized_B, exp.u_bar, tol=exp.design_tol)
    J_iso = design_objective(spec.A, spec.normalized_B, isotropic_covariance(spec.n_u, exp.u_bar))
    report = design_report_text(result, {"J_isotropic": J_iso, "J_ratio": result.objective / J_iso})
    print(report, end="")
    if args.out:
        (Path(args.out) / "design.txt").parent.mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "design.txt").write_text(report, encoding="utf-8")
    return EXIT_OK if result.fw_gap <= result.tol else EXIT_FAILURE


def cmd_bounds(config: RunConfig, args: argparse.Namespace) -> int:
    exp, bounds = config.experiment, config.bounds
    spec = config.system.to_spec()
    query = BoundQuery(epsilon=bounds.epsilon, delta=bounds.delta, u_bar=exp.u_bar, constants=bounds.constants)
    reports = bound_report_table(
        spec.A, spec.normalized_B, query, bounds.kinds,
        tau=bounds.tau, t=bounds.t, t0=bounds.t0 or exp.t0,
    )
    frame = reports_to_frame(reports)
    print(f"Bornes ({reports[0].label if reports else ''})")
    print(frame.to_string(index=False))
    write_frame(frame, Path(exp.output_dir) / "bounds.csv")
    return EXIT_OK


def cmd_learn(config: RunConfig, args: argparse.Namespace) -> int:
    exp = config.experiment
    spec = config.system.to_spec()
    cfg = exp.learner_config(config.noise)
    seed = trial_seed(exp.master_seed, MethodEnum.ALGORITHM1, 0)
    run = run_method(spec, cfg, MethodEnum.ALGORITHM1, seed)
    write_frame(runs_frame([(0, run)]), Path(exp.output_dir) / "learn_algorithm1.csv")
    print(f"seed = {seed}")
    print(f"t0 = {cfg.t0}")
    print(f"projected = {str(run.projected).lower()}")
    print(f"J(U_hat) = {run.design.objective:.17g}")
    print(f"final_error = {run.final_error:.17g}")
    return EXIT_OK


def cmd_experiment(config: RunConfig, args: argparse.Namespace) -> int:
    outcome = run_experiment(config, workers=args.workers)
    for method, stats in outcome.summary["methods"].items():
        print(f"{method}: t = {stats['final_t']}, erreur moyenne = {stats['final_mean']:.6g}")
    return EXIT_FAILURE if outcome.failures else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "design": cmd_design,
    "bounds": cmd_bounds,
    "learn": cmd_learn,
    "experiment": cmd_experiment,
}


# ──────────────────────────────────────────────────────────────────────────────
# Analyse des arguments
# ──────────────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="fichier TOML (ou summary.json)")
    common.add_argument("--seed", type=int, default=None, help="graine maîtresse")
    common.add_argument("--out", type=str, default=None, help="répertoire de sortie")
    common.add_argument("--tol", type=float, default=None, help="tolérance de Frank-Wolfe")
    common.add_argument("--constants", type=str, default=None, help="c_lower=..,c_prime=..,K=..")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--full", action="store_true", help=f"{settings.FULL_TRIALS} essais")
    common.add_argument("--no-reset", action="store_true", help="pas de remise à zéro de x_t0")
    common.add_argument("--workers", type=int, default=settings.MAX_WORKERS)

    parser = argparse.ArgumentParser(prog="python -m src.cli", description="Identification active de systèmes linéaires")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("simulate", parents=[common], help="trajectoires CSV")
    subparsers.add_parser("design", parents=[common], help="covariance d'excitation optimale")
    subparsers.add_parser("bounds", parents=[common], help="bornes de complexité")
    subparsers.add_parser("learn", parents=[common], help="une exécution de l'algorithme en deux phases")
    subparsers.add_parser("experiment", parents=[common], help="expérience Monte-Carlo")
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    data = config.model_dump(mode="json")
    exp = data["experiment"]
    if args.seed is not None:
        exp["master_seed"] = args.seed
    if args.out is not None:
        exp["output_dir"] = args.out
    if args.tol is not None:
        exp["design_tol"] = args.tol
    if args.full:
        exp["trials"] = settings.FULL_TRIALS
    if args.trials is not None:
        exp["trials"] = args.trials
    if args.no_reset:
        exp["reset"] = False
    if args.constants is not None:
        data["bounds"]["constants"] = UniversalConstants.parse(args.constants).model_dump()
    return RunConfig.model_validate(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](config, args)
    except (ValueError, FileNotFoundError) as e:
        # ValidationError, erreurs de configuration et erreurs du domaine sont des ValueError
        logger.error(f"Entrée invalide : {e}")
        return EXIT_INVALID_INPUT
    except Exception as e:
        logger.exception(f"Échec de la commande {args.command} : {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
