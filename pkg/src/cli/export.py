"""Écriture des résultats : CSV déterministes, rapports texte et résumés JSON."""

import json
import logging
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from src.core.active_learner import LearnerRun
from src.core.excitation_design import DesignResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _prepare(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    """CSV séparé par des virgules, en-tête, 17 chiffres significatifs, fins de ligne LF"""
    path = _prepare(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def _format_float(value: float) -> str:
    return FLOAT_FORMAT % value


def design_report_text(result: DesignResult, extra: dict[str, float] | None = None) -> str:
    """Rapport clé = valeur d'une conception"""
    lines = [
        f"J = {_format_float(result.objective)}",
        f"fw_gap = {_format_float(result.fw_gap)}",
        f"tol = {_format_float(result.tol)}",
        f"iterations = {result.iterations}",
        f"converged = {str(result.converged).lower()}",
        f"trace_used = {_format_float(result.trace_used)}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {_format_float(value)}")
    U = np.atleast_2d(result.U_star)
    for i in range(U.shape[0]):
        for j in range(U.shape[1]):
            lines.append(f"U_star[{i + 1},{j + 1}] = {_format_float(U[i, j])}")
    return "\n".join(lines) + "\n"


def runs_frame(runs: Sequence[tuple[int, LearnerRun]]) -> pd.DataFrame:
    """Format long (trial, seed, t, error), une ligne par instant enregistré"""
    rows = [
        {"trial": trial, "seed": run.seed, "t": t, "error": error}
        for trial, run in runs
        for t, error in run.errors_at_log_times
    ]
    return pd.DataFrame(rows, columns=["trial", "seed", "t", "error"])


def write_json(data: dict[str, Any], path: Path) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
