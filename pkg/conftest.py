"""Fixtures partagées par les tests."""

import numpy as np
import pytest

from src.cli.config import jordan
from src.core.simulator import SystemSpec


def random_stable(rng: np.random.Generator, n: int, radius: float = 0.95) -> np.ndarray:
    """Matrice aléatoire n×n remise à l'échelle vers un rayon spectral donné"""
    A = rng.standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    return A * (radius * rng.uniform(0.2, 1.0) / rho)


def random_psd(rng: np.random.Generator, n: int, trace: float | None = None) -> np.ndarray:
    M = rng.standard_normal((n, n))
    S = M @ M.T
    if trace is not None:
        S *= trace / np.trace(S)
    return S


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def jordan4():
    return jordan(4, 0.8)


@pytest.fixture
def jordan_system(jordan4):
    """Bloc de Jordan 4×4 (0.8), B = I, σ_w = 0.1"""
    return SystemSpec(A=jordan4, B=np.eye(4), sigma_w=0.1)


@pytest.fixture
def scalar_system():
    return SystemSpec(A=[[0.8]], B=[[1.0]], sigma_w=1.0)


@pytest.fixture
def smoke_config_file(tmp_path):
    path = tmp_path / "smoke.toml"
    path.write_text(
        f"""
[system]
A = "jordan(2, 0.5)"
B = "identity(2)"
sigma_w = 0.1

[experiment]
methods = ["algorithm1", "isotropic", "oracle"]
trials = 2
horizon = 100
t0 = 20
u_bar = 1.0
master_seed = 7
output_dir = "{(tmp_path / 'out').as_posix()}"
design_tol = 1e-4

[bounds]
epsilon = 0.1
delta = 0.1
kinds = ["lower_eq5", "lower_cor1", "lower_cor2"]
tau = 100
""",
        encoding="utf-8",
    )
    return path
