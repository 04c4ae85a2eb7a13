import numpy as np
import pytest

from ltpsid import fixtures
from ltpsid.model import LtpModel, normalize_gain


@pytest.fixture(scope="session")
def example1():
    return fixtures.example1()


@pytest.fixture(scope="session")
def example2():
    return fixtures.example2()


@pytest.fixture(scope="session")
def example1_norm():
    return normalize_gain(fixtures.example1())


@pytest.fixture(scope="session")
def example2_norm():
    return normalize_gain(fixtures.example2())


def random_stable_model(
    seed: int,
    P: int | None = None,
    nx: int | None = None,
    ny: int | None = None,
    nu: int | None = None,
    rho_max: float = 0.9,
) -> LtpModel:
    """Random LTP model rescaled so the monodromy spectral radius is below rho_max."""
    rng = np.random.default_rng(seed)
    P = P or int(rng.integers(1, 4))
    nx = nx or int(rng.integers(1, 4))
    ny = ny or int(rng.integers(1, 3))
    nu = nu or int(rng.integers(1, 3))
    A = [rng.uniform(-1, 1, (nx, nx)) for _ in range(P)]
    psi = np.eye(nx)
    for a in reversed(A):
        psi = psi @ a  # A_{P-1} ... A_0
    rho = max(np.abs(np.linalg.eigvals(psi)), default=0.0)
    if rho >= rho_max:
        scale = (rho_max / rho) ** (1.0 / P) * 0.99
        A = [a * scale for a in A]
    B = [rng.uniform(-1, 1, (nx, nu)) for _ in range(P)]
    C = [rng.uniform(-1, 1, (ny, nx)) for _ in range(P)]
    return LtpModel(A=tuple(A), B=tuple(B), C=tuple(C))


def impulse_series_oracle(model: LtpModel, t: int, lags: int) -> np.ndarray:
    """Impulse-response coefficients g^t_r for r = 1..lags by direct accumulation."""
    out = np.empty((lags, model.ny, model.nu))
    left = model.C_at(t)
    for r in range(1, lags + 1):
        out[r - 1] = left @ model.B_at(t - r)
        left = left @ model.A_at(t - r)
    return out
