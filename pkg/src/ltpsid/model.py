"""Periodic state-space models and their derived responses.

A linear time-periodic (LTP) system is described by matrix sequences
``A_t, B_t, C_t`` that repeat with period ``P``:

    x(t+1) = A_t x(t) + B_t u(t)
    y(t)   = C_t x(t)

The system is strictly causal (no feedthrough term). All time indices are
cyclic: the matrix at time ``t`` is the stored matrix at ``t mod P``, for
any integer ``t`` including negative ones.

This module provides the model type plus the quantities the identification
pipeline is checked against: the monodromy matrix, periodic impulse
responses, their time-aliased closed form, the lifted LTI realization, and
the exact frequency response of the lifted system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateGain,
    DimensionMismatch,
    NumericalError,
    SingularMatrix,
)

__all__ = [
    "LtpModel",
    "ImpulseResponseTable",
    "LiftedLtiModel",
    "LiftedFrequencyResponse",
    "Stability",
    "validate",
    "monodromy",
    "is_stable",
    "impulse_response",
    "aliased_impulse_response_true",
    "lift_model",
    "true_lifted_frequency_response",
    "normalize_gain",
]


def _as_matrix_tuple(mats: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    out = []
    for m in mats:
        arr = np.array(m, dtype=np.float64)
        arr = np.atleast_2d(arr)
        arr.flags.writeable = False
        out.append(arr)
    return tuple(out)


@dataclass(frozen=True)
class LtpModel:
    """Strictly causal LTP state-space model with period ``len(A)``.

    Attributes:
        A: P state matrices, each (n_x, n_x).
        B: P input matrices, each (n_x, n_u).
        C: P output matrices, each (n_y, n_x).
    """

    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]
    C: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", _as_matrix_tuple(self.A))
        object.__setattr__(self, "B", _as_matrix_tuple(self.B))
        object.__setattr__(self, "C", _as_matrix_tuple(self.C))
        validate(self)

    @property
    def P(self) -> int:
        return len(self.A)

    @property
    def nx(self) -> int:
        return self.A[0].shape[0]

    @property
    def nu(self) -> int:
        return self.B[0].shape[1]

    @property
    def ny(self) -> int:
        return self.C[0].shape[0]

    def A_at(self, t: int) -> np.ndarray:
        """State matrix at time ``t`` (cyclic indexing)."""
        return self.A[t % self.P]

    def B_at(self, t: int) -> np.ndarray:
        return self.B[t % self.P]

    def C_at(self, t: int) -> np.ndarray:
        return self.C[t % self.P]


def validate(model: LtpModel) -> None:
    """Check dimensional consistency of all P matrices.

    Raises ``DimensionMismatch`` naming the first offending sequence and
    index, or ``ConfigError`` if the sequences are empty or of unequal
    length.
    """
    P = len(model.A)
    if P < 1:
        raise ConfigError("model needs at least one set of matrices (P >= 1)")
    if len(model.B) != P or len(model.C) != P:
        raise ConfigError(
            f"A, B, C must all have length P={P}, "
            f"got {len(model.A)}, {len(model.B)}, {len(model.C)}"
        )
    nx = model.A[0].shape[0]
    nu = model.B[0].shape[1]
    ny = model.C[0].shape[0]
    for name, mats, expected in (
        ("A", model.A, (nx, nx)),
        ("B", model.B, (nx, nu)),
        ("C", model.C, (ny, nx)),
    ):
        for i, m in enumerate(mats):
            if m.shape != expected:
                raise DimensionMismatch(
                    f"{name}[{i}] has shape {m.shape}, expected {expected}"
                )


def monodromy(model: LtpModel, t: int = 0) -> np.ndarray:
    """State transition over one full period ending just before time ``t``.

    Returns the ordered product ``A_{t-1} A_{t-2} ... A_{t-P}``. The result
    is P-periodic in ``t`` and its eigenvalue multiset is the same for
    every ``t``.
    """
    M = np.eye(model.nx)
    for s in range(1, model.P + 1):
        M = M @ model.A_at(t - s)
    return M


class Stability(NamedTuple):
    stable: bool
    spectral_radius: float


def is_stable(model: LtpModel) -> Stability:
    """Stability verdict from the spectral radius of the monodromy matrix."""
    try:
        eigs = np.linalg.eigvals(monodromy(model, 0))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed on monodromy matrix: {exc}")
    rho = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return Stability(stable=rho < 1.0, spectral_radius=rho)


def impulse_response(model: LtpModel, t: int, r: int) -> np.ndarray:
    """Output at time ``t`` caused by a unit input ``r`` steps earlier.

    Computes ``C_t A_{t-1} ... A_{t-r+1} B_{t-r}`` with cyclic indexing;
    the state-matrix product is empty for ``r = 1``. Requires ``r >= 1``
    (the system is strictly causal, so earlier lags are zero).
    """
    if r < 1:
        raise ConfigError(f"impulse-response lag must be >= 1, got {r}")
    M = model.C_at(t)
    for s in range(1, r):
        M = M @ model.A_at(t - s)
    return M @ model.B_at(t - r)


@dataclass(frozen=True)
class ImpulseResponseTable:
    """Periodic impulse-response coefficients for lags ``1..max_lag``.

    ``values[t, r-1]`` holds the (n_y, n_u) coefficient for tag time ``t``
    and lag ``r``; tag times are cyclic with period ``P``.
    """

    P: int
    max_lag: int
    values: np.ndarray = field(repr=False)  # (P, max_lag, n_y, n_u)

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 4 or arr.shape[:2] != (self.P, self.max_lag):
            raise ConfigError(
                f"impulse table values must have shape (P, max_lag, ny, nu), got {arr.shape}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def ny(self) -> int:
        return self.values.shape[2]

    @property
    def nu(self) -> int:
        return self.values.shape[3]

    def entry(self, t: int, r: int) -> np.ndarray:
        if not 1 <= r <= self.max_lag:
            raise ConfigError(f"lag {r} outside table range 1..{self.max_lag}")
        return self.values[t % self.P, r - 1]


def _inverse_of_identity_minus(M: np.ndarray) -> np.ndarray:
    """Invert (I - M), raising ``SingularMatrix`` when it is numerically singular."""
    resolvent = np.eye(M.shape[0]) - M
    if M.shape[0] == 0:
        return resolvent
    cond = np.linalg.cond(resolvent)
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularMatrix(
            "I - monodromy^N is singular to working precision; "
            "the model is not stable"
        )
    return np.linalg.inv(resolvent)


def aliased_impulse_response_true(model: LtpModel, N: int) -> ImpulseResponseTable:
    """Impulse response folded over records of ``N`` periods.

    Entry (t, r) is the sum of the impulse response over all lags congruent
    to ``r`` modulo ``N*P``, which has the closed form
    ``C_t (I - Psi_t^N)^{-1} A_{t-1} ... A_{t-r+1} B_{t-r}`` for a stable
    model with monodromy ``Psi_t``.
    """
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}")
    P, max_lag = model.P, N * model.P
    values = np.empty((P, max_lag, model.ny, model.nu))
    for t in range(P):
        psi_pow = np.linalg.matrix_power(monodromy(model, t), N)
        left = model.C_at(t) @ _inverse_of_identity_minus(psi_pow)
        for r in range(1, max_lag + 1):
            values[t, r - 1] = left @ model.B_at(t - r)
            left = left @ model.A_at(t - r)
    return ImpulseResponseTable(P=P, max_lag=max_lag, values=values)


@dataclass(frozen=True)
class LiftedLtiModel:
    """LTI realization whose inputs/outputs stack one period of the LTP signals.

    The feedthrough is block lower-triangular with zero diagonal blocks:
    within a period, the output at slot ``l`` depends only on inputs at
    slots ``m < l``.
    """

    A: np.ndarray  # (n_x, n_x)
    B: np.ndarray  # (n_x, P*n_u)
    C: np.ndarray  # (P*n_y, n_x)
    D: np.ndarray  # (P*n_y, P*n_u)


def lift_model(model: LtpModel) -> LiftedLtiModel:
    """Stack one period of inputs and outputs into a single LTI step.

    The lifted state is the LTP state sampled at the start of each period
    (time 0 mod P), so the lifted state matrix is the monodromy at t=0.
    """
    P, nx, nu, ny = model.P, model.nx, model.nu, model.ny
    # phi[l] propagates the state from the period start to slot l.
    phi = [np.eye(nx)]
    for l in range(1, P + 1):
        phi.append(model.A_at(l - 1) @ phi[l - 1])
    A_lift = phi[P]
    B_lift = np.zeros((nx, P * nu))
    for m in range(P):
        # State response at the next period start to an input at slot m.
        prop = np.eye(nx)
        for s in range(m + 1, P):
            prop = model.A_at(s) @ prop
        B_lift[:, m * nu : (m + 1) * nu] = prop @ model.B_at(m)
    C_lift = np.zeros((P * ny, nx))
    for l in range(P):
        C_lift[l * ny : (l + 1) * ny, :] = model.C_at(l) @ phi[l]
    D_lift = np.zeros((P * ny, P * nu))
    for l in range(P):
        for m in range(l):
            D_lift[l * ny : (l + 1) * ny, m * nu : (m + 1) * nu] = impulse_response(
                model, l, l - m
            )
    return LiftedLtiModel(A=A_lift, B=B_lift, C=C_lift, D=D_lift)


@dataclass(frozen=True)
class LiftedFrequencyResponse:
    """Frequency response of the lifted system on the N-point DFT grid.

    ``G[k]`` is the (P*n_y, P*n_u) complex response at angular frequency
    ``2*pi*k/N``. When derived from real data the grid is conjugate
    symmetric: ``G[k] == conj(G[(N-k) % N])``.
    """

    P: int
    ny: int
    nu: int
    G: np.ndarray = field(repr=False)  # (N, P*ny, P*nu) complex

    def __post_init__(self) -> None:
        arr = np.asarray(self.G, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1:] != (self.P * self.ny, self.P * self.nu):
            raise ConfigError(
                f"frequency response must have shape (N, P*ny, P*nu), got {arr.shape}"
            )
        object.__setattr__(self, "G", arr)

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies 2*pi*k/N of the grid."""
        return 2.0 * np.pi * np.arange(self.N) / self.N

    def block(self, k: int, l: int, m: int) -> np.ndarray:
        """(n_y, n_u) block of the response at grid point k, output slot l, input slot m."""
        return self.G[
            k, l * self.ny : (l + 1) * self.ny, m * self.nu : (m + 1) * self.nu
        ]


def true_lifted_frequency_response(model: LtpModel, N: int) -> LiftedFrequencyResponse:
    """Exact frequency response of the lifted system on the N-point grid.

    Evaluates ``C (zI - A)^{-1} B + D`` of the lifted realization at
    ``z = exp(2*pi*j*k/N)`` for ``k = 0..N-1``.
    """
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}")
    lifted = lift_model(model)
    nx = lifted.A.shape[0]
    G = np.empty((N, lifted.C.shape[0], lifted.B.shape[1]), dtype=np.complex128)
    eye = np.eye(nx)
    for k in range(N):
        z = np.exp(2j * np.pi * k / N)
        zIA = z * eye - lifted.A
        cond = np.linalg.cond(zIA) if nx else 1.0
        if not np.isfinite(cond) or cond > 1e14:
            raise SingularMatrix(
                f"zI - A singular at grid point {k}; the lifted state matrix "
                "has an eigenvalue on the unit circle"
            )
        G[k] = lifted.C @ np.linalg.solve(zIA, lifted.B) + lifted.D
    return LiftedFrequencyResponse(P=model.P, ny=model.ny, nu=model.nu, G=G)


def dc_gain(model: LtpModel) -> float:
    """Average steady-state gain: mean of all entries of the lifted response at z=1."""
    lifted = lift_model(model)
    G0 = lifted.C @ _inverse_of_identity_minus(lifted.A) @ lifted.B + lifted.D
    return float(np.mean(G0))


def normalize_gain(model: LtpModel) -> LtpModel:
    """Rescale every input matrix so the average steady-state gain is 1.

    The gain is the arithmetic mean of all entries of the lifted response
    at z=1; it is linear in B, so dividing each ``B_t`` by it is an
    idempotent normalization.
    """
    gamma = dc_gain(model)
    if abs(gamma) < 1e-12:
        raise DegenerateGain(
            f"average steady-state gain {gamma:.3e} too small to normalize"
        )
    return LtpModel(A=model.A, B=tuple(b / gamma for b in model.B), C=model.C)
