"""Excitation, simulation, and spectral preprocessing of periodic experiments.

An experiment drives the system with a periodic input of length ``N*P``
(N periods of the system's period P), waits out the transient, and records
one full repetition of the steady-state response plus measurement noise.
Ensembles bundle J such experiments; lifting and the DFT turn them into
the per-frequency data matrices consumed by the frequency-response
estimator.

All randomized operations are pure functions of their seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, LengthNotDivisible, TransientNotConverged
from .model import LtpModel, is_stable

__all__ = [
    "Experiment",
    "Ensemble",
    "LiftedSpectra",
    "derive_seed",
    "generate_periodic_input",
    "simulate",
    "simulate_steady_state",
    "add_noise",
    "collect_ensemble",
    "lift_signal",
    "unlift_signal",
    "dft_lifted",
    "assemble_spectra",
]

BURN_IN_CAP = 10_000

_ROLE_CODES = {"input": 0, "noise": 1}


def derive_seed(master_seed: int, index: int, role: str) -> int:
    """Deterministic per-experiment seed for one role ("input" or "noise")."""
    ss = np.random.SeedSequence([int(master_seed), int(index), _ROLE_CODES[role]])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Experiment:
    """One input-output record of length N*P.

    ``u`` has shape (N*P, n_u) and ``y`` shape (N*P, n_y). The meta fields
    record how the experiment was produced.
    """

    u: np.ndarray
    y: np.ndarray
    input_seed: int | None = None
    noise_seed: int | None = None
    sigma: float = 0.0
    burn_in_used: int = 0

    def __post_init__(self) -> None:
        u = np.atleast_2d(np.asarray(self.u, dtype=np.float64))
        y = np.atleast_2d(np.asarray(self.y, dtype=np.float64))
        if u.shape[0] != y.shape[0]:
            raise ConfigError(
                f"input and output lengths differ: {u.shape[0]} vs {y.shape[0]}"
            )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    @property
    def length(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class Ensemble:
    """J experiments sharing the same period P and record length N*P.

    Requires ``J >= P * n_u`` so the lifted input spectrum can have full
    row rank at every frequency.
    """

    experiments: tuple[Experiment, ...]
    P: int
    N: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "experiments", tuple(self.experiments))
        if not self.experiments:
            raise ConfigError("ensemble needs at least one experiment")
        length = self.N * self.P
        nu, ny = self.nu, self.ny
        for i, exp in enumerate(self.experiments):
            if exp.length != length:
                raise ConfigError(
                    f"experiment {i} has length {exp.length}, expected N*P={length}"
                )
            if exp.u.shape[1] != nu or exp.y.shape[1] != ny:
                raise ConfigError(
                    f"experiment {i} has channel counts "
                    f"({exp.u.shape[1]}, {exp.y.shape[1]}), expected ({nu}, {ny})"
                )
        if self.J < self.P * nu:
            raise ConfigError(
                f"need J >= P*n_u = {self.P * nu} experiments for full row-rank "
                f"excitation, got J={self.J}"
            )

    @property
    def J(self) -> int:
        return len(self.experiments)

    @property
    def nu(self) -> int:
        return self.experiments[0].u.shape[1]

    @property
    def ny(self) -> int:
        return self.experiments[0].y.shape[1]


def generate_periodic_input(P: int, N: int, n_u: int, seed: int) -> np.ndarray:
    """One full period of excitation: (N*P, n_u) i.i.d. standard normal entries."""
    if P < 1 or N < 1 or n_u < 1:
        raise ConfigError(f"P, N, n_u must be >= 1, got {(P, N, n_u)}")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((N * P, n_u))


def simulate(
    model: LtpModel, u: np.ndarray, x0: np.ndarray | None = None
) -> np.ndarray:
    """Noise-free response to ``u`` from initial state ``x0`` (default zero).

    Time starts at t=0, so ``u[t]`` meets the matrices at index ``t mod P``.
    """
    y, _ = _simulate_with_state(model, np.atleast_2d(np.asarray(u, float)), x0)
    return y


def _simulate_with_state(
    model: LtpModel, u: np.ndarray, x0: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    T = u.shape[0]
    if u.shape[1] != model.nu:
        raise ConfigError(f"input has {u.shape[1]} channels, model expects {model.nu}")
    x = np.zeros(model.nx) if x0 is None else np.asarray(x0, float).reshape(model.nx)
    A, B, C, P = model.A, model.B, model.C, model.P
    y = np.empty((T, model.ny))
    for t in range(T):
        i = t % P
        y[t] = C[i] @ x
        x = A[i] @ x + B[i] @ u[t]
    return y, x


def simulate_steady_state(
    model: LtpModel,
    pattern: np.ndarray,
    burn_in: int | str = "auto",
    tol: float = 1e-10,
) -> Experiment:
    """Steady-state response to a periodically repeated input pattern.

    Repeats ``pattern`` from the zero state until the state at pattern
    start settles (``burn_in="auto"``, change below ``tol`` in Euclidean
    norm between consecutive repetitions, capped at 10^4) or a fixed
    number of repetitions, then records one further repetition.
    """
    pattern = np.atleast_2d(np.asarray(pattern, dtype=np.float64))
    if pattern.shape[0] % model.P != 0:
        raise LengthNotDivisible(
            f"pattern length {pattern.shape[0]} not divisible by P={model.P}"
        )
    x = np.zeros(model.nx)
    if burn_in == "auto":
        reps = 0
        while True:
            _, x_next = _simulate_with_state(model, pattern, x)
            reps += 1
            if float(np.linalg.norm(x_next - x)) < tol:
                x = x_next
                break
            x = x_next
            if reps >= BURN_IN_CAP:
                raise TransientNotConverged(
                    f"state at pattern start did not settle within {BURN_IN_CAP} "
                    f"repetitions (tol={tol:g})"
                )
    else:
        reps = int(burn_in)
        if reps < 0:
            raise ConfigError(f"burn_in must be >= 0, got {reps}")
        for _ in range(reps):
            _, x = _simulate_with_state(model, pattern, x)
    y, _ = _simulate_with_state(model, pattern, x)
    return Experiment(u=pattern, y=y, sigma=0.0, burn_in_used=reps)


def add_noise(
    y: np.ndarray, sigma: float, seed: int, ma_theta: float = 0.0
) -> np.ndarray:
    """Add zero-mean Gaussian measurement noise of std ``sigma`` per channel.

    With ``ma_theta != 0`` the noise is a first-order moving average
    ``(e(t) + theta*e(t-1)) / sqrt(1 + theta^2)`` of i.i.d. draws, which
    keeps the marginal variance at ``sigma^2`` but introduces one-lag
    correlation in time.
    """
    if sigma < 0:
        raise ConfigError(f"sigma must be >= 0, got {sigma}")
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if sigma == 0:
        return y.copy()
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(y.shape)
    if ma_theta != 0.0:
        w = e.copy()
        w[1:] += ma_theta * e[:-1]
        w /= np.sqrt(1.0 + ma_theta**2)
    else:
        w = e
    return y + sigma * w


def collect_ensemble(
    model: LtpModel,
    J: int,
    N: int,
    sigma: float,
    master_seed: int,
    burn_in: int | str = "auto",
    tol: float = 1e-10,
    shared_input: bool = False,
    ma_theta: float = 0.0,
) -> Ensemble:
    """Run J independent steady-state experiments with noisy outputs.

    Each experiment gets a fresh input pattern and an independent noise
    stream, both seeded deterministically from ``master_seed`` and the
    experiment index. ``shared_input=True`` reuses experiment 0's pattern
    everywhere (ablation switch; the default fresh patterns are what make
    the lifted input spectrum full row rank with probability one).
    """
    if J < model.P * model.nu:
        raise ConfigError(
            f"need J >= P*n_u = {model.P * model.nu} experiments, got J={J}"
        )
    stab = is_stable(model)
    if not stab.stable:
        raise ConfigError(
            f"model is not stable (spectral radius {stab.spectral_radius:.4f}); "
            "steady-state data collection requires stability"
        )
    experiments = []
    for i in range(J):
        input_seed = derive_seed(master_seed, 0 if shared_input else i, "input")
        noise_seed = derive_seed(master_seed, i, "noise")
        pattern = generate_periodic_input(model.P, N, model.nu, input_seed)
        clean = simulate_steady_state(model, pattern, burn_in=burn_in, tol=tol)
        y = add_noise(clean.y, sigma, noise_seed, ma_theta=ma_theta)
        experiments.append(
            Experiment(
                u=pattern,
                y=y,
                input_seed=input_seed,
                noise_seed=noise_seed,
                sigma=sigma,
                burn_in_used=clean.burn_in_used,
            )
        )
    return Ensemble(experiments=tuple(experiments), P=model.P, N=N)


def lift_signal(x: np.ndarray, P: int) -> np.ndarray:
    """Stack each run of P consecutive samples into one tall sample.

    Maps an (N*P, n_c) sequence to (N, P*n_c); sample k concatenates the
    original samples ``kP .. kP+P-1``.
    """
    x = np.atleast_2d(np.asarray(x))
    if x.shape[0] % P != 0:
        raise LengthNotDivisible(
            f"sequence length {x.shape[0]} not divisible by P={P}"
        )
    return x.reshape(x.shape[0] // P, P * x.shape[1])


def unlift_signal(xl: np.ndarray, P: int) -> np.ndarray:
    """Inverse of ``lift_signal``: (N, P*n_c) back to (N*P, n_c)."""
    xl = np.atleast_2d(np.asarray(xl))
    if xl.shape[1] % P != 0:
        raise LengthNotDivisible(
            f"lifted width {xl.shape[1]} not divisible by P={P}"
        )
    return xl.reshape(xl.shape[0] * P, xl.shape[1] // P)


def dft_lifted(xl: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT of each lifted channel over the N samples."""
    xl = np.atleast_2d(np.asarray(xl))
    return np.fft.fft(xl, axis=0)


@dataclass(frozen=True)
class LiftedSpectra:
    """Per-frequency data matrices of a lifted ensemble.

    ``U[k]`` is (P*n_u, J) and ``Y[k]`` is (P*n_y, J): column i holds
    experiment i's lifted input/output spectrum at grid frequency
    ``2*pi*k/N``. Real time-domain data makes the grid conjugate
    symmetric.
    """

    P: int
    U: np.ndarray = field(repr=False)  # (N, P*nu, J) complex
    Y: np.ndarray = field(repr=False)  # (N, P*ny, J) complex

    def __post_init__(self) -> None:
        U = np.asarray(self.U, dtype=np.complex128)
        Y = np.asarray(self.Y, dtype=np.complex128)
        if U.ndim != 3 or Y.ndim != 3 or U.shape[0] != Y.shape[0] or U.shape[2] != Y.shape[2]:
            raise ConfigError(
                f"spectra shapes incompatible: U {U.shape}, Y {Y.shape}"
            )
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "Y", Y)

    @property
    def N(self) -> int:
        return self.U.shape[0]

    @property
    def J(self) -> int:
        return self.U.shape[2]

    @property
    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.N) / self.N


def assemble_spectra(ensemble: Ensemble) -> LiftedSpectra:
    """Lift and DFT every experiment; stack the spectra as columns per frequency."""
    P = ensemble.P
    U = np.stack(
        [dft_lifted(lift_signal(e.u, P)) for e in ensemble.experiments], axis=-1
    )
    Y = np.stack(
        [dft_lifted(lift_signal(e.y, P)) for e in ensemble.experiments], axis=-1
    )
    return LiftedSpectra(P=P, U=U, Y=Y)
