"""Empirical transfer function estimation for the lifted system.

With J experiments the lifted input/output spectra at each grid frequency
form (P*n_u, J) and (P*n_y, J) matrices; the frequency response estimate
is the least-squares solution G_hat = Y_tilde @ pinv(U_tilde), computed
per frequency with an SVD-based right pseudo-inverse. It is exact when
J = P*n_u and the minimum-residual fit when J is larger.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficient
from .model import LiftedFrequencyResponse
from .signal import LiftedSpectra

__all__ = ["etfe", "residual_energy", "LiftedFrequencyResponse"]

DEFAULT_RANK_TOL = 1e-10


def etfe(spectra: LiftedSpectra, rank_tol: float = DEFAULT_RANK_TOL) -> LiftedFrequencyResponse:
    """Per-frequency least-squares estimate of the lifted frequency response.

    ``rank_tol`` is relative to the largest singular value of the lifted
    input spectrum at each frequency; if fewer than P*n_u singular values
    exceed it, the excitation does not pin down the response there and
    ``RankDeficient`` is raised naming the offending grid point.
    """
    N, rows_u, J = spectra.U.shape
    P = spectra.P
    nu = rows_u // P
    ny = spectra.Y.shape[1] // P
    G = np.empty((N, spectra.Y.shape[1], rows_u), dtype=np.complex128)
    for k in range(N):
        Uk = spectra.U[k]
        svals = np.linalg.svd(Uk, compute_uv=False)
        if svals.size == 0 or svals[-1] <= rank_tol * svals[0]:
            raise RankDeficient(k, float(svals[-1]) if svals.size else 0.0)
        G[k] = spectra.Y[k] @ np.linalg.pinv(Uk, rcond=rank_tol)
    return LiftedFrequencyResponse(P=P, ny=ny, nu=nu, G=G)


def residual_energy(
    spectra: LiftedSpectra, response: LiftedFrequencyResponse
) -> np.ndarray:
    """Frobenius norm of Y_tilde - G_hat @ U_tilde at each grid frequency.

    Zero (to rounding) whenever the equations are consistent, in
    particular for J = P*n_u and for noise-free steady-state data.
    """
    if response.N != spectra.N:
        raise ValueError(
            f"grid sizes differ: response N={response.N}, spectra N={spectra.N}"
        )
    out = np.empty(spectra.N)
    for k in range(spectra.N):
        out[k] = np.linalg.norm(spectra.Y[k] - response.G[k] @ spectra.U[k], "fro")
    return out
