"""Helpers that compare solver output against the oracles."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .quadrature import RadialProfile, TransformParams
from .stokes import evolve_mode_times, invariant_moment
from .weber_orr import _residue

__all__ = ["laplace_of_evolution", "observed_order"]


def laplace_of_evolution(
    k: int,
    w0: RadialProfile,
    taus: Sequence[float],
    radii: Sequence[float],
    params: Optional[TransformParams] = None,
    *,
    horizon: float = 10.0,
    n_nodes: int = 60,
) -> np.ndarray:
    """int_0^inf e^{-tau t} w(t, r) dt of the Robin heat solution, numerically.

    The time integral over [0, horizon] uses Gauss-Legendre in ``u = sqrt(t)``,
    which absorbs the sqrt(t) behaviour of the solution near t = 0.  The rest
    is approximated by ``e^{-tau T} w(T, r) / tau``.  The stationary residue
    term is included for ``|k| >= 2``.  Returns shape ``(len(taus), len(radii))``.
    """
    params = params or TransformParams.default(w0.r0)
    radii = np.asarray(radii, dtype=float)
    r_nodes = np.concatenate([[w0.r0], radii[radii > w0.r0]])
    x, wq = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * math.sqrt(horizon)
    u = half * (x + 1)
    du = half * wq
    times = np.append(u * u, horizon)
    sols = evolve_mode_times(k, w0, times, params, r_nodes=r_nodes, warn=False)
    stationary = _residue(abs(int(k)), w0.r0, invariant_moment(k, w0, params), r_nodes)
    values = np.array([s.values + stationary for s in sols])
    # map requested radii back onto r_nodes (r0 itself may be requested)
    idx = np.searchsorted(r_nodes, radii)
    out = np.empty((len(taus), radii.size), dtype=complex)
    for i, tau in enumerate(taus):
        weights = du * 2 * u * np.exp(-tau * u * u)
        body = weights @ values[:-1]
        tail = math.exp(-tau * horizon) * values[-1] / tau
        out[i] = (body + tail)[idx]
    return out


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> np.ndarray:
    """Convergence orders log(e_i / e_{i+1}) / log(ratio) for successive refinements."""
    e = np.asarray(errors, dtype=float)
    return np.log(e[:-1] / e[1:]) / math.log(ratio)
