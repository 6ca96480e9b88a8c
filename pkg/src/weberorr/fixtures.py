"""Smooth test profiles used by the verification suite, the demos and the tests.

All bumps vanish to second order at the disc, so they satisfy the Robin
condition for every mode.  ``compliant_bump`` subtracts a second bump to
put the conserved moment at a prescribed value.
"""

from __future__ import annotations

import numpy as np

from .quadrature import RadialProfile, TransformParams
from .weber_orr import moment

__all__ = ["radial_grid", "stretched_grid", "bump", "bump_profile", "compliant_bump", "acceptance_profile"]


def radial_grid(r0: float, r_max: float, n: int) -> np.ndarray:
    """Uniform grid of ``n`` nodes on [r0, r_max]."""
    return np.linspace(r0, r_max, int(n))


def bump(r, r0: float, center: float, width: float) -> np.ndarray:
    """(r - r0)^2 exp(-((r - center)/width)^2)."""
    r = np.asarray(r, dtype=float)
    return (r - r0) ** 2 * np.exp(-(((r - center) / width) ** 2))


def bump_profile(r0: float, nodes, center: float, width: float, amplitude: complex = 1.0) -> RadialProfile:
    nodes = np.asarray(nodes, dtype=float)
    return RadialProfile(r0, nodes, amplitude * bump(nodes, r0, center, width))


def compliant_bump(
    k: int,
    r0: float,
    nodes,
    *,
    target: complex = 0.0,
    centers=(2.0, 4.0),
    widths=(0.7, 1.2),
    amplitude: complex = 1.0,
    params: TransformParams | None = None,
) -> RadialProfile:
    """Two-bump profile whose moment int s^{1-|k|} w ds equals ``target``.

    ``centers`` and ``widths`` are in units of ``r0`` measured from the disc
    edge, i.e. the bumps sit at ``r0 (1 + c)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    params = params or TransformParams.default(r0)
    c1, c2 = (r0 * (1 + c) for c in centers)
    a1, a2 = (r0 * w for w in widths)
    first = bump_profile(r0, nodes, c1, a1, amplitude)
    second = bump_profile(r0, nodes, c2, a2)
    m1 = moment(k, first, params)
    m2 = moment(k, second, params)
    scale = (m1 - target) / m2
    return first.with_values(first.values - scale * second.values)


def acceptance_profile(r0: float = 1.0, r_end: float = 40.0, n: int = 400) -> RadialProfile:
    """(r - r0)^2 exp(-r) on [r0, r_end]."""
    nodes = np.linspace(r0, r_end, n)
    return RadialProfile(r0, nodes, (nodes - r0) ** 2 * np.exp(-nodes))


def stretched_grid(r0: float, r_end: float, n: int, first_step: float) -> np.ndarray:
    """``n`` nodes on [r0, r_end], exponentially stretched from spacing ``first_step`` at r0.

    Falls back to a uniform grid when that spacing is already coarse enough.
    """
    from scipy.optimize import brentq

    n = int(n)
    length = r_end - r0
    if first_step >= length / (n - 1):
        return np.linspace(r0, r_end, n)
    x = np.linspace(0.0, 1.0, n)
    x1 = x[1]

    def first(beta):
        return length * np.expm1(beta * x1) / np.expm1(beta) - first_step

    beta = brentq(first, 1e-9, 200.0)
    nodes = r0 + length * np.expm1(beta * x) / np.expm1(beta)
    nodes[0], nodes[-1] = r0, r_end
    return nodes
