"""Reference computations that share no numerics with the spectral solver.

* :func:`fd_evolve` steps the radial heat equation with a theta-scheme on a
  uniform grid, imposing the Robin condition through a ghost node.
* :func:`laplace_domain_solution` evaluates the resolvent of the Robin
  problem in closed form with modified Bessel functions I_k and K_k,
  integrated by plain composite Gauss-Legendre.
* :func:`fd_divergence` and :func:`fd_curl` differentiate velocity modes
  with second-order finite differences.

Only :mod:`weberorr.special_functions` and the profile container are
shared with the solver.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .quadrature import RadialProfile
from .special_functions import bessel_i_scaled, bessel_k_scaled

__all__ = [
    "FdScheme",
    "FdInstability",
    "fd_evolve",
    "fd_evolve_times",
    "laplace_domain_solution",
    "fd_divergence",
    "fd_curl",
]

log = logging.getLogger(__name__)


class FdInstability(RuntimeError):
    """The time-stepping norm grew beyond the allowed factor."""


@dataclass(frozen=True, eq=False)
class FdScheme:
    """Uniform radial grid and time step for :func:`fd_evolve`.

    ``theta_scheme = 0.5`` is Crank-Nicolson (second order in time),
    ``1`` is backward Euler.  Values below 0.5 are only conditionally
    stable.
    """

    dt: float
    grid: np.ndarray
    theta_scheme: float = 0.5

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if grid.size < 50:
            raise ValueError("the finite-difference grid needs at least 50 nodes")
        h = np.diff(grid)
        if np.any(h <= 0) or np.ptp(h) > 1e-9 * h.mean():
            raise ValueError("the finite-difference grid must be uniform")
        if not 0.0 <= self.theta_scheme <= 1.0:
            raise ValueError("theta_scheme must lie in [0, 1]")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def uniform(cls, r0: float, r_max: float, n: int, dt: float, theta_scheme: float = 0.5) -> "FdScheme":
        return cls(dt, np.linspace(r0, r_max, int(n)), theta_scheme)

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])


def _operator(k: int, r: np.ndarray, h: float) -> sparse.csc_matrix:
    """Delta_k on the nodes r[0..n-2] with the ghost-node Robin row and w(r[-1]) = 0."""
    kk = abs(k)
    n = r.size - 1
    ri = r[:n]
    lower = 1.0 / h**2 - 1.0 / (2 * h * ri)
    upper = 1.0 / h**2 + 1.0 / (2 * h * ri)
    diag = -2.0 / h**2 - kk * kk / ri**2
    # ghost node: w_{-1} = w_1 + 2 h |k| w_0 / r0
    r0 = r[0]
    diag = diag.copy()
    upper = upper.copy()
    diag[0] += lower[0] * 2 * h * kk / r0
    upper[0] += lower[0]
    return sparse.diags([lower[1:], diag, upper[:-1]], [-1, 0, 1], shape=(n, n), format="csc")


def fd_evolve_times(k: int, w0: RadialProfile, times, scheme: FdScheme, *, growth_limit: float = 10.0) -> list[RadialProfile]:
    """Finite-difference solutions at several times on the scheme's grid.

    Every requested time must be an integer number of steps.
    """
    times = np.asarray(times, dtype=float).ravel()
    r = scheme.grid
    if not math.isclose(r[0], w0.r0, rel_tol=1e-12):
        raise ValueError("scheme grid must start at the profile's r0")
    steps = np.rint(times / scheme.dt).astype(int)
    if np.any(np.abs(steps * scheme.dt - times) > 1e-9 * np.maximum(1.0, times)) or np.any(steps < 0):
        raise ValueError("times must be non-negative integer multiples of dt")
    h = scheme.h
    lap = _operator(k, r, h)
    n = lap.shape[0]
    eye = sparse.identity(n, format="csc")
    th, dt = scheme.theta_scheme, scheme.dt
    lhs = splu((eye - th * dt * lap).tocsc())
    rhs = (eye + (1 - th) * dt * lap).tocsr()
    w = w0(r)[:n].astype(complex)
    start_norm = max(float(np.max(np.abs(w))), 1e-300)
    out: dict[int, np.ndarray] = {}
    order = np.argsort(steps)
    done = 0
    for idx in order:
        target = steps[idx]
        while done < target:
            b = rhs @ w
            w = lhs.solve(b.real) + 1j * lhs.solve(b.imag)
            done += 1
            if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > growth_limit * start_norm:
                raise FdInstability(f"norm grew beyond {growth_limit}x after {done} steps")
        out[idx] = np.append(w, 0.0)
    return [RadialProfile(w0.r0, r, out[j]) for j in range(times.size)]


def fd_evolve(k: int, w0: RadialProfile, t: float, scheme: FdScheme) -> RadialProfile:
    """Theta-scheme solution of dw/dt = Delta_k w with r0 w' + |k| w = 0 at r0 and w = 0 at r_max."""
    if not t > 0:
        raise ValueError("t must be positive")
    return fd_evolve_times(k, w0, [t], scheme)[0]


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _gauss_nodes(a: float, b: float, breaks) -> tuple[np.ndarray, np.ndarray]:
    """Composite 20-point Gauss-Legendre nodes and weights on [a, b] split at ``breaks``."""
    if b <= a:
        return np.empty(0), np.empty(0)
    cuts = np.unique(np.concatenate([[a, b], breaks[(breaks > a) & (breaks < b)]]))
    lo, hi = cuts[:-1], cuts[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = (mid[:, None] + half[:, None] * _GL_X).ravel()
    w = (half[:, None] * _GL_W).ravel()
    return x, w


def laplace_domain_solution(k: int, w0: RadialProfile, tau: float, r, params=None):
    """Laplace transform in time of the Robin heat solution, from the I/K closed form.

    With ``a = sqrt(tau)`` and ``n = |k|``,

        w(tau, r) = K_n(a r) I_{n-1}(a r0) / K_{n-1}(a r0) int w0 K_n(a s) s ds
                  + K_n(a r) int_{r0}^r w0 I_n(a s) s ds
                  + I_n(a r) int_r^inf w0 K_n(a s) s ds,

    with ``I_{-1} = I_1`` and ``K_{-1} = K_1``.  Exponentially scaled Bessel
    functions keep every product finite.  ``params`` is accepted for
    interface symmetry and ignored: the profile's own knots define the
    integration panels.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    n = abs(int(k))
    a = math.sqrt(tau)
    r0 = w0.r0
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rs < r0):
        raise ValueError("r must be >= r0")
    end = w0.r_end
    knots = w0.nodes
    m = abs(n - 1)
    i_ratio = bessel_i_scaled(m, a * r0) / bessel_k_scaled(m, a * r0)
    s_all, q_all = _gauss_nodes(r0, end, knots)
    f_all = w0(s_all) * s_all
    ks_all = bessel_k_scaled(n, a * s_all)
    out = np.empty(rs.size, dtype=complex)
    for j, rj in enumerate(rs):
        krj = bessel_k_scaled(n, a * rj)
        irj = bessel_i_scaled(n, a * rj)
        first = krj * i_ratio * np.sum(q_all * f_all * ks_all * np.exp(-a * (rj + s_all - 2 * r0)))
        s_in, q_in = _gauss_nodes(r0, min(rj, end), knots)
        second = 0.0
        if s_in.size:
            second = krj * np.sum(q_in * w0(s_in) * s_in * bessel_i_scaled(n, a * s_in) * np.exp(-a * (rj - s_in)))
        s_out, q_out = _gauss_nodes(rj, end, knots)
        third = 0.0
        if s_out.size:
            third = irj * np.sum(q_out * w0(s_out) * s_out * bessel_k_scaled(n, a * s_out) * np.exp(-a * (s_out - rj)))
        out[j] = first + second + third
    if np.ndim(r) == 0:
        return complex(out[0])
    return out


def _check_modes(v) -> None:
    for k, (vr, vp) in v.items():
        if len(vr) < 5:
            raise ValueError(f"mode {k}: finite differences need at least 5 nodes")
        if not np.array_equal(vr.nodes, vp.nodes):
            raise ValueError(f"mode {k}: radial and tangential grids differ")


def fd_divergence(v) -> dict[int, RadialProfile]:
    """(1/r) d(r v_r)/dr + (i k / r) v_phi per mode, second-order differences."""
    _check_modes(v)
    out = {}
    for k, (vr, vp) in v.items():
        r = vr.nodes
        d = np.gradient(r * vr.values, r, edge_order=2)
        out[k] = vr.with_values(d / r + 1j * k * vp.values / r)
    return out


def fd_curl(v) -> dict[int, RadialProfile]:
    """(1/r) d(r v_phi)/dr - (i k / r) v_r per mode, second-order differences."""
    _check_modes(v)
    out = {}
    for k, (vr, vp) in v.items():
        r = vp.nodes
        d = np.gradient(r * vp.values, r, edge_order=2)
        out[k] = vp.with_values(d / r - 1j * k * vr.values / r)
    return out
