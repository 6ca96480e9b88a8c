"""Vorticity of 2-D Stokes flow outside a disc, mode by mode.

Each Fourier mode ``w_k(t, r)`` of the vorticity solves the radial heat
equation ``dw/dt = Delta_k w`` on ``r > r0`` with the Robin condition
``r0 w'(r0) + |k| w(r0) = 0``.  Its solution is the associated Weber-Orr
synthesis

    w_k(t) = W^{-1} [ exp(-lam^2 t) W [w_k(0)] ]  (+ a stationary r^{-|k|} term),

where the stationary term only appears for ``|k| >= 2`` and vanishes when
the no-slip relations hold.  Every time value is a fresh synthesis; nothing
is stepped in time.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .quadrature import RadialProfile, TransformParams
from .weber_orr import KernelSpec, moment, synthesize, _residue

__all__ = [
    "VorticityField",
    "StokesProblem",
    "NoslipReport",
    "NoslipViolation",
    "NoslipWarning",
    "radial_laplacian",
    "robin_residual",
    "invariant_moment",
    "noslip_target",
    "check_noslip_relations",
    "evolve_mode",
    "evolve_mode_times",
    "evolve_mode_robin",
    "solve_stokes",
    "DEFAULT_K_MAX",
]

log = logging.getLogger(__name__)

DEFAULT_K_MAX = 16


class NoslipViolation(ValueError):
    """Initial vorticity violates the no-slip integral relations."""


class NoslipWarning(UserWarning):
    """A mode's conserved moment disagrees with the no-slip value."""


@dataclass(frozen=True, eq=False)
class VorticityField:
    """Fourier modes ``k -> w_k(r)`` of a vorticity field outside a disc."""

    r0: float
    modes: Mapping[int, RadialProfile] = field(default_factory=dict)

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        modes = {}
        for k, prof in dict(self.modes).items():
            if int(k) != k:
                raise ValueError(f"mode index {k!r} is not an integer")
            if not isinstance(prof, RadialProfile):
                raise TypeError(f"mode {k} is not a RadialProfile")
            if not math.isclose(prof.r0, self.r0, rel_tol=1e-12):
                raise ValueError(f"mode {k} has r0={prof.r0}, field has r0={self.r0}")
            modes[int(k)] = prof
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "modes", dict(sorted(modes.items())))

    def __getitem__(self, k: int) -> RadialProfile:
        return self.modes[k]

    def __contains__(self, k) -> bool:
        return k in self.modes

    def __iter__(self):
        return iter(self.modes)

    def __len__(self) -> int:
        return len(self.modes)

    def items(self):
        return self.modes.items()

    @property
    def k_max(self) -> int:
        return max((abs(k) for k in self.modes), default=0)

    def realness_defect(self) -> float:
        """max |w_{-k} - conj(w_k)| over modes present with their partner."""
        worst = 0.0
        for k, prof in self.modes.items():
            partner = self.modes.get(-k)
            if partner is None:
                continue
            if partner.nodes.shape != prof.nodes.shape or np.any(partner.nodes != prof.nodes):
                return math.inf
            worst = max(worst, float(np.max(np.abs(partner.values - np.conj(prof.values)))))
        return worst

    def evaluate(self, r, phi) -> np.ndarray:
        """Physical vorticity sum_k w_k(r) e^{i k phi} (complex; real for symmetric fields)."""
        r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
        out = np.zeros(r.shape, dtype=complex)
        for k, prof in self.modes.items():
            out += prof(r) * np.exp(1j * k * phi)
        return out


@dataclass(frozen=True, eq=False)
class StokesProblem:
    """Stokes flow past a disc of radius ``r0`` with horizontal speed ``v_infinity`` at infinity."""

    r0: float
    v_infinity: float
    initial_vorticity: VorticityField
    K_max: int = DEFAULT_K_MAX

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if int(self.K_max) < 1:
            raise ValueError("K_max must be a positive integer")
        if not math.isclose(self.initial_vorticity.r0, self.r0, rel_tol=1e-12):
            raise ValueError("initial vorticity r0 does not match the problem")
        if not math.isfinite(self.v_infinity):
            raise ValueError("v_infinity must be finite")
        too_high = [k for k in self.initial_vorticity if abs(k) > self.K_max]
        if too_high:
            raise ValueError(f"modes {too_high} exceed K_max={self.K_max}")


def _second_derivative(r: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Three-point second derivative on a non-uniform grid; one-sided 4-point at the ends."""
    d2 = np.empty_like(w)
    h0 = r[1:-1] - r[:-2]
    h1 = r[2:] - r[1:-1]
    d2[1:-1] = 2.0 * (h1 * w[:-2] - (h0 + h1) * w[1:-1] + h0 * w[2:]) / (h0 * h1 * (h0 + h1))
    d2[0] = _fd_weights(r[:4], r[0], 2) @ w[:4]
    d2[-1] = _fd_weights(r[-4:], r[-1], 2) @ w[-4:]
    return d2


def _fd_weights(x: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0`` from nodes ``x``."""
    n = x.size
    d = x - x0
    a = np.vander(d, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(a, rhs)


def radial_laplacian(k: int, w: RadialProfile) -> RadialProfile:
    """Delta_k w = w'' + w'/r - k^2 w / r^2 by finite differences on the profile grid.

    Second order at interior nodes (for smoothly varying spacing); the end
    nodes use one-sided stencils.
    """
    r, v = w.nodes, w.values
    if r.size < 5:
        raise ValueError("radial_laplacian needs at least 5 nodes")
    d1 = np.gradient(v, r, edge_order=2)
    d2 = _second_derivative(r, v)
    return w.with_values(d2 + d1 / r - (k * k) * v / (r * r))


def robin_residual(k: int, w: RadialProfile) -> complex:
    """r0 w'(r0) + |k| w(r0), with w' from a 4-point one-sided stencil."""
    if len(w) < 4:
        raise ValueError("robin_residual needs at least 4 nodes")
    r0 = w.r0
    deriv = _fd_weights(w.nodes[:4], r0, 1) @ w.values[:4]
    return complex(r0 * deriv + abs(int(k)) * w.values[0])


def invariant_moment(k: int, w: RadialProfile, params: Optional[TransformParams] = None) -> complex:
    """int_{r0}^{r_max} s^{1-|k|} w(s) ds, conserved by the mode's heat flow."""
    return complex(moment(k, w, params))


def noslip_target(k: int, r0: float, v_infinity: float) -> complex:
    """Value of the conserved moment demanded by no-slip: i v_inf sign(k) / r0^{|k|-1} for |k| = 1, else 0."""
    if abs(k) != 1:
        return 0j
    return 1j * v_infinity * math.copysign(1.0, k)


@dataclass
class NoslipReport:
    """Per-mode residuals of the no-slip integral relations."""

    residuals: dict
    circulation: complex
    tolerance: float

    @property
    def max_residual(self) -> float:
        vals = [abs(v) for v in self.residuals.values()] + [abs(self.circulation)]
        return max(vals, default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "ok": self.ok,
            "max_residual": self.max_residual,
            "circulation": [self.circulation.real, self.circulation.imag],
            "residuals": {str(k): [v.real, v.imag] for k, v in self.residuals.items()},
        }


def check_noslip_relations(problem: StokesProblem, params: Optional[TransformParams] = None) -> NoslipReport:
    """Residuals of int s^{1-|k|} w_k ds - i v_inf delta_{|k|,1} sign(k) / r0^{|k|-1}.

    The ``k = 0`` residual is also reported separately as the circulation
    int s w_0 ds.  Tolerance is ``1e-6 (1 + |v_inf|)``.
    """
    params = params or TransformParams.default(problem.r0)
    residuals = {}
    field0 = problem.initial_vorticity
    ks = set(field0) | ({-1, 1} if problem.v_infinity != 0 else set())
    for k in sorted(ks):
        m = invariant_moment(k, field0[k], params) if k in field0 else 0j
        residuals[k] = m - noslip_target(k, problem.r0, problem.v_infinity)
    circulation = residuals.get(0, 0j)
    return NoslipReport(residuals, circulation, 1e-6 * (1.0 + abs(problem.v_infinity)))


def _moment_scale(k: int, w: RadialProfile) -> float:
    r = w.nodes
    a = np.abs(w.values) * r ** (1.0 - abs(k))
    return float(np.sum(0.5 * (a[1:] + a[:-1]) * np.diff(r)))


def _heat_transfer(times: np.ndarray):
    def transfer(lam):
        return np.exp(-np.multiply.outer(lam * lam, times))
    return transfer


def evolve_mode_times(
    k: int,
    w0: RadialProfile,
    times: Sequence[float],
    params: Optional[TransformParams] = None,
    *,
    r_nodes: Optional[Sequence[float]] = None,
    warn: bool = True,
) -> list[RadialProfile]:
    """:func:`evolve_mode` at several times from a single spectral synthesis."""
    times = np.asarray(times, dtype=float).ravel()
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ValueError("times must be finite and non-negative")
    params = params or TransformParams.default(w0.r0)
    r = w0.nodes if r_nodes is None else np.asarray(r_nodes, dtype=float)
    kk = abs(int(k))
    if warn and kk >= 2:
        m = invariant_moment(kk, w0, params)
        if abs(m) > 1e-6 * (1.0 + _moment_scale(kk, w0)):
            warnings.warn(
                f"mode k={k} has conserved moment {m:.3e}; the stationary r^-{kk} part is not "
                "carried by evolve_mode (use evolve_mode_robin)",
                NoslipWarning,
                stacklevel=2,
            )
    if times.size == 0:
        return []
    spec = KernelSpec.associated(kk, w0.r0)
    out = synthesize(spec, w0, r, params, _heat_transfer(times))
    return [RadialProfile(w0.r0, r, out[:, j]) for j in range(times.size)]


def evolve_mode(
    k: int,
    w0: RadialProfile,
    t: float,
    params: Optional[TransformParams] = None,
    **kwargs,
) -> RadialProfile:
    """Mode ``k`` of the vorticity at time ``t`` by the explicit spectral formula.

    Computes ``W^{-1}[exp(-lam^2 t) W[w0]]`` with the associated kernel of
    order ``|k|`` on ``w0``'s grid.  For ``|k| >= 2`` this drops the
    component along ``r^{-|k|}``; a warning is issued when ``w0`` has a
    non-zero conserved moment.
    """
    return evolve_mode_times(k, w0, [t], params, **kwargs)[0]


def evolve_mode_robin(
    k: int,
    w0: RadialProfile,
    t: float,
    params: Optional[TransformParams] = None,
    **kwargs,
) -> RadialProfile:
    """Solution of the Robin heat problem for any ``w0``.

    :func:`evolve_mode` plus the stationary term
    ``2(|k|-1) r0^{2|k|-2} r^{-|k|} int s^{1-|k|} w0 ds`` for ``|k| >= 2``.
    """
    params = params or TransformParams.default(w0.r0)
    kwargs.setdefault("warn", False)
    base = evolve_mode(k, w0, t, params, **kwargs)
    kk = abs(int(k))
    if kk < 2:
        return base
    m = invariant_moment(kk, w0, params)
    return base.with_values(base.values + _residue(kk, w0.r0, m, base.nodes))


def solve_stokes(
    problem: StokesProblem,
    times: Sequence[float],
    params: Optional[TransformParams] = None,
    *,
    workers: int = 1,
) -> dict[float, VorticityField]:
    """Vorticity field at each requested time.

    Modes are evolved independently; ``workers > 1`` runs them on a thread
    pool.  Results do not depend on the number of workers.

    Raises
    ------
    NoslipViolation
        If the initial data miss the no-slip relations by more than
        ``1e-6 (1 + |v_inf|)``; the explicit formula would then be wrong.

    Notes
    -----
    When ``w_{-k}`` equals ``conj(w_k)`` exactly, only ``w_k`` is evolved and
    its partner is taken as the conjugate, so the realness symmetry is kept
    bit for bit.
    """
    params = params or TransformParams.default(problem.r0)
    report = check_noslip_relations(problem, params)
    if not report.ok:
        raise NoslipViolation(
            f"no-slip relations violated: max residual {report.max_residual:.3e} > "
            f"tolerance {report.tolerance:.1e}"
        )
    times = [float(t) for t in times]
    field0 = problem.initial_vorticity
    mirrored: dict[int, int] = {}
    tasks: list[int] = []
    for k in sorted(field0, key=lambda q: (abs(q), -q)):
        prof = field0[k]
        if -k in tasks and np.array_equal(field0[-k].nodes, prof.nodes) \
                and np.array_equal(field0[-k].values, np.conj(prof.values)):
            mirrored[k] = -k
        else:
            tasks.append(k)

    def run(k: int) -> list[RadialProfile]:
        prof = field0[k]
        if prof.is_zero():
            return [prof for _ in times]
        log.info("evolving mode k=%d at %d times", k, len(times))
        return evolve_mode_times(k, prof, times, params, warn=False)

    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            evolved = dict(zip(tasks, pool.map(run, tasks)))
    else:
        evolved = {k: run(k) for k in tasks}
    for k, src in mirrored.items():
        evolved[k] = [p.conj() for p in evolved[src]]
    return {
        t: VorticityField(problem.r0, {k: evolved[k][j] for k in field0})
        for j, t in enumerate(times)
    }
