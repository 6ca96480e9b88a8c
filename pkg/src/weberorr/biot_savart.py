"""Velocity from vorticity outside a disc, one Fourier mode at a time.

With ``v = sum_k (v_{r,k}(r), v_{phi,k}(r)) e^{i k phi}`` and
``w = sum_k w_k(r) e^{i k phi}``, each mode solves

    (1/r)(r v_r)' + (i k / r) v_phi = 0,    (1/r)(r v_phi)' - (i k / r) v_r = w_k,

with ``v -> (v_inf, 0)`` at infinity.  The solution is a particular part
built from the split integrals

    A_k(r) = int_{r0}^r s^{|k|+1} w_k ds,    B_k(r) = int_r^inf s^{1-|k|} w_k ds,

plus multiples of the homogeneous solutions ``(i r^{-|k|-1}, sign(k) r^{-|k|-1})``.
Under no-slip the homogeneous coefficients are zero; under the weaker
impermeability condition they are fixed by ``v_r(r0) = 0`` and a free
circulation ``theta`` remains in the ``k = 0`` mode.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .quadrature import RadialProfile, TransformParams, cumulative_radial
from .stokes import NoslipWarning, VorticityField, invariant_moment, noslip_target

__all__ = [
    "VelocityModes",
    "SlipSolutionParams",
    "homogeneous_basis",
    "reconstruct_noslip",
    "reconstruct_slip",
    "slip_coefficients",
    "discrete_vortex",
    "field_residuals",
    "FieldResiduals",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VelocityModes:
    """Fourier modes ``k -> (v_{r,k}, v_{phi,k})`` of a planar velocity field."""

    r0: float
    modes: Mapping[int, tuple[RadialProfile, RadialProfile]] = field(default_factory=dict)

    def __post_init__(self):
        modes = {}
        for k, pair in dict(self.modes).items():
            vr, vp = pair
            if not np.array_equal(vr.nodes, vp.nodes):
                raise ValueError(f"mode {k}: radial and tangential grids differ")
            modes[int(k)] = (vr, vp)
        object.__setattr__(self, "r0", float(self.r0))
        object.__setattr__(self, "modes", dict(sorted(modes.items())))

    def __getitem__(self, k: int):
        return self.modes[k]

    def __contains__(self, k) -> bool:
        return k in self.modes

    def __iter__(self):
        return iter(self.modes)

    def items(self):
        return self.modes.items()

    def evaluate(self, r, phi) -> tuple[np.ndarray, np.ndarray]:
        """Physical (v_r, v_phi) at polar points, summing all modes."""
        r, phi = np.broadcast_arrays(np.asarray(r, float), np.asarray(phi, float))
        vr = np.zeros(r.shape, dtype=complex)
        vp = np.zeros(r.shape, dtype=complex)
        for k, (a, b) in self.modes.items():
            e = np.exp(1j * k * phi)
            vr += a(r) * e
            vp += b(r) * e
        return vr, vp

    def boundary_values(self) -> dict[int, float]:
        """max(|v_{r,k}(r0)|, |v_{phi,k}(r0)|) per mode."""
        return {k: max(abs(a.values[0]), abs(b.values[0])) for k, (a, b) in self.modes.items()}


@dataclass(frozen=True)
class SlipSolutionParams:
    """Circulation ``theta`` and the homogeneous coefficients ``alpha_k`` of a slip solution."""

    theta: float = 0.0
    alpha: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha.get(0, 0) != 0:
            raise ValueError("alpha_0 must be zero")


def homogeneous_basis(k: int, r):
    """The two divergence- and curl-free solutions of mode ``k``.

    Returns ``((i r^{-k-1}, r^{-k-1}), (i r^{k-1}, -r^{k-1}))`` as
    ``(v_r, v_phi)`` pairs.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    a = r ** (-k - 1.0)
    b = r ** (k - 1.0)
    return (1j * a, a + 0j), (1j * b, -b + 0j)


def _sign(k: int) -> int:
    return (k > 0) - (k < 0)


def _split_integrals(k: int, w: RadialProfile) -> tuple[np.ndarray, np.ndarray]:
    """A(r) = int_{r0}^r s^{|k|+1} w ds and B(r) = int_r^end s^{1-|k|} w ds at the nodes.

    B is accumulated from the outer end so that it carries no cancellation
    when multiplied by r^{|k|-1}.
    """
    kk = abs(k)
    inner = cumulative_radial(w, kk + 1)
    prefix = cumulative_radial(w, 1 - kk)
    pieces = np.diff(prefix)
    outer = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    return inner, outer


def _particular(k: int, w: RadialProfile, v_infinity: float) -> tuple[np.ndarray, np.ndarray]:
    r = w.nodes
    kk, sg = abs(k), _sign(k)
    if k == 0:
        inner = cumulative_radial(w, 1)
        return np.zeros(r.size, dtype=complex), inner / r
    a, b = _split_integrals(k, w)
    lo, hi = r ** (-kk - 1.0), r ** (kk - 1.0)
    delta = 1.0 if kk == 1 else 0.0
    vr = sg * 0.5j * (lo * a + hi * b) + 0.5 * delta * v_infinity
    vp = 0.5 * (lo * a - hi * b) - sg * delta * v_infinity / 2j
    return vr, vp


def _mode_grid(w: VorticityField, r_nodes, params: TransformParams) -> np.ndarray:
    if r_nodes is not None:
        return np.asarray(r_nodes, dtype=float)
    for prof in w.modes.values():
        return prof.nodes
    return np.linspace(w.r0, params.r_max, 201)


def _modes_needed(w: VorticityField, v_infinity: float) -> list[int]:
    ks = set(w.modes)
    if v_infinity != 0:
        ks |= {-1, 1}
    return sorted(ks)


def _warn_relations(w: VorticityField, v_infinity: float, params: TransformParams) -> None:
    tol = 1e-6 * (1.0 + abs(v_infinity))
    bad = []
    for k in _modes_needed(w, v_infinity):
        m = invariant_moment(k, w.modes[k], params) if k in w else 0j
        if abs(m - noslip_target(k, w.r0, v_infinity)) > tol:
            bad.append(k)
    if bad:
        warnings.warn(
            f"no-slip relations violated for modes {bad}; boundary velocity will not vanish",
            NoslipWarning,
            stacklevel=3,
        )


def reconstruct_noslip(
    w: VorticityField,
    v_infinity: float,
    params: Optional[TransformParams] = None,
    *,
    r_nodes: Optional[Sequence[float]] = None,
) -> VelocityModes:
    """Velocity modes under the no-slip condition (all homogeneous coefficients zero).

    The ``k = 0`` tangential mode is ``(1/r) int_{r0}^r s w_0 ds``.  If the
    vorticity misses the no-slip integral relations a :class:`NoslipWarning`
    is issued and the result is returned anyway.
    """
    params = params or TransformParams.default(w.r0)
    _warn_relations(w, v_infinity, params)
    grid = _mode_grid(w, r_nodes, params)
    out = {}
    for k in _modes_needed(w, v_infinity):
        prof = w.modes.get(k) or RadialProfile.zeros(w.r0, grid)
        vr, vp = _particular(k, prof, v_infinity)
        out[k] = (prof.with_values(vr), prof.with_values(vp))
    return VelocityModes(w.r0, out)


def slip_coefficients(w: VorticityField, v_infinity: float, params: Optional[TransformParams] = None) -> dict[int, complex]:
    """alpha_k = -sign(k) r0^{2|k|}/2 int s^{1-|k|} w_k ds - r0^{|k|+1} delta_{|k|,1} v_inf / (2i)."""
    params = params or TransformParams.default(w.r0)
    r0 = w.r0
    alpha = {}
    for k in _modes_needed(w, v_infinity):
        if k == 0:
            alpha[0] = 0j
            continue
        kk = abs(k)
        m = invariant_moment(k, w.modes[k], params) if k in w else 0j
        delta = 1.0 if kk == 1 else 0.0
        alpha[k] = -_sign(k) * r0 ** (2 * kk) / 2.0 * m - r0 ** (kk + 1) * delta * v_infinity / 2j
    return alpha


def reconstruct_slip(
    w: VorticityField,
    v_infinity: float,
    theta: float = 0.0,
    params: Optional[TransformParams] = None,
    *,
    r_nodes: Optional[Sequence[float]] = None,
    return_params: bool = False,
):
    """Velocity modes with zero normal velocity at the disc and circulation ``theta``.

    Each mode ``k != 0`` gets ``alpha_k (i r^{-|k|-1}, sign(k) r^{-|k|-1})``
    added, with ``alpha_k`` from :func:`slip_coefficients`; the ``k = 0``
    tangential mode gets ``theta / r``.  The ``k = 0`` mode is always
    present in the output.
    """
    params = params or TransformParams.default(w.r0)
    grid = _mode_grid(w, r_nodes, params)
    alpha = slip_coefficients(w, v_infinity, params)
    out = {}
    for k in sorted(set(_modes_needed(w, v_infinity)) | {0}):
        prof = w.modes.get(k) or RadialProfile.zeros(w.r0, grid)
        r = prof.nodes
        vr, vp = _particular(k, prof, v_infinity)
        if k == 0:
            vp = vp + theta / r
        else:
            h = alpha[k] * r ** (-abs(k) - 1.0)
            vr = vr + 1j * h
            vp = vp + _sign(k) * h
        out[k] = (prof.with_values(vr), prof.with_values(vp))
    modes = VelocityModes(w.r0, out)
    if return_params:
        return modes, SlipSolutionParams(theta, alpha)
    return modes


def discrete_vortex(theta: float, x) -> np.ndarray:
    """theta (-x2, x1) / |x|^2 for points ``x`` of shape (..., 2)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    r2 = x[..., 0] ** 2 + x[..., 1] ** 2
    if np.any(r2 == 0):
        raise ValueError("discrete vortex is singular at the origin")
    return theta * np.stack([-x[..., 1], x[..., 0]], axis=-1) / r2[..., None]


@dataclass
class FieldResiduals:
    """Per-mode weighted L2 norms of the divergence and of curl(v) - w."""

    divergence: dict
    curl: dict

    @property
    def max_divergence(self) -> float:
        return max(self.divergence.values(), default=0.0)

    @property
    def max_curl(self) -> float:
        return max(self.curl.values(), default=0.0)

    def as_dict(self) -> dict:
        return {
            "divergence": {str(k): v for k, v in self.divergence.items()},
            "curl": {str(k): v for k, v in self.curl.items()},
        }


def field_residuals(v: VelocityModes, w: VorticityField, *, trim: int = 0) -> FieldResiduals:
    """Finite-difference divergence and curl residuals per mode.

    ``trim`` drops that many nodes at each end, where the one-sided
    stencils are least accurate.
    """
    from .oracle import fd_curl, fd_divergence
    from .quadrature import weighted_l2

    div = fd_divergence(v)
    curl = fd_curl(v)
    d_out, c_out = {}, {}
    for k in v:
        r = div[k].nodes
        target = w.modes.get(k)
        if target is not None and not np.array_equal(target.nodes, r):
            raise ValueError(f"mode {k}: velocity and vorticity grids differ")
        wk = target.values if target is not None else np.zeros(r.size, dtype=complex)
        sl = slice(trim, r.size - trim if trim else None)
        d_out[k] = weighted_l2(div[k].values[sl], r[sl])
        c_out[k] = weighted_l2((curl[k].values - wk)[sl], r[sl])
    return FieldResiduals(d_out, c_out)
