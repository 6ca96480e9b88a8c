"""The associated Weber-Orr transform and its inverse on the exterior of a disc.

For a mode index ``k >= 0`` and disc radius ``r0`` the kernel is

    R_{k,l}(lam, s) = J_k(lam s) Y_l(lam r0) - Y_k(lam s) J_l(lam r0),

with ``l = k - 1`` for the associated transform (``l = k`` gives the
classical Weber transform).  The pair is

    g(lam) = int_{r0}^inf R_{k,l}(lam, s) f(s) s ds,
    f(r)   = int_0^inf R_{k,l}(lam, r) g(lam) lam dlam / (J_l(lam r0)^2 + Y_l(lam r0)^2).

For the associated transform with ``k >= 2`` the inverse loses the
component of ``f`` along ``r^{-k}``, which satisfies the Robin condition and
is square integrable.  :func:`correction_term` restores it from the moment
``int s^{1-k} f ds``.

Numerical notes
---------------
* For ``k = 1`` the inverse integrand behaves like
  ``M / (r lam (pi^2/4 + log(lam r0/2 e^gamma)^2))`` as ``lam -> 0``, with
  ``M = int f ds``.  It is integrable but only logarithmically, so the piece
  ``(0, lam_min)`` is added in closed form.
* The composed map ``f -> inverse(m(lam) forward(f))`` is evaluated by
  :func:`synthesize`, which computes forward values directly at the nodes
  the spectral quadrature asks for.  No interpolation in ``lam`` is involved.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .quadrature import (
    QuadratureError,
    RadialProfile,
    SpectralProfile,
    TransformParams,
    gauss_legendre,
    integrate_radial,
    integrate_spectral,
    relative_l2,
)
from .special_functions import (
    K_MAX,
    bessel_j,
    bessel_j_prime,
    bessel_jy,
    bessel_y,
    bessel_y_prime,
)

__all__ = [
    "KernelSpec",
    "kernel",
    "robin_functional",
    "forward",
    "inverse_raw",
    "correction_term",
    "moment",
    "invert_with_correction",
    "synthesize",
    "roundtrip",
    "RoundtripReport",
    "default_lambda_grid",
    "spectral_rule",
]

log = logging.getLogger(__name__)

_LAMBDA_CHUNK = 128


@dataclass(frozen=True)
class KernelSpec:
    """Indices ``(k, l)`` and disc radius of a Weber-Orr kernel."""

    k: int
    l: int
    r0: float

    def __post_init__(self):
        k, l = int(self.k), int(self.l)
        if k != self.k or l != self.l:
            raise ValueError("kernel indices must be integers")
        if k < 0:
            raise ValueError("k must be non-negative; fold negative modes with |k|")
        if l not in (k - 1, k):
            raise ValueError(f"l must be k-1 or k, got k={k}, l={l}")
        if k > K_MAX:
            raise ValueError(f"k={k} exceeds K_MAX={K_MAX}")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "r0", float(self.r0))

    @classmethod
    def associated(cls, k: int, r0: float) -> "KernelSpec":
        return cls(abs(int(k)), abs(int(k)) - 1, r0)

    @classmethod
    def classical(cls, k: int, r0: float) -> "KernelSpec":
        return cls(abs(int(k)), abs(int(k)), r0)

    @property
    def is_associated(self) -> bool:
        return self.l == self.k - 1


def _jy(order: int, x):
    """(J_order, Y_order) with J_{-1} = -J_1 and Y_{-1} = -Y_1."""
    if order == -1:
        j, y = bessel_jy(1, x)
        return -j, -y
    return bessel_jy(order, x)


def _boundary(spec: KernelSpec, lam: np.ndarray):
    """J_l(lam r0), Y_l(lam r0) and the inverse-transform denominator."""
    jl, yl = _jy(spec.l, lam * spec.r0)
    return jl, yl, jl * jl + yl * yl


def _kernel_matrix(spec: KernelSpec, lam: np.ndarray, s: np.ndarray, jl=None, yl=None) -> np.ndarray:
    """R(lam_i, s_j) as an array of shape (len(lam), len(s))."""
    if jl is None:
        jl, yl, _ = _boundary(spec, lam)
    jk, yk = bessel_jy(spec.k, np.multiply.outer(lam, s))
    return jk * yl[:, None] - yk * jl[:, None]


def kernel(spec: KernelSpec, lam, s):
    """Evaluate R_{k,l}(lam, s); broadcasts over ``lam`` and ``s``."""
    lam_a, s_a = np.broadcast_arrays(np.asarray(lam, dtype=float), np.asarray(s, dtype=float))
    if np.any(lam_a <= 0):
        raise ValueError("kernel requires lam > 0")
    if np.any(s_a < spec.r0 * (1 - 1e-12)):
        raise ValueError("kernel requires s >= r0")
    jk, yk = bessel_jy(spec.k, lam_a * s_a)
    jl, yl = _jy(spec.l, lam_a * spec.r0)
    out = jk * yl - yk * jl
    return float(out) if out.ndim == 0 else out


def robin_functional(spec: KernelSpec, lam):
    """r0 dR/ds(lam, r0) + k R(lam, r0) for the associated kernel.

    Vanishes identically: the kernel satisfies the Robin condition at the
    disc for every ``lam``.  The derivative comes from Bessel recurrences.
    """
    if not spec.is_associated:
        raise ValueError("robin_functional is defined for the associated kernel (l = k-1)")
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lam must be positive")
    k, z = spec.k, lam * spec.r0
    jl, yl = _jy(spec.l, z)
    djk = np.asarray(bessel_j_prime(k, z, k_max=K_MAX))
    dyk = np.asarray(bessel_y_prime(k, z, k_max=K_MAX))
    jk = np.asarray(bessel_j(k, z))
    yk = np.asarray(bessel_y(k, z))
    deriv = z * (djk * yl - dyk * jl)
    value = deriv + k * (jk * yl - yk * jl)
    return float(value) if value.ndim == 0 else value


def _support_end(f: RadialProfile, rel_tol: float) -> float:
    """Smallest knot beyond which int |f| sqrt(s) ds is negligible."""
    nodes = f.nodes
    a = np.abs(f.values) * np.sqrt(nodes)
    pieces = 0.5 * (a[1:] + a[:-1]) * np.diff(nodes)
    total = pieces.sum()
    if total == 0.0:
        return float(nodes[1])
    tail = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    # keep one extra knot so the spline's last interval is included
    idx = int(np.argmax(tail <= rel_tol * total))
    idx = min(len(nodes) - 1, max(1, idx + 1))
    return float(nodes[idx])


class _ForwardEvaluator:
    """Forward transform values at arbitrary ``lam``, batched over shared s-panels."""

    def __init__(self, spec: KernelSpec, f: RadialProfile, params: TransformParams):
        params.check_radius(spec.r0)
        if not math.isclose(f.r0, spec.r0, rel_tol=1e-12):
            raise ValueError(f"profile r0={f.r0} does not match kernel r0={spec.r0}")
        self.spec, self.f, self.params = spec, f, params
        self.zero = f.is_zero()
        end = min(params.r_max, f.r_end)
        self.end = _support_end(f, params.panel_tol) if not self.zero else end
        self.end = min(self.end, end)
        self.knots = f.nodes[(f.nodes > spec.r0) & (f.nodes < self.end)]
        self.calls = 0

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float).ravel()
        out = np.zeros(lam.size, dtype=complex)
        if self.zero or lam.size == 0:
            return out
        order = np.argsort(lam)
        for start in range(0, lam.size, _LAMBDA_CHUNK):
            idx = order[start:start + _LAMBDA_CHUNK]
            out[idx] = self._chunk(lam[idx])
        self.calls += lam.size
        return out

    def _chunk(self, lam: np.ndarray) -> np.ndarray:
        spec, f = self.spec, self.f
        jl, yl, _ = _boundary(spec, lam)

        def integrand(s):
            return _kernel_matrix(spec, lam, s, jl, yl).T * f(s)[:, None]

        return integrate_radial(
            integrand,
            spec.r0,
            self.end,
            self.params,
            breakpoints=self.knots,
            oscillation=float(lam.max()),
        )


def forward(
    spec: KernelSpec,
    f: RadialProfile,
    lambdas: Optional[Sequence[float]] = None,
    params: Optional[TransformParams] = None,
    *,
    weights: Optional[Sequence[float]] = None,
) -> SpectralProfile:
    """Forward transform ``g(lam) = int R(lam, s) f(s) s ds`` at the given ``lambdas``.

    Parameters
    ----------
    spec : KernelSpec
    f : RadialProfile
        Interpolated by its cubic spline; zero beyond its last node and
        truncated at ``params.r_max``.
    lambdas : sequence of float, optional
        Strictly increasing positive values.  Defaults to
        :func:`default_lambda_grid`.
    params : TransformParams, optional
        Defaults to ``TransformParams.default(spec.r0)``.
    weights : sequence of float, optional
        Quadrature weights to attach (see :func:`spectral_rule`).
    """
    params = params or TransformParams.default(spec.r0)
    lam = default_lambda_grid(spec.r0, params) if lambdas is None else np.asarray(lambdas, dtype=float)
    values = _ForwardEvaluator(spec, f, params)(lam)
    return SpectralProfile(lam, values, weights)


def default_lambda_grid(r0: float, params: TransformParams, n: int = 2000) -> np.ndarray:
    """Geometric-plus-linear grid on (0, lambda_max], dense near zero.

    A quarter of the nodes are spaced geometrically from
    ``lambda_max * 1e-8`` up to ``1/r0``; the rest are uniform above that.
    """
    lam_max = params.lambda_max
    knee = min(1.0 / r0, 0.5 * lam_max)
    n_geo = max(2, n // 4)
    geo = np.geomspace(lam_max * 1e-8, knee, n_geo, endpoint=False)
    lin = np.linspace(knee, lam_max, n - n_geo)
    return np.concatenate([geo, lin])


def spectral_rule(r0: float, oscillation_scale: float, params: TransformParams, cutoff: Optional[float] = None):
    """Fixed composite 16-point Gauss rule for spectral integrals.

    Same panel layout as :func:`~weberorr.quadrature.integrate_spectral`
    without adaptivity: one panel per unit of ``log(lam)`` below
    ``pi/oscillation_scale``, then panels of width ``pi/oscillation_scale``
    up to ``cutoff`` (default ``lambda_max``).  Returns ``(nodes, weights)``.
    """
    lam_max = params.lambda_max if cutoff is None else min(cutoff, params.lambda_max)
    lam_min = params.lambda_max * 1e-8
    h = math.pi / oscillation_scale
    lam_s = min(max(h, 10 * lam_min), lam_max)
    x, w = gauss_legendre(16)
    nodes, weights = [], []
    u0, u1 = math.log(lam_min), math.log(lam_s)
    edges = np.linspace(u0, u1, max(2, int(math.ceil(u1 - u0))) + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (a + b) + 0.5 * (b - a) * x
        nodes.append(np.exp(u))
        weights.append(0.5 * (b - a) * w * np.exp(u))
    if lam_s < lam_max:
        n = max(1, int(math.ceil((lam_max - lam_s) / h)))
        edges = np.linspace(lam_s, lam_max, n + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            nodes.append(0.5 * (a + b) + 0.5 * (b - a) * x)
            weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _origin_factor(spec: KernelSpec, lam_min: float) -> float:
    """int_0^lam_min of the k = 1 inverse integrand, per unit of M / r.

    With L = log(lam r0 / 2) + gamma the integrand is asymptotically
    1 / (lam (pi^2/4 + L^2)), whose integral up to lam_min is
    (2/pi) (atan(2 L_min / pi) + pi/2).
    """
    if not (spec.is_associated and spec.k == 1):
        return 0.0
    big_l = math.log(lam_min * spec.r0 / 2.0) + np.euler_gamma
    return (2.0 / math.pi) * (math.atan(2.0 * big_l / math.pi) + 0.5 * math.pi)


def _check_nodes(r0: float, r_nodes) -> np.ndarray:
    r = np.asarray(r_nodes, dtype=float).ravel()
    if r.size < 2 or not math.isclose(r[0], r0, rel_tol=1e-12, abs_tol=1e-14):
        raise ValueError("r_nodes must start at r0 and have at least two entries")
    return r


def inverse_raw(
    spec: KernelSpec,
    g: SpectralProfile,
    r_nodes: Sequence[float],
    params: Optional[TransformParams] = None,
) -> RadialProfile:
    """Raw inverse transform of ``g`` evaluated at ``r_nodes``.

    With ``g.weights`` set, the integral is the weighted sum over
    ``g.lambdas``, taken to cover ``[lambda_max * 1e-8, ...]`` as
    :func:`spectral_rule` does.  Otherwise ``lam g(lam)`` is interpolated by a cubic spline
    (held constant below the first node, where it tends to a constant for
    ``k = 1`` and to zero otherwise) and integrated adaptively up to
    ``min(lambda_max, g.lambda_max)``.

    For ``k = 1`` the closed-form contribution of ``(0, lam_min)`` is added,
    with the moment ``int f ds`` read off as ``(pi/2) lam_1 g(lam_1)``.
    """
    params = params or TransformParams.default(spec.r0)
    r = _check_nodes(spec.r0, r_nodes)
    lam = g.lambdas
    if g.weights is not None:
        jl, yl, den = _boundary(spec, lam)
        coef = g.values * lam * g.weights / den
        out = np.zeros(r.size, dtype=complex)
        for start in range(0, lam.size, _LAMBDA_CHUNK):
            sl = slice(start, start + _LAMBDA_CHUNK)
            out += coef[sl] @ _kernel_matrix(spec, lam[sl], r, jl[sl], yl[sl])
        # weighted rules cover [lambda_max * 1e-8, ...], as spectral_rule does
        lam_min = min(float(lam[0]), params.lambda_max * 1e-8)
    else:
        from scipy.interpolate import CubicSpline

        lam_g = lam * g.values
        spline = CubicSpline(lam, lam_g) if lam.size >= 4 else None

        def lam_g_at(x):
            if spline is None:
                return np.interp(x, lam, lam_g)
            inside = np.clip(x, lam[0], lam[-1])
            return spline(inside)

        top = min(params.lambda_max, g.lambda_max)
        run = params.with_(lambda_max=top)
        lam_min = params.lambda_max * 1e-8

        def integrand(x):
            jl, yl, den = _boundary(spec, x)
            return _kernel_matrix(spec, x, r, jl, yl) * (lam_g_at(x) / den)[:, None]

        out = np.asarray(
            integrate_spectral(integrand, run, float(r.max()), lambda_min=lam_min, truncate=False)
        )
    factor = _origin_factor(spec, lam_min)
    if factor:
        m = 0.5 * math.pi * lam[0] * g.values[0]
        out = out + factor * m / r
    return RadialProfile(spec.r0, r, out)


def moment(k: int, f: RadialProfile, params: Optional[TransformParams] = None) -> complex:
    """int_{r0}^{r_max} s^{1-|k|} f(s) ds."""
    params = params or TransformParams.default(f.r0)
    k = abs(int(k))
    if f.is_zero():
        return 0j
    end = min(params.r_max, f.r_end)
    knots = f.nodes[(f.nodes > f.r0) & (f.nodes < end)]
    return integrate_radial(
        lambda s: f(s) * s ** (1 - k), f.r0, end, params, weight=False, breakpoints=knots
    )


def correction_term(
    k: int,
    f: RadialProfile,
    r_nodes: Sequence[float],
    params: Optional[TransformParams] = None,
    *,
    moment_value: Optional[complex] = None,
) -> RadialProfile:
    """2(k-1) r0^{2k-2} r^{-k} int s^{1-k} f ds for k >= 2, zero for k in {0, 1}."""
    k = abs(int(k))
    r = _check_nodes(f.r0, r_nodes)
    if k < 2:
        return RadialProfile.zeros(f.r0, r)
    m = moment(k, f, params) if moment_value is None else complex(moment_value)
    return RadialProfile(f.r0, r, _residue(k, f.r0, m, r))


def _residue(k: int, r0: float, m: complex, r: np.ndarray) -> np.ndarray:
    if k < 2:
        return np.zeros(r.size, dtype=complex)
    return 2.0 * (k - 1) * r0 ** (2 * k - 2) * m * r ** (-float(k))


def invert_with_correction(
    spec: KernelSpec,
    g: SpectralProfile,
    f_reference_moment: complex,
    r_nodes: Sequence[float],
    params: Optional[TransformParams] = None,
) -> RadialProfile:
    """inverse_raw(g) plus the correction built from the supplied moment.

    The moment ``int s^{1-k} f ds`` cannot be recovered from ``g`` when
    ``k >= 2``, so the caller provides it.  It is ignored for ``k < 2`` and
    for the classical kernel.
    """
    raw = inverse_raw(spec, g, r_nodes, params)
    if not spec.is_associated or spec.k < 2 or f_reference_moment == 0:
        return raw
    return raw.with_values(raw.values + _residue(spec.k, spec.r0, complex(f_reference_moment), raw.nodes))


def synthesize(
    spec: KernelSpec,
    f: RadialProfile,
    r_nodes: Sequence[float],
    params: Optional[TransformParams] = None,
    transfer: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    *,
    full_output: bool = False,
):
    """Evaluate ``inverse_raw(transfer * forward(f))`` at ``r_nodes``.

    Parameters
    ----------
    transfer : callable, optional
        Maps an array of ``lam`` of shape ``(n,)`` to multipliers of shape
        ``(n, m)``.  Each column gives one output.  ``None`` means the
        identity (one column).  ``transfer`` must tend to 1 as
        ``lam -> 0`` for the ``k = 1`` origin correction to apply.

    Returns
    -------
    ndarray
        Complex array of shape ``(len(r_nodes), m)``.  With ``full_output``
        also a dict of diagnostics (spectral cutoff, tail bound, panel count,
        number of forward evaluations).
    """
    params = params or TransformParams.default(spec.r0)
    r = _check_nodes(spec.r0, r_nodes)
    fwd = _ForwardEvaluator(spec, f, params)
    n_cols = 1 if transfer is None else np.asarray(transfer(np.array([1.0]))).reshape(1, -1).shape[1]
    if fwd.zero:
        out = np.zeros((r.size, n_cols), dtype=complex)
        info = dict(cutoff=0.0, tail_bound=0.0, panels=0, forward_evaluations=0)
        return (out, info) if full_output else out

    def integrand(lam):
        jl, yl, den = _boundary(spec, lam)
        coef = fwd(lam) * lam / den
        kern = _kernel_matrix(spec, lam, r, jl, yl) * coef[:, None]
        if transfer is None:
            return kern
        mult = np.asarray(transfer(lam)).reshape(lam.size, n_cols)
        return (kern[:, :, None] * mult[:, None, :]).reshape(lam.size, -1)

    osc = max(fwd.end, float(r.max()))
    res = integrate_spectral(integrand, params, osc, full_output=True)
    out = np.asarray(res.value).reshape(r.size, n_cols)
    factor = _origin_factor(spec, params.lambda_max * 1e-8)
    if factor:
        out = out + (factor * moment(1, f, params) / r)[:, None]
    log.debug(
        "synthesize k=%d: cutoff %.3g, tail %.2e, %d panels, %d forward evaluations",
        spec.k, res.cutoff, res.tail_bound, res.panels, fwd.calls,
    )
    if full_output:
        info = dict(cutoff=res.cutoff, tail_bound=res.tail_bound, panels=res.panels,
                    forward_evaluations=fwd.calls)
        return out, info
    return out


@dataclass
class RoundtripReport:
    """Outcome of ``f -> inverse_raw(forward(f)) + correction``."""

    k: int
    raw: RadialProfile
    correction: RadialProfile
    moment: complex
    raw_error: float
    error: float
    correction_norm: float
    cutoff: float
    tail_bound: float

    @property
    def reconstructed(self) -> RadialProfile:
        return self.raw.with_values(self.raw.values + self.correction.values)


def roundtrip(
    k: int,
    f: RadialProfile,
    params: Optional[TransformParams] = None,
    *,
    r_nodes: Optional[Sequence[float]] = None,
) -> RoundtripReport:
    """Transform and invert ``f`` through the associated kernel of mode ``k``.

    Errors are relative weighted L2 norms against ``f`` on its own grid:
    ``raw_error`` without the correction and ``error`` with it.
    """
    from .quadrature import weighted_l2

    spec = KernelSpec.associated(k, f.r0)
    params = params or TransformParams.default(f.r0)
    r = f.nodes if r_nodes is None else _check_nodes(f.r0, r_nodes)
    values, info = synthesize(spec, f, r, params, full_output=True)
    raw = RadialProfile(f.r0, r, values[:, 0])
    m = moment(spec.k, f, params)
    corr = correction_term(spec.k, f, r, params, moment_value=m)
    rec = raw.with_values(raw.values + corr.values)
    return RoundtripReport(
        k=spec.k,
        raw=raw,
        correction=corr,
        moment=m,
        raw_error=relative_l2(raw, f),
        error=relative_l2(rec, f),
        correction_norm=weighted_l2(corr),
        cutoff=info["cutoff"],
        tail_bound=info["tail_bound"],
    )
