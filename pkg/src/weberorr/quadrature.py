"""Profiles and adaptive quadrature on truncated semi-infinite intervals.

Two integral shapes occur in the package:

* radial integrals ``int_{r0}^{r_max} f(s) s ds`` over profile data, and
* spectral integrals ``int_0^{lambda_max} F(lambda) dlambda`` whose
  integrands oscillate like products of Bessel functions.

Both are evaluated with composite Gauss-Legendre panels (16 nodes), the
error of each panel being estimated from an embedded 8-node rule.  Panels
never span more than one period of the fastest oscillation the caller
declares.  Integrands may be vector valued: ``f(x)`` returns an array of
shape ``(len(x),)`` or ``(len(x), m)`` and the adaptive logic uses the
largest component error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "TransformParams",
    "RadialProfile",
    "SpectralProfile",
    "QuadratureError",
    "TruncationWarning",
    "QuadResult",
    "gauss_legendre",
    "integrate_radial",
    "integrate_spectral",
    "cumulative_radial",
    "weighted_l2",
    "relative_l2",
]

_ORDER = 16
_EMBEDDED = 8


class QuadratureError(RuntimeError):
    """Adaptive quadrature gave up; carries the partial value and error bound."""

    def __init__(self, message: str, value=None, error: float = math.inf):
        super().__init__(message)
        self.value = value
        self.error = error


class TruncationWarning(RuntimeWarning):
    """The integrand had not decayed below tolerance at the truncation point."""


@dataclass(frozen=True)
class TransformParams:
    """Quadrature and truncation controls shared by all integral operations.

    ``lambda_max`` and ``r_max`` are absolute values; use :meth:`default`
    to get the documented defaults for a disc radius ``r0``
    (``lambda_max = 200/r0``, ``r_max = 50 r0``).  ``tail_tol`` bounds the
    estimated spectral tail that may be dropped before ``lambda_max``.
    """

    lambda_max: float
    r_max: float
    panel_tol: float = 1e-10
    max_panels: int = 100_000
    tail_tol: float = 1e-5

    def __post_init__(self):
        if not self.lambda_max > 0:
            raise ValueError("lambda_max must be positive")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if not self.panel_tol > 0:
            raise ValueError("panel_tol must be positive")
        if int(self.max_panels) < 1:
            raise ValueError("max_panels must be a positive integer")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be positive")

    @classmethod
    def default(cls, r0: float, **overrides) -> "TransformParams":
        if not r0 > 0:
            raise ValueError("r0 must be positive")
        values = dict(lambda_max=200.0 / r0, r_max=50.0 * r0)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def check_radius(self, r0: float) -> None:
        if not self.r_max > r0:
            raise ValueError(f"r_max={self.r_max} must exceed r0={r0}")

    def with_(self, **changes) -> "TransformParams":
        return replace(self, **changes)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """One Fourier mode sampled on a radial grid starting at the disc radius.

    Between nodes the profile is the not-a-knot cubic spline through the
    samples (linear for fewer than four nodes).  Beyond the last node it is
    taken to be zero.
    """

    r0: float
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r0 = float(self.r0)
        nodes = np.array(self.nodes, dtype=float).ravel()
        values = np.array(self.values, dtype=complex).ravel()
        if not r0 > 0:
            raise ValueError("r0 must be positive")
        if nodes.size < 2:
            raise ValueError("a profile needs at least two nodes")
        if nodes.size != values.size:
            raise ValueError(f"{nodes.size} nodes but {values.size} values")
        if not math.isclose(nodes[0], r0, rel_tol=1e-12, abs_tol=1e-14):
            raise ValueError(f"first node {nodes[0]} must equal r0={r0}")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        nodes[0] = r0
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "nodes", _readonly(nodes))
        object.__setattr__(self, "values", _readonly(values))

    @classmethod
    def from_function(cls, r0: float, nodes, func: Callable) -> "RadialProfile":
        nodes = np.asarray(nodes, dtype=float)
        return cls(r0, nodes, func(nodes))

    @classmethod
    def zeros(cls, r0: float, nodes) -> "RadialProfile":
        nodes = np.asarray(nodes, dtype=float)
        return cls(r0, nodes, np.zeros(nodes.size, dtype=complex))

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def r_end(self) -> float:
        return float(self.nodes[-1])

    @cached_property
    def spline(self):
        if self.nodes.size >= 4:
            return CubicSpline(self.nodes, self.values, bc_type="not-a-knot", extrapolate=False)
        from scipy.interpolate import interp1d

        return interp1d(self.nodes, self.values, bounds_error=False, fill_value=np.nan)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r0 * (1 - 1e-12)):
            raise ValueError("profile evaluated inside the disc")
        out = np.asarray(self.spline(np.clip(r, self.r0, None)), dtype=complex)
        out = np.where(r > self.r_end, 0.0, out)
        return out

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(self.r0, self.nodes, values)

    def conj(self) -> "RadialProfile":
        return self.with_values(np.conj(self.values))

    def scaled(self, factor) -> "RadialProfile":
        return self.with_values(factor * self.values)

    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Transformed values on a grid in (0, lambda_max].

    ``weights`` is set when the grid is a quadrature rule for
    ``int (...) dlambda``; the inverse transform then uses it directly
    instead of interpolating.
    """

    lambdas: np.ndarray
    values: np.ndarray
    weights: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).ravel()
        vals = np.array(self.values, dtype=complex).ravel()
        if lam.size != vals.size:
            raise ValueError(f"{lam.size} lambdas but {vals.size} values")
        if lam.size == 0:
            raise ValueError("empty spectral profile")
        if np.any(lam <= 0):
            raise ValueError("lambdas must be strictly positive")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("lambdas must be strictly increasing")
        object.__setattr__(self, "lambdas", _readonly(lam))
        object.__setattr__(self, "values", _readonly(vals))
        if self.weights is not None:
            w = np.array(self.weights, dtype=float).ravel()
            if w.size != lam.size:
                raise ValueError("weights must match lambdas")
            object.__setattr__(self, "weights", _readonly(w))

    def __len__(self) -> int:
        return self.lambdas.size

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[-1])


@dataclass
class QuadResult:
    value: np.ndarray | complex
    error: float
    panels: int
    # spectral integrals only
    cutoff: float = math.nan
    tail_bound: float = 0.0


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return _readonly(x), _readonly(w)


def _as_2d(v: np.ndarray, n: int) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim == 1:
        return v.reshape(n, 1)
    return v.reshape(n, -1)


def _finish(total: np.ndarray, vector: bool):
    if vector:
        return total
    return complex(total[0])


class _Adaptive:
    """Composite 16/8-point Gauss-Legendre with bisection of failing panels.

    ``tol_fn(total_magnitude)`` gives the absolute tolerance for the whole
    interval of length ``span``; each panel receives its share by width.
    """

    def __init__(self, func, span: float, tol_fn, max_panels: int):
        self.func = func
        self.span = span
        self.tol_fn = tol_fn
        self.max_panels = int(max_panels)
        self.vector = None
        self.panels = 0
        self.envelope = 0.0

    def run(self, a: np.ndarray, b: np.ndarray, base=None):
        x16, w16 = gauss_legendre(_ORDER)
        x8, w8 = gauss_legendre(_EMBEDDED)
        total = 0.0 if base is None else base
        err_total = 0.0
        envelope = 0.0
        while a.size:
            self.panels += a.size
            if self.panels > self.max_panels:
                raise QuadratureError(
                    f"adaptive quadrature exceeded {self.max_panels} panels",
                    value=_finish(np.atleast_1d(total), bool(self.vector)),
                    error=err_total + float(np.sum(b - a)) * np.inf,
                )
            mid = 0.5 * (a + b)
            half = 0.5 * (b - a)
            n = a.size
            nodes = np.concatenate([
                (mid[:, None] + half[:, None] * x16).ravel(),
                (mid[:, None] + half[:, None] * x8).ravel(),
            ])
            raw = np.asarray(self.func(nodes))
            if self.vector is None:
                self.vector = raw.ndim == 2
            vals = _as_2d(raw, nodes.size)
            if not np.all(np.isfinite(vals)):
                raise QuadratureError("integrand is not finite at a quadrature node", value=None)
            v16 = vals[: n * _ORDER].reshape(n, _ORDER, -1)
            v8 = vals[n * _ORDER:].reshape(n, _EMBEDDED, -1)
            q16 = np.einsum("pjm,j->pm", v16, w16) * half[:, None]
            q8 = np.einsum("pjm,j->pm", v8, w8) * half[:, None]
            scale = np.einsum("pjm,j->pm", np.abs(v16), w16) * half[:, None]
            d = np.abs(q16 - q8)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(scale > 0, 200.0 * d / scale, 0.0)
            err = np.max(d * np.minimum(1.0, ratio ** 1.5), axis=1)
            envelope = max(envelope, float(np.max(np.abs(v16))) if v16.size else 0.0)
            current = total + q16.sum(axis=0)
            tol = self.tol_fn(float(np.max(np.abs(current))))
            allowed = tol * (b - a) / self.span
            tiny = (b - a) <= 1e-13 * max(1.0, float(np.max(np.abs(b))))
            ok = (err <= allowed) | tiny
            total = total + q16[ok].sum(axis=0)
            err_total += float(err[ok].sum())
            bad_a, bad_m, bad_b = a[~ok], mid[~ok], b[~ok]
            a = np.concatenate([bad_a, bad_m])
            b = np.concatenate([bad_m, bad_b])
        self.envelope = max(self.envelope, envelope)
        return np.atleast_1d(total), err_total


def _panel_edges(a: float, b: float, width: float, breakpoints=None) -> np.ndarray:
    cuts = [a, b]
    if breakpoints is not None:
        bp = np.asarray(breakpoints, dtype=float)
        cuts.extend(bp[(bp > a) & (bp < b)].tolist())
    cuts = np.unique(np.asarray(cuts, dtype=float))
    if not math.isfinite(width) or width <= 0:
        return cuts
    pieces = [cuts[:1]]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(math.ceil((hi - lo) / width - 1e-9)))
        pieces.append(np.linspace(lo, hi, n + 1)[1:])
    return np.concatenate(pieces)


def integrate_radial(
    f: Callable,
    a: float,
    b: float,
    params: Optional[TransformParams] = None,
    *,
    weight: bool = True,
    breakpoints: Optional[Sequence[float]] = None,
    oscillation: float = 0.0,
    full_output: bool = False,
):
    """Integrate ``f(s) s`` (or ``f(s)`` with ``weight=False``) over [a, b].

    Parameters
    ----------
    f : callable
        Vectorised integrand; may return shape ``(n,)`` or ``(n, m)``.
    a, b : float
        Interval, ``a < b``.
    params : TransformParams, optional
        Supplies ``panel_tol`` and ``max_panels``.
    breakpoints : sequence of float, optional
        Points where ``f`` may lose smoothness (profile knots).  Panels are
        aligned to them.
    oscillation : float
        Largest angular frequency of ``f`` in ``s``; panels are capped at one
        period ``2 pi / oscillation``.

    Returns
    -------
    complex or ndarray
        The integral, with absolute error at most
        ``panel_tol * (1 + |result|)``.  With ``full_output`` a
        :class:`QuadResult`.
    """
    if not b > a:
        raise ValueError("integrate_radial requires a < b")
    tol = 1e-10 if params is None else params.panel_tol
    max_panels = 100_000 if params is None else params.max_panels
    width = 2 * math.pi / oscillation if oscillation > 0 else math.inf
    edges = _panel_edges(a, b, width, breakpoints)

    if weight:
        def g(s):
            v = np.asarray(f(s))
            return v * (s if v.ndim == 1 else s[:, None])
    else:
        g = f

    engine = _Adaptive(g, b - a, lambda mag: tol * (1.0 + mag), max_panels)
    total, err = engine.run(edges[:-1], edges[1:])
    value = _finish(total, bool(engine.vector))
    if full_output:
        return QuadResult(value, err, engine.panels)
    return value


def integrate_spectral(
    f: Callable,
    params: TransformParams,
    oscillation_scale: float,
    *,
    lambda_min: Optional[float] = None,
    truncate: bool = True,
    full_output: bool = False,
):
    """Integrate ``F(lambda)`` over ``[lambda_min, lambda_max]``.

    ``f`` must already contain the ``lambda`` weight.  The range is split as

    * ``[lambda_min, pi/oscillation_scale]``: panels in ``log(lambda)``, where
      integrands of the inverse transform vary on a logarithmic scale;
    * the rest: linear panels of width ``pi/oscillation_scale`` (one period of
      a product of two Bessel oscillations of radius ``oscillation_scale``),
      processed in blocks of growing width.

    After each block the envelope of ``|F|`` is fitted by a power law; once
    the tail it implies beyond the block drops below
    ``tail_tol * (1 + |result|)`` the integration stops early.  Reaching
    ``lambda_max`` with a larger tail issues :class:`TruncationWarning`.

    ``lambda_min`` defaults to ``lambda_max * 1e-8``; the open piece
    ``(0, lambda_min)`` is the caller's business.
    """
    if not oscillation_scale > 0:
        raise ValueError("oscillation_scale must be positive")
    lam_max = params.lambda_max
    lam_min = lam_max * 1e-8 if lambda_min is None else float(lambda_min)
    if not 0 < lam_min < lam_max:
        raise ValueError("need 0 < lambda_min < lambda_max")
    tol = params.panel_tol
    h = math.pi / oscillation_scale
    lam_s = min(max(h, lam_min * 10), lam_max)
    span = lam_max

    engine_total = None
    panels = 0
    err_total = 0.0

    # logarithmic segment
    def in_log(u):
        lam = np.exp(u)
        v = np.asarray(f(lam))
        return v * (lam if v.ndim == 1 else lam[:, None])

    u0, u1 = math.log(lam_min), math.log(lam_s)
    n_log = max(2, int(math.ceil(u1 - u0)))
    log_edges = np.linspace(u0, u1, n_log + 1)
    log_engine = _Adaptive(in_log, u1 - u0, lambda mag: tol * (1.0 + mag), params.max_panels)
    total, err = log_engine.run(log_edges[:-1], log_edges[1:])
    vector = bool(log_engine.vector)
    panels += log_engine.panels
    err_total += err

    cutoff = lam_s
    tail_bound = 0.0
    if lam_s < lam_max:
        engine = _Adaptive(f, span, lambda mag: tol * (1.0 + mag), params.max_panels - panels)
        history: list[tuple[float, float]] = []
        start = lam_s
        stopped = False
        while start < lam_max * (1 - 1e-14):
            width = max(8 * h, 0.1 * start)
            stop = min(lam_max, start + width)
            if lam_max - stop < 2 * h:
                stop = lam_max
            edges = _panel_edges(start, stop, h)
            engine.envelope = 0.0
            block, err = engine.run(edges[:-1], edges[1:])
            total = total + block
            err_total += err
            history.append((0.5 * (start + stop), engine.envelope))
            cutoff = stop
            start = stop
            if truncate and len(history) >= 3:
                tail_bound = _tail_bound(history, stop)
                if tail_bound <= params.tail_tol * (1.0 + float(np.max(np.abs(total)))):
                    stopped = True
                    break
        panels += engine.panels
        if not stopped and truncate and len(history) >= 2:
            tail_bound = _tail_bound(history, cutoff)
            if tail_bound > params.tail_tol * (1.0 + float(np.max(np.abs(total)))):
                warnings.warn(
                    f"spectral tail bound {tail_bound:.2e} at lambda_max={lam_max:g} exceeds tail_tol",
                    TruncationWarning,
                    stacklevel=2,
                )
    value = _finish(total, vector)
    if full_output:
        return QuadResult(value, err_total, panels, cutoff, tail_bound)
    return value


def _tail_bound(history, end: float) -> float:
    """Bound int_end^inf |F| from the last two block envelopes (power-law fit)."""
    (l1, m1), (l2, m2) = history[-2], history[-1]
    if m2 == 0.0:
        return 0.0
    if m1 <= m2:
        return math.inf
    p = math.log(m1 / m2) / math.log(l2 / l1)
    if p <= 1.0:
        return math.inf
    # envelope extrapolated from the block centre to the block end
    m_end = m2 * (end / l2) ** (-p)
    return max(m_end, 0.0) * end / (p - 1.0) + 0.0 * m2


def cumulative_radial(profile: RadialProfile, power: float, *, order: int = 8) -> np.ndarray:
    """Prefix integrals ``int_{r0}^{r_i} s^power w(s) ds`` at every profile node.

    Each knot interval is integrated with an ``order``-point Gauss-Legendre
    rule applied to the interpolating spline, then summed.
    """
    x, w = gauss_legendre(order)
    a, b = profile.nodes[:-1], profile.nodes[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    s = mid[:, None] + half[:, None] * x
    vals = profile(s.ravel()).reshape(s.shape) * s ** power
    pieces = (vals * w).sum(axis=1) * half
    return np.concatenate([[0.0], np.cumsum(pieces)])


def weighted_l2(profile_or_values, nodes=None) -> float:
    """sqrt(int |w|^2 r dr) over the profile's grid (knot-interval Gauss rule)."""
    if isinstance(profile_or_values, RadialProfile):
        p = profile_or_values
    else:
        p = RadialProfile(float(nodes[0]), nodes, profile_or_values)
    x, w = gauss_legendre(8)
    a, b = p.nodes[:-1], p.nodes[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    s = mid[:, None] + half[:, None] * x
    vals = np.abs(p(s.ravel()).reshape(s.shape)) ** 2 * s
    return float(np.sqrt(np.sum((vals * w).sum(axis=1) * half)))


def relative_l2(approx: RadialProfile, reference: RadialProfile) -> float:
    """||approx - reference|| / ||reference|| in L2(r dr) on the reference grid."""
    diff = reference.with_values(approx(reference.nodes) - reference.values)
    ref = weighted_l2(reference)
    if ref == 0.0:
        return weighted_l2(diff)
    return weighted_l2(diff) / ref
