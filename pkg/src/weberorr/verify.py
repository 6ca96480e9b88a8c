"""Property suite behind ``weberorr verify``.

Each property is a function ``(settings) -> PropertyResult`` registered in
:data:`PROPERTIES`.  Tolerances come from :class:`VerifySettings`, so a
deliberately wrong tolerance makes the suite fail loudly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .quadrature import TransformParams, relative_l2

log = logging.getLogger(__name__)

__all__ = ["VerifySettings", "PropertyResult", "PROPERTIES", "run_properties"]


@dataclass(frozen=True)
class VerifySettings:
    r0: float = 1.0
    params: TransformParams = field(default_factory=lambda: TransformParams.default(1.0))
    bessel_identity_tol: float = 1e-10
    robin_tol: float = 1e-10
    roundtrip_tol: float = 1e-3
    roundtrip_k: tuple = (0, 1, 3)
    moment_tol: float = 1e-6
    oracle_tol: float = 1e-3
    laplace_tol: float = 1e-3
    boundary_tol: float = 1e-6
    closed_form_tol: float = 1e-10
    gauge_tol: float = 1e-12


@dataclass
class PropertyResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _bessel_identities(cfg: VerifySettings) -> PropertyResult:
    from .special_functions import bessel_i, bessel_i_prime, bessel_j, bessel_k, bessel_k_prime, bessel_y

    x = np.geomspace(0.1, 100, 40)
    worst = 0.0
    for k in range(1, 21):
        cross = bessel_j(k, x) * bessel_y(k - 1, x) - bessel_j(k - 1, x) * bessel_y(k, x)
        worst = max(worst, float(np.max(np.abs(cross * (math.pi * x / 2) - 1))))
        jr = bessel_j(k - 1, x) + bessel_j(k + 1, x) - (2 * k / x) * bessel_j(k, x)
        worst = max(worst, float(np.max(np.abs(jr) / np.maximum(1, np.abs(bessel_j(k, x))))))
    xs = np.linspace(0.5, 20, 20)
    for k in range(0, 11):
        wr = bessel_i(k, xs) * bessel_k_prime(k, xs) - bessel_i_prime(k, xs) * bessel_k(k, xs)
        worst = max(worst, float(np.max(np.abs(wr * xs + 1))))
    return PropertyResult("bessel_identities", worst <= cfg.bessel_identity_tol, worst, cfg.bessel_identity_tol)


def _kernel_robin(cfg: VerifySettings) -> PropertyResult:
    from .weber_orr import KernelSpec, robin_functional

    rng = np.random.default_rng(7)
    ks = rng.integers(0, 11, 100)
    lams = np.exp(rng.uniform(math.log(0.01), math.log(50.0), 100))
    worst = max(abs(robin_functional(KernelSpec.associated(int(k), cfg.r0), float(l))) for k, l in zip(ks, lams))
    return PropertyResult("kernel_robin_nullspace", worst <= cfg.robin_tol, worst, cfg.robin_tol, {"pairs": 100})


def _roundtrip(cfg: VerifySettings) -> PropertyResult:
    from .fixtures import acceptance_profile
    from .weber_orr import roundtrip

    f = acceptance_profile(cfg.r0, 40.0 * cfg.r0)
    errs = {}
    for k in cfg.roundtrip_k:
        errs[int(k)] = roundtrip(int(k), f, cfg.params).error
    worst = max(errs.values(), default=0.0)
    return PropertyResult("roundtrip_with_correction", worst <= cfg.roundtrip_tol, worst, cfg.roundtrip_tol, {"errors": errs})


def _fixture(k: int, cfg: VerifySettings, v_infinity: float = 0.0):
    from .fixtures import compliant_bump, stretched_grid

    r = stretched_grid(cfg.r0, 30.0 * cfg.r0, 800, 0.005 * cfg.r0)
    target = 1j * v_infinity * np.sign(k) if abs(k) == 1 else 0.0
    return compliant_bump(k, cfg.r0, r, target=target, params=cfg.params)


def _moment(cfg: VerifySettings) -> PropertyResult:
    from .stokes import evolve_mode_times, invariant_moment

    drift = {}
    for k in (0, 1, 2):
        w0 = _fixture(k, cfg, 0.7)
        m0 = invariant_moment(k, w0, cfg.params)
        outs = evolve_mode_times(k, w0, [0.1, 0.5, 1.0], cfg.params)
        drift[k] = max(abs(invariant_moment(k, w, cfg.params) - m0) / (1 + abs(m0)) for w in outs)
    worst = max(drift.values())
    return PropertyResult("moment_invariance", worst <= cfg.moment_tol, worst, cfg.moment_tol, {"drift": drift})


def _oracle(cfg: VerifySettings) -> PropertyResult:
    from .oracle import FdScheme, fd_evolve_times
    from .stokes import evolve_mode_times

    errs = {}
    for k in (0, 1):
        w0 = _fixture(k, cfg, 0.7)
        spectral = evolve_mode_times(k, w0, [0.25, 1.0], cfg.params)
        fd = fd_evolve_times(k, w0, [0.25, 1.0], FdScheme.uniform(cfg.r0, 30.0 * cfg.r0, 5801, 1.25e-3))
        errs[k] = max(relative_l2(b, a) for a, b in zip(spectral, fd))
    worst = max(errs.values())
    return PropertyResult("oracle_equivalence", worst <= cfg.oracle_tol, worst, cfg.oracle_tol, {"errors": errs})


def _laplace(cfg: VerifySettings) -> PropertyResult:
    from .fixtures import bump_profile, stretched_grid
    from .analysis import laplace_of_evolution
    from .oracle import laplace_domain_solution

    r = stretched_grid(cfg.r0, 30.0 * cfg.r0, 800, 0.005 * cfg.r0)
    errs = {}
    for k in (1, 2):
        w0 = bump_profile(cfg.r0, r, 3.0 * cfg.r0, 0.8 * cfg.r0)
        radii = np.array([1.5, 3.0]) * cfg.r0
        taus = [1.0, 2.0, 5.0]
        numeric = laplace_of_evolution(k, w0, taus, radii, cfg.params)
        worst = 0.0
        for i, tau in enumerate(taus):
            ref = laplace_domain_solution(k, w0, tau, radii)
            worst = max(worst, float(np.max(np.abs(numeric[i] - ref) / np.abs(ref))))
        errs[k] = worst
    worst = max(errs.values())
    return PropertyResult("laplace_consistency", worst <= cfg.laplace_tol, worst, cfg.laplace_tol, {"errors": errs})


def _potential_flow(cfg: VerifySettings) -> PropertyResult:
    from .biot_savart import reconstruct_slip
    from .stokes import VorticityField

    r0 = cfg.r0
    rr = np.linspace(r0, 10 * r0, 50)
    ph = np.linspace(0, 2 * math.pi, 50)
    v = reconstruct_slip(VorticityField(r0, {}), 1.0, 0.0, cfg.params, r_nodes=rr)
    vr, vp = v.evaluate(rr, ph)
    err = max(
        float(np.max(np.abs(vr - (1 - r0**2 / rr**2) * np.cos(ph)))),
        float(np.max(np.abs(vp + (1 + r0**2 / rr**2) * np.sin(ph)))),
    )
    return PropertyResult("potential_flow", err <= cfg.closed_form_tol, err, cfg.closed_form_tol)


def _noslip_boundary(cfg: VerifySettings) -> PropertyResult:
    from .biot_savart import reconstruct_noslip
    from .stokes import VorticityField

    vinf = 0.8
    modes = {}
    for k in range(0, 4):
        p = _fixture(k, cfg, vinf)
        modes[k] = p
        if k:
            modes[-k] = p.conj()
    v = reconstruct_noslip(VorticityField(cfg.r0, modes), vinf, cfg.params)
    worst = max(v.boundary_values().values())
    return PropertyResult("noslip_boundary", worst <= cfg.boundary_tol, worst, cfg.boundary_tol)


def _gauge(cfg: VerifySettings) -> PropertyResult:
    from .biot_savart import reconstruct_slip
    from .stokes import VorticityField

    modes = {k: _fixture(k, cfg, 0.5) for k in (0, 1, 2)}
    w = VorticityField(cfg.r0, modes)
    a = reconstruct_slip(w, 0.5, 0.0, cfg.params)
    b = reconstruct_slip(w, 0.5, 1.0, cfg.params)
    worst = 0.0
    for k in a:
        (ar, ap), (br, bp) = a[k], b[k]
        expected = 1.0 / ap.nodes if k == 0 else 0.0
        worst = max(worst, float(np.max(np.abs(br.values - ar.values))))
        worst = max(worst, float(np.max(np.abs(bp.values - ap.values - expected))))
    return PropertyResult("gauge_freedom", worst <= cfg.gauge_tol, worst, cfg.gauge_tol)


PROPERTIES: dict[str, Callable[[VerifySettings], PropertyResult]] = {
    "bessel_identities": _bessel_identities,
    "kernel_robin_nullspace": _kernel_robin,
    "roundtrip_with_correction": _roundtrip,
    "moment_invariance": _moment,
    "oracle_equivalence": _oracle,
    "laplace_consistency": _laplace,
    "potential_flow": _potential_flow,
    "noslip_boundary": _noslip_boundary,
    "gauge_freedom": _gauge,
}


def run_properties(names, cfg: VerifySettings) -> list[PropertyResult]:
    """Run the named properties in order; an exception counts as a failure."""
    results = []
    for name in names:
        if name not in PROPERTIES:
            raise KeyError(f"unknown property {name!r}")
        log.info("verifying %s", name)
        try:
            res = PROPERTIES[name](cfg)
        except Exception as exc:  # a crash is a failed property, reported with its message
            log.exception("property %s raised", name)
            res = PropertyResult(name, False, math.nan, math.nan, {"error": f"{type(exc).__name__}: {exc}"})
        results.append(res)
    return results
