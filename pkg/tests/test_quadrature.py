from __future__ import annotations

import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weberorr.quadrature import (
    QuadratureError,
    QuadResult,
    RadialProfile,
    SpectralProfile,
    TransformParams,
    TruncationWarning,
    cumulative_radial,
    gauss_legendre,
    integrate_radial,
    integrate_spectral,
    relative_l2,
    weighted_l2,
)
from weberorr.special_functions import bessel_j

P = TransformParams.default(1.0)


class TestParams:
    def test_defaults(self):
        p = TransformParams.default(2.0)
        assert p.lambda_max == 100.0
        assert p.r_max == 100.0
        assert p.panel_tol == 1e-10

    def test_overrides_ignore_none(self):
        p = TransformParams.default(1.0, lambda_max=None, tail_tol=1e-7)
        assert p.lambda_max == 200.0 and p.tail_tol == 1e-7

    @pytest.mark.parametrize("field", ["lambda_max", "r_max", "panel_tol", "tail_tol"])
    def test_positivity(self, field):
        with pytest.raises(ValueError):
            P.with_(**{field: 0.0})

    def test_radius_check(self):
        with pytest.raises(ValueError):
            TransformParams(10.0, 2.0).check_radius(3.0)
        with pytest.raises(ValueError):
            TransformParams.default(-1.0)


class TestProfiles:
    def test_validation(self):
        with pytest.raises(ValueError):
            RadialProfile(1.0, [1.0], [0.0])
        with pytest.raises(ValueError):
            RadialProfile(1.0, [1.0, 2.0], [0.0])
        with pytest.raises(ValueError):
            RadialProfile(1.0, [1.1, 2.0], [0.0, 0.0])
        with pytest.raises(ValueError):
            RadialProfile(1.0, [1.0, 3.0, 2.0], [0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            RadialProfile(1.0, [1.0, 2.0], [0.0, np.nan])

    def test_readonly_and_interpolation(self):
        r = np.linspace(1, 5, 60)
        p = RadialProfile.from_function(1.0, r, lambda s: s**3 - 2j * s)
        with pytest.raises(ValueError):
            p.values[0] = 1
        x = np.array([1.37, 2.9, 4.99])
        assert np.allclose(p(x), x**3 - 2j * x, rtol=1e-10)
        assert p(7.0) == 0

    def test_helpers(self):
        r = np.linspace(1, 3, 5)
        p = RadialProfile(1.0, r, 1j * r)
        assert np.array_equal(p.conj().values, -1j * r)
        assert np.array_equal(p.scaled(2).values, 2j * r)
        assert RadialProfile.zeros(1.0, r).is_zero()
        assert p.r_end == 3.0

    def test_spectral_validation(self):
        with pytest.raises(ValueError):
            SpectralProfile([0.0, 1.0], [1, 2])
        with pytest.raises(ValueError):
            SpectralProfile([2.0, 1.0], [1, 2])
        with pytest.raises(ValueError):
            SpectralProfile([1.0, 2.0], [1, 2], weights=[1.0])
        assert SpectralProfile([1.0, 2.0], [1, 2]).lambda_max == 2.0


class TestRadialExamples:
    def test_zero(self):
        assert integrate_radial(lambda s: 0 * s, 1, 10, P) == 0

    def test_inverse_weighted(self):
        assert integrate_radial(lambda s: 1 / s, 1, math.e, P) == pytest.approx(math.e - 1, abs=1e-12)

    def test_exponential(self):
        exact = 2 * math.exp(-1) - 41 * math.exp(-40)
        assert abs(integrate_radial(lambda s: np.exp(-s), 1, 40, P) - exact) <= 1e-10

    def test_requires_ordered_interval(self):
        with pytest.raises(ValueError):
            integrate_radial(np.exp, 2, 1, P)

    def test_vector_valued(self):
        out = integrate_radial(lambda s: np.stack([s, s**2], axis=1), 0.0, 1.0, P, weight=False)
        assert np.allclose(out, [0.5, 1 / 3], atol=1e-13)

    def test_max_panels(self):
        tight = P.with_(panel_tol=1e-15, max_panels=3)
        with pytest.raises(QuadratureError) as info:
            integrate_radial(lambda s: np.sin(40 * s**2), 0, 5, tight, weight=False)
        assert math.isfinite(abs(info.value.value))
        assert info.value.error > 0

    def test_full_output(self):
        res = integrate_radial(np.cos, 0, 1, P, weight=False, full_output=True)
        assert isinstance(res, QuadResult)
        assert res.value == pytest.approx(math.sin(1), abs=1e-13)
        assert res.panels >= 1

    def test_additivity(self):
        f = lambda s: np.cos(3 * s) * np.exp(-s / 4)
        whole = integrate_radial(f, 1, 9, P)
        parts = integrate_radial(f, 1, 4.3, P) + integrate_radial(f, 4.3, 9, P)
        assert abs(whole - parts) <= 2 * P.panel_tol * (1 + abs(whole))

    def test_linearity(self):
        f = lambda s: np.sin(5 * s) / s
        g = lambda s: np.exp(-s) * s
        a, b = 2 - 1j, 0.3
        lhs = integrate_radial(lambda s: a * f(s) + b * g(s), 1, 12, P)
        rhs = a * integrate_radial(f, 1, 12, P) + b * integrate_radial(g, 1, 12, P)
        assert abs(lhs - rhs) <= 2 * P.panel_tol * (1 + abs(lhs))


OSC_BANK = [
    (lambda s: np.cos(7 * s) * np.exp(-s / 3), lambda s: mp.cos(7 * s) * mp.exp(-s / 3)),
    (lambda s: np.sin(11 * s) / s, lambda s: mp.sin(11 * s) / s),
    (lambda s: np.cos(s * s), lambda s: mp.cos(s * s)),
    (lambda s: bessel_j(0, 9 * s), lambda s: mp.besselj(0, 9 * s)),
    (lambda s: bessel_j(3, 6 * s) * np.exp(-0.2 * s), lambda s: mp.besselj(3, 6 * s) * mp.exp(-0.2 * s)),
    (lambda s: np.sin(4 * s) ** 2 * np.log(s), lambda s: mp.sin(4 * s) ** 2 * mp.log(s)),
    (lambda s: np.cos(15 * s + 0.3) / np.sqrt(s), lambda s: mp.cos(15 * s + mp.mpf("0.3")) / mp.sqrt(s)),
    (lambda s: np.sin(3 * s) * np.cos(8 * s), lambda s: mp.sin(3 * s) * mp.cos(8 * s)),
    (lambda s: np.exp(-((s - 5) ** 2)) * np.cos(20 * s), lambda s: mp.exp(-((s - 5) ** 2)) * mp.cos(20 * s)),
    (lambda s: np.sin(2 * s**1.5), lambda s: mp.sin(2 * s ** mp.mpf(1.5))),
]


def _oracle(fm, a, b, period):
    mp.mp.dps = 30
    pts = mp.linspace(a, b, int((b - a) / period) + 2)
    return complex(mp.quad(fm, pts))


@pytest.mark.parametrize("idx", range(len(OSC_BANK)))
def test_halving_tolerance_is_monotone(idx):
    fn, fm = OSC_BANK[idx]
    ref = _oracle(fm, 1, 10, 0.2)
    errs = []
    for tol in [1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5, 3.125e-5]:
        p = P.with_(panel_tol=tol)
        errs.append(abs(integrate_radial(fn, 1, 10, p, weight=False) - ref))
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse + 1e-14
    assert errs[-1] <= 3.125e-5 * (1 + abs(ref))


class TestSpectral:
    def test_zero(self):
        assert integrate_spectral(lambda lam: 0 * lam, P, 1.0) == 0

    def test_gaussian_moment(self):
        p = P.with_(tail_tol=1e-12)
        v = integrate_spectral(lambda lam: lam * np.exp(-lam * lam), p, 1.0)
        assert abs(v - 0.5) <= 1e-10

    def test_bessel_gaussian_against_mpmath(self):
        mp.mp.dps = 30
        ref = float(mp.quad(lambda x: mp.besselj(0, 5 * x) * mp.exp(-x * x) * x, mp.linspace(0, 12, 40)))
        p = P.with_(tail_tol=1e-12)
        v = integrate_spectral(lambda lam: bessel_j(0, 5 * lam) * np.exp(-lam * lam) * lam, p, 5.0)
        assert abs(v - ref) <= 1e-8
        # closed form exp(-25/4)/2 as a second check on the reference itself
        assert ref == pytest.approx(0.5 * math.exp(-6.25), rel=1e-12)

    def test_truncation_warning(self):
        p = TransformParams(lambda_max=20.0, r_max=50.0)
        with pytest.warns(TruncationWarning):
            integrate_spectral(lambda lam: 1.0 / (1 + lam) ** 1.2, p, 20.0)

    def test_early_stop_reports_cutoff(self):
        res = integrate_spectral(lambda lam: lam * np.exp(-lam), P, 1.0, full_output=True)
        assert res.cutoff < P.lambda_max
        assert res.value == pytest.approx(1.0, abs=1e-5)

    def test_no_truncation_runs_to_lambda_max(self):
        p = TransformParams(lambda_max=30.0, r_max=50.0)
        res = integrate_spectral(lambda lam: lam * np.exp(-lam), p, 1.0, truncate=False, full_output=True)
        assert res.cutoff == pytest.approx(30.0)
        assert res.value == pytest.approx(1 - 31 * math.exp(-30), abs=1e-10)


class TestNorms:
    def test_gauss_legendre(self):
        x, w = gauss_legendre(16)
        assert w.sum() == pytest.approx(2.0, abs=1e-14)
        assert np.dot(w, x**30) == pytest.approx(2 / 31, abs=1e-14)

    def test_cumulative(self):
        r = np.linspace(1, 4, 50)
        p = RadialProfile(1.0, r, r**2)
        cum = cumulative_radial(p, 1.0)
        assert np.allclose(cum, (r**4 - 1) / 4, atol=1e-12)

    def test_weighted_l2(self):
        r = np.linspace(1, 3, 40)
        assert weighted_l2(np.ones(40, complex), r) == pytest.approx(math.sqrt(4.0), rel=1e-12)
        p = RadialProfile(1.0, r, 1j * np.ones(40))
        assert weighted_l2(p) == pytest.approx(2.0, rel=1e-12)

    def test_relative_l2(self):
        r = np.linspace(1, 3, 40)
        a = RadialProfile(1.0, r, r)
        assert relative_l2(a, a) == 0
        b = RadialProfile(1.0, r, 1.01 * r)
        assert relative_l2(b, a) == pytest.approx(0.01, rel=1e-10)
        z = RadialProfile.zeros(1.0, r)
        assert relative_l2(a, z) == pytest.approx(weighted_l2(a))


@settings(max_examples=25, deadline=None)
@given(
    c=st.floats(1.2, 9.5),
    w=st.floats(0.5, 20.0),
)
def test_additivity_property(c, w):
    f = lambda s: np.sin(w * s) * np.exp(-s / 5)
    whole = integrate_radial(f, 1, 10, P)
    parts = integrate_radial(f, 1, c, P) + integrate_radial(f, c, 10, P)
    assert abs(whole - parts) <= 2 * P.panel_tol * (1 + abs(whole))
