from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from weberorr.fixtures import bump_profile, compliant_bump, stretched_grid
from weberorr.quadrature import RadialProfile, TransformParams, relative_l2
from weberorr.special_functions import bessel_j
from weberorr.stokes import (
    NoslipViolation,
    NoslipWarning,
    StokesProblem,
    VorticityField,
    check_noslip_relations,
    evolve_mode,
    evolve_mode_robin,
    evolve_mode_times,
    invariant_moment,
    noslip_target,
    radial_laplacian,
    robin_residual,
    solve_stokes,
)
from weberorr.weber_orr import correction_term

P = TransformParams.default(1.0)
GRID = stretched_grid(1.0, 30.0, 500, 0.01)


def _compliant(k, v_infinity=0.7, r=GRID, **kw):
    target = 1j * v_infinity * np.sign(k) if abs(k) == 1 else 0.0
    return compliant_bump(k, 1.0, r, target=target, params=P, **kw)


class TestLaplacian:
    @pytest.mark.parametrize("k", [0, 1, 2, 5])
    def test_harmonic_power(self, k):
        r = np.linspace(1, 4, 400)
        w = RadialProfile(1.0, r, r ** -float(k))
        lap = radial_laplacian(k, w).values
        assert np.max(np.abs(lap[1:-1])) < 1e-2
        assert np.max(np.abs(lap[[0, -1]])) < 0.1  # one-sided end stencils, O(h^2)

    def test_constant(self):
        r = np.linspace(1, 4, 50)
        assert np.allclose(radial_laplacian(0, RadialProfile(1.0, r, np.full(50, 2.0))).values, 0, atol=1e-10)

    def test_bessel_eigenfunction_second_order(self):
        errs = []
        for n in (200, 400, 800):
            r = np.linspace(1, 4, n)
            w = RadialProfile(1.0, r, bessel_j(2, 3 * r))
            lap = radial_laplacian(2, w).values
            errs.append(np.max(np.abs(lap + 9 * w.values)[1:-1]))
        assert errs[0] / errs[1] == pytest.approx(4, rel=0.15)
        assert errs[1] / errs[2] == pytest.approx(4, rel=0.15)

    def test_needs_five_nodes(self):
        with pytest.raises(ValueError):
            radial_laplacian(0, RadialProfile(1.0, np.linspace(1, 2, 4), np.zeros(4)))


class TestRobinResidual:
    @pytest.mark.parametrize("k", [0, 1, 3, -2])
    def test_power_solution(self, k):
        r = np.linspace(1, 3, 300)
        w = RadialProfile(1.0, r, r ** -float(abs(k)))
        assert abs(robin_residual(k, w)) < 1e-4  # O(h^3) one-sided stencil, h = 2/299

    def test_kernel_sampled(self):
        from weberorr.weber_orr import KernelSpec, kernel

        spec = KernelSpec.associated(2, 1.0)
        errs = []
        for h in (1e-2, 5e-3):
            r = np.arange(1.0, 3.0, h)
            errs.append(abs(robin_residual(2, RadialProfile(1.0, r, kernel(spec, 1.0, r)))))
        assert errs[1] < 1e-5
        assert errs[0] / errs[1] > 6  # third order in h

    def test_constant_violates(self):
        r = np.linspace(1, 3, 20)
        assert robin_residual(1, RadialProfile(1.0, r, np.full(20, 2.0))) == pytest.approx(2.0)


class TestMoment:
    def test_zero(self):
        assert invariant_moment(3, RadialProfile.zeros(1.0, GRID), P) == 0

    def test_power(self):
        r = np.linspace(1, 40, 2000)
        w = RadialProfile(1.0, r, r**-2.0)
        assert invariant_moment(2, w, P) == pytest.approx(0.5 * (1 - 40.0**-2), rel=1e-9)

    def test_sign_of_k_irrelevant(self):
        w = bump_profile(1.0, GRID, 3.0, 1.0)
        assert invariant_moment(-2, w, P) == invariant_moment(2, w, P)


class TestNoslip:
    def test_target(self):
        assert noslip_target(1, 1.0, 2.0) == 2j
        assert noslip_target(-1, 1.0, 2.0) == -2j
        assert noslip_target(0, 1.0, 2.0) == 0
        assert noslip_target(3, 1.0, 2.0) == 0

    def test_zero_field(self):
        rep = check_noslip_relations(StokesProblem(1.0, 0.0, VorticityField(1.0, {})), P)
        assert rep.ok and rep.max_residual == 0

    def test_constructed_k1(self):
        g = bump_profile(1.0, GRID, 3.0, 0.8)
        g = g.scaled(1 / invariant_moment(1, g, P))
        vinf = 1.5
        field = VorticityField(1.0, {1: g.scaled(1j * vinf), -1: g.scaled(-1j * vinf)})
        rep = check_noslip_relations(StokesProblem(1.0, vinf, field), P)
        assert rep.max_residual < 1e-12

    def test_missing_mass(self):
        field = VorticityField(1.0, {1: _compliant(1, 0.0)})
        rep = check_noslip_relations(StokesProblem(1.0, 1.0, field), P)
        assert rep.residuals[1] == pytest.approx(-1j, abs=1e-10)
        assert rep.residuals[-1] == pytest.approx(1j)
        assert not rep.ok
        assert rep.as_dict()["ok"] is False

    def test_circulation(self):
        field = VorticityField(1.0, {0: bump_profile(1.0, GRID, 3.0, 0.8)})
        rep = check_noslip_relations(StokesProblem(1.0, 0.0, field), P)
        assert abs(rep.circulation) > 0.1 and not rep.ok


class TestEvolveMode:
    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_initial_time_reproduces(self, k):
        w0 = _compliant(k)
        assert relative_l2(evolve_mode(k, w0, 0.0, P), w0) <= 1e-3

    def test_zero(self):
        assert evolve_mode(2, RadialProfile.zeros(1.0, GRID), 0.7, P).is_zero()

    def test_negative_time(self):
        with pytest.raises(ValueError):
            evolve_mode(1, _compliant(1), -1.0, P)

    def test_warns_on_nonzero_moment(self):
        with pytest.warns(NoslipWarning):
            evolve_mode(2, bump_profile(1.0, GRID, 3.0, 0.8), 0.1, P)

    def test_sign_symmetry(self):
        w0 = _compliant(1)
        a = evolve_mode(1, w0, 0.3, P)
        b = evolve_mode(-1, w0, 0.3, P)
        assert np.array_equal(a.values, b.values)

    def test_other_grid(self):
        w0 = _compliant(0)
        r = np.linspace(1, 10, 40)
        out = evolve_mode(0, w0, 0.2, P, r_nodes=r)
        ref = evolve_mode(0, w0, 0.2, P)
        assert np.allclose(out.values, ref(r), atol=1e-6)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_moment_and_robin_along_trajectory(self, k):
        w0 = _compliant(k)
        m0 = invariant_moment(k, w0, P)
        for w in evolve_mode_times(k, w0, [0.1, 0.5, 1.0], P):
            assert abs(invariant_moment(k, w, P) - m0) <= 1e-6 * (1 + abs(m0))
            assert abs(robin_residual(k, w)) <= 1e-4 * np.max(np.abs(w.values))

    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_semigroup(self, k):
        w0 = _compliant(k)
        one = evolve_mode(k, w0, 0.5, P)
        two = evolve_mode(k, evolve_mode(k, w0, 0.2, P), 0.3, P)
        assert relative_l2(two, one) <= 3e-3


def _sup(w):
    return float(np.max(np.abs(w.values)))


DECAY_BANK = [(0, 3.0, 0.8), (0, 5.0, 1.5), (1, 5.0, 1.5), (2, 5.0, 1.5), (3, 5.0, 1.5)]


@pytest.mark.parametrize("k,center,width", DECAY_BANK)
def test_decay_bank(k, center, width):
    w0 = bump_profile(1.0, GRID, center, width)
    times = [0.25, 0.5, 1.0, 2.0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NoslipWarning)
        outs = evolve_mode_times(k, w0, times, P)
    if k >= 2:
        # full Robin solution: add the stationary r^-k part
        res = correction_term(k, w0, GRID, P)
        outs = [o.with_values(o.values + res.values) for o in outs]
    norms = [_sup(w0)] + [_sup(o) for o in outs]
    assert all(b <= a * (1 + 1e-6) for a, b in zip(norms, norms[1:])), norms


def test_decay_counterexample():
    """The Robin condition is not dissipative: a bump near the disc can grow in max norm."""
    w0 = bump_profile(1.0, GRID, 3.0, 0.8)
    a, b = evolve_mode_times(1, w0, [1.0, 2.0], P)
    assert _sup(b) > 1.2 * _sup(a)


class TestEvolveRobin:
    def test_low_modes_match(self):
        w0 = _compliant(1)
        assert np.array_equal(evolve_mode_robin(1, w0, 0.3, P).values, evolve_mode(1, w0, 0.3, P).values)

    def test_initial_time(self):
        w0 = bump_profile(1.0, GRID, 3.0, 0.8)
        assert relative_l2(evolve_mode_robin(3, w0, 0.0, P), w0) <= 1e-3

    def test_long_time_limit(self):
        r = stretched_grid(1.0, 30.0, 300, 0.02)
        w0 = bump_profile(1.0, r, 3.0, 0.8)
        m = invariant_moment(3, w0, P)
        out = evolve_mode_robin(3, w0, 400.0, P)
        stationary = 4 * m * r**-3.0
        assert np.max(np.abs(out.values - stationary)) <= 1e-3 * np.max(np.abs(stationary))


class TestSolveStokes:
    def _problem(self, vinf=0.7):
        modes = {}
        for k in (0, 1, 2):
            # the k = 0 mode of a real field is real
            p = _compliant(k, vinf, amplitude=1 + 0.5j if k else 1.0)
            modes[k] = p
            if k:
                modes[-k] = p.conj()
        return StokesProblem(1.0, vinf, VorticityField(1.0, modes))

    def test_zero(self):
        out = solve_stokes(StokesProblem(1.0, 0.0, VorticityField(1.0, {0: RadialProfile.zeros(1.0, GRID)})), [0.5], P)
        assert out[0.5][0].is_zero()

    def test_realness_and_workers(self):
        prob = self._problem()
        serial = solve_stokes(prob, [0.25], P)
        threaded = solve_stokes(prob, [0.25], P, workers=3)
        field = serial[0.25]
        assert field.realness_defect() == 0.0
        for k in field:
            assert np.array_equal(field[k].values, threaded[0.25][k].values)
        vals = field.evaluate(np.array([1.5, 2.5]), np.array([0.3, 2.0]))
        assert np.max(np.abs(vals.imag)) < 1e-12

    def test_single_mode_matches_evolve(self):
        w0 = _compliant(0)
        out = solve_stokes(StokesProblem(1.0, 0.0, VorticityField(1.0, {0: w0})), [0.4], P)
        assert np.array_equal(out[0.4][0].values, evolve_mode(0, w0, 0.4, P).values)

    def test_refuses_violation(self):
        field = VorticityField(1.0, {1: _compliant(1, 0.0), -1: _compliant(-1, 0.0)})
        with pytest.raises(NoslipViolation):
            solve_stokes(StokesProblem(1.0, 1.0, field), [0.1], P)


class TestTypes:
    def test_field_validation(self):
        with pytest.raises(ValueError):
            VorticityField(1.0, {0: RadialProfile.zeros(2.0, [2.0, 3.0])})
        with pytest.raises(TypeError):
            VorticityField(1.0, {0: np.zeros(3)})
        assert VorticityField(1.0, {3: RadialProfile.zeros(1.0, GRID)}).k_max == 3

    def test_problem_validation(self):
        f = VorticityField(1.0, {5: RadialProfile.zeros(1.0, GRID)})
        with pytest.raises(ValueError):
            StokesProblem(1.0, 0.0, f, K_max=4)
        with pytest.raises(ValueError):
            StokesProblem(1.0, math.inf, VorticityField(1.0, {}))
