import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enhanced_binding import oracles
from enhanced_binding import schrodinger as sch
from enhanced_binding.potential import indicator_well, positive_part, smooth_well, zero_potential

LAMBDA0 = np.pi**2 / 4
C_W = np.pi**4 / 32


@pytest.fixture(scope="module")
def state_01():
    return sch.bound_state(indicator_well(), LAMBDA0, 0.1)


class TestCriticalCoupling:
    @pytest.mark.parametrize(
        "depth,radius,expected",
        [(1.0, 1.0, np.pi**2 / 4), (1.0, 2.0, np.pi**2 / 16), (2.0, 1.0, np.pi**2 / 8)],
    )
    def test_square_well(self, depth, radius, expected):
        lam = sch.critical_coupling(indicator_well(depth, radius))
        assert lam == pytest.approx(expected, rel=1e-10)
        assert oracles.square_well_critical(depth, radius) == pytest.approx(expected, rel=1e-15)

    def test_step_refinement(self):
        W = indicator_well()
        a = sch.critical_coupling(W)
        b = sch.critical_coupling(W, max_step=0.01)
        assert abs(a - b) < 1e-10 * a

    def test_smooth_well_scaling(self):
        # lambda0 is homogeneous of degree -1 in the depth and -2 in the radius
        a = sch.critical_coupling(smooth_well())
        assert sch.critical_coupling(smooth_well(depth=3.0)) == pytest.approx(a / 3, rel=1e-9)
        assert sch.critical_coupling(smooth_well(radius=2.0)) == pytest.approx(a / 4, rel=1e-9)

    def test_no_binding(self):
        with pytest.raises(sch.NoBindingError):
            sch.critical_coupling(zero_potential())
        with pytest.raises(sch.NoBindingError):
            sch.critical_coupling(indicator_well(depth=-1.0))


class TestBoundState:
    def test_kappa_matches_matching_condition(self, state_01):
        ref = oracles.square_well_kappa(1.0, 1.0, LAMBDA0 / 0.9)
        assert state_01.kappa == pytest.approx(ref, rel=1e-10)
        assert state_01.kappa == pytest.approx(0.131842842637, rel=1e-10)

    def test_energy_against_finite_differences(self, state_01):
        W = indicator_well()
        e1 = oracles.fd_ground_energy(W, LAMBDA0, 0.1, n=20000)
        e2 = oracles.fd_ground_energy(W, LAMBDA0, 0.1, n=60000)
        richardson = (9 * e2 - e1) / 8
        assert state_01.energy == pytest.approx(richardson, rel=1e-5)
        assert state_01.energy == pytest.approx(-0.01564428163913551, rel=1e-10)

    def test_gradient_norm(self, state_01):
        ref = oracles.square_well_gradient_norm(1.0, 1.0, LAMBDA0 / 0.9)
        assert state_01.moments["grad2"] == pytest.approx(ref, rel=1e-10)
        assert state_01.moments["grad2"] == pytest.approx(0.3173257474412, rel=1e-10)

    def test_normalised(self, state_01):
        assert state_01.moments["norm2"] == pytest.approx(1.0, abs=1e-12)

    def test_virial(self, state_01):
        # (1 - gamma) |grad f|^2 + lam <W f, f> = e
        m = state_01.moments
        assert 0.9 * m["grad2"] + LAMBDA0 * m["W_f2"] == pytest.approx(state_01.energy, rel=1e-9)

    def test_exterior_tail(self, state_01):
        r = np.array([2.0, 3.0])
        u, du, _ = state_01.u(r)
        assert np.log(u[0] / u[1]) == pytest.approx(state_01.kappa, rel=1e-12)
        assert np.allclose(du, -state_01.kappa * u)

    def test_energy_monotone_in_gamma(self):
        W = indicator_well()
        es = [sch.bound_state(W, LAMBDA0, g).energy for g in (0.2, 0.1, 0.05, 0.02, 0.005)]
        assert all(e < 0 for e in es)
        assert all(a < b for a, b in zip(es, es[1:]))
        assert abs(es[-1]) < 1e-4

    def test_per_axis_gradients(self, state_01):
        g, axes = sch.gradient_norms(state_01)
        assert sum(axes) == pytest.approx(g, rel=1e-15)

    def test_no_state_below_threshold(self):
        with pytest.raises(sch.NoBindingError):
            sch.bound_state(indicator_well(), 0.5 * LAMBDA0, 0.1)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, -0.1])
    def test_gamma_range(self, gamma):
        with pytest.raises(ValueError):
            sch.bound_state(indicator_well(), LAMBDA0, gamma)

    @settings(max_examples=8, deadline=None)
    @given(st.floats(0.02, 0.6))
    def test_kappa_property(self, gamma):
        sol = sch.bound_state(indicator_well(), LAMBDA0, gamma)
        ref = oracles.square_well_kappa(1.0, 1.0, LAMBDA0 / (1 - gamma))
        assert sol.kappa == pytest.approx(ref, rel=1e-9)
        assert sol.moments["norm2"] == pytest.approx(1.0, abs=1e-10)


class TestGradientBound:
    def test_holds_for_square_well(self):
        sol = sch.bound_state(indicator_well(), LAMBDA0, 0.05)
        res = sch.gradient_bound_check(sol, LAMBDA0, C_W, 0.1 * C_W)
        assert res.satisfied
        assert res.ratio < C_W

    def test_form_is_laplacian_plus_potential(self, state_01):
        m = state_01.moments
        assert sch.gradient_form(state_01, LAMBDA0) == m["lap2"] + LAMBDA0 * m["W_grad2"]
        assert sch.form_value(state_01, LAMBDA0) == m["grad2"] + LAMBDA0 * m["W_f2"]

    def test_positive_part_dominates(self, state_01):
        # replacing W by W_+ can only raise the form
        W = indicator_well()
        a = sch.gradient_form(state_01, LAMBDA0, W)
        b = sch.gradient_form(state_01, LAMBDA0, positive_part(W))
        assert b >= a
