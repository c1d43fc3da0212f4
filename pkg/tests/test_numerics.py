import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enhanced_binding.numerics import (
    AngularScheme,
    FixedPointError,
    QuadratureError,
    RadialQuadrature,
    angular_average,
    fixed_point,
    gauss_panels,
    integrate_radial,
    product_scheme,
)
from enhanced_binding.selfenergy import response

C_REF = 3.04417


def closed_form_resolvent(C):
    s = np.sqrt(4 * C - 1)
    return 0.5 * np.log((2 + C) / C) - (np.arctan(3 / s) - np.arctan(1 / s)) / s


class TestIntegrateRadial:
    def test_linear(self):
        v, err = integrate_radial(lambda r: r, (0, 1))
        assert v == pytest.approx(0.5, abs=1e-14)
        assert err >= 0

    def test_log_integrand(self):
        v, _ = integrate_radial(lambda r: r * r / (1 + r), (0, 1))
        assert v == pytest.approx(np.log(2) - 0.5, rel=1e-12)

    def test_resolvent_closed_form(self):
        v, _ = integrate_radial(lambda r: r / (r * r + r + C_REF), (0, 1))
        assert v == pytest.approx(closed_form_resolvent(C_REF), rel=1e-12)

    @pytest.mark.parametrize("scheme", ["adaptive", "gauss"])
    def test_piecewise_with_breakpoint(self, scheme):
        q = RadialQuadrature(scheme=scheme)
        v, _ = integrate_radial(lambda r: np.where(r < 0.3, 1.0, r), (0, 1), q, points=[0.3])
        assert v == pytest.approx(0.3 + 0.5 * (1 - 0.09), abs=1e-10)

    def test_empty_interval(self):
        assert integrate_radial(np.sin, (2.0, 2.0)) == (0.0, 0.0)

    def test_unordered_interval(self):
        with pytest.raises(ValueError):
            integrate_radial(np.sin, (1.0, 0.0))

    def test_non_convergence_carries_estimate(self):
        q = RadialQuadrature(tol=1e-14, max_subdivisions=2)
        with pytest.raises(QuadratureError) as info:
            integrate_radial(lambda r: np.sin(1 / (r + 1e-4)), (0, 1), q)
        assert info.value.estimate is not None

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 0.95))
    def test_linear_and_additive(self, a, b, split):
        f = lambda r: np.exp(-r) * np.cos(3 * r)
        g = lambda r: r**2 / (1 + r)
        whole = integrate_radial(lambda r: a * f(r) + b * g(r), (0, 1))[0]
        parts = a * integrate_radial(f, (0, 1))[0] + b * integrate_radial(g, (0, 1))[0]
        assert whole == pytest.approx(parts, abs=2e-10)
        left = integrate_radial(f, (0, split))[0]
        right = integrate_radial(f, (split, 1))[0]
        assert left + right == pytest.approx(integrate_radial(f, (0, 1))[0], abs=2e-10)


def test_gauss_panels_nodes_inside_and_weights_positive():
    r, w = gauss_panels([0.0, 0.1, 1.0], 16)
    assert np.all(w > 0)
    assert np.all((r > 0) & (r < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-14)


class TestAngular:
    scheme = product_scheme()

    def test_invariants(self):
        s = self.scheme
        assert np.allclose(np.linalg.norm(s.nodes, axis=1), 1, atol=1e-14)
        assert np.all(s.nodes[:, 0] ** 2 + s.nodes[:, 1] ** 2 > 0)
        assert s.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert s.degree >= 4

    def test_constant(self):
        assert angular_average(lambda n: np.ones(len(n)), self.scheme) == pytest.approx(1, abs=1e-14)

    def test_transverse_projector(self):
        v = angular_average(lambda n: 1 - n[:, 2] ** 2, self.scheme)
        assert v == pytest.approx(2 / 3, abs=1e-14)

    def test_odd(self):
        assert abs(angular_average(lambda n: n[:, 0] * n[:, 1], self.scheme)) < 1e-14

    @pytest.mark.parametrize("i", range(3))
    def test_moments(self, i):
        s = self.scheme
        assert abs(angular_average(lambda n: n[:, i], s)) < 1e-12
        assert angular_average(lambda n: n[:, i] ** 2, s) == pytest.approx(1 / 3, abs=1e-12)
        j = (i + 1) % 3
        assert abs(angular_average(lambda n: n[:, i] * n[:, j], s)) < 1e-12

    def test_degree_exactness_quartic(self):
        # <x^4> = 1/5, <x^2 y^2> = 1/15 over the sphere
        s = self.scheme
        assert angular_average(lambda n: n[:, 2] ** 4, s) == pytest.approx(0.2, abs=1e-13)
        assert angular_average(lambda n: n[:, 0] ** 2 * n[:, 1] ** 2, s) == pytest.approx(1 / 15, abs=1e-13)

    def test_rejects_axis_node(self):
        with pytest.raises(ValueError):
            AngularScheme(np.array([[0.0, 0.0, 1.0]]), np.array([1.0]), 0)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            AngularScheme(np.array([[0.5, 0.5, 0.0]]), np.array([1.0]), 0)


class TestFixedPoint:
    def test_contraction(self):
        r = fixed_point(lambda x: x / 2, 1.0, tol=1e-12)
        assert abs(r.value) < 1e-11
        assert r.iterations > 0

    def test_cosine(self):
        r = fixed_point(np.cos, 1.0, tol=1e-12)
        assert r.value == pytest.approx(0.7390851332151607, abs=1e-11)
        assert abs(r.value - np.cos(r.value)) <= 1e-12

    def test_self_energy_map(self, sharp):
        # the first-order refinement of E = -alpha F(E) around E = 0
        a = 0.01
        F0 = 2 / np.pi * (np.log(2) - 0.5)
        r = fixed_point(lambda E: -a * response(E, sharp), 0.0, tol=1e-16)
        assert response(0.0, sharp) == pytest.approx(F0, rel=1e-12)
        # F'(0) = F(0) for the sharp unit cutoff, so E = -a F0 (1 - a F0) + O(a^3)
        assert r.value == pytest.approx(-a * F0 * (1 - a * F0), rel=3 * (a * F0) ** 2)

    def test_divergence_reports_trace(self):
        with pytest.raises(FixedPointError) as info:
            fixed_point(lambda x: 2 * x + 1, 1.0)
        assert len(info.value.trace) > 2

    def test_iteration_cap(self):
        with pytest.raises(FixedPointError):
            fixed_point(lambda x: -x + 1e-3 if x > 0 else -x - 1e-3, 1.0, max_iter=20)
