import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laserprop.grid import Grid1D
from laserprop.moments import gauss_legendre, grid_moments, scalar_moments
from laserprop.potentials import (
    LaserPulse,
    TimeDependentPotential,
    constant_pulse,
    double_well_2,
    e1,
    e2,
    laser_potential,
    sine_pulse,
    zero_pulse,
)


def pulse(fn):
    return LaserPulse(fn, "test")


class TestGaussLegendre:
    def test_midpoint(self):
        q = gauss_legendre(1)
        np.testing.assert_allclose(q.knots, [0.5])
        np.testing.assert_allclose(q.weights, [1.0])

    def test_two_point_closed_form(self):
        q = gauss_legendre(2)
        np.testing.assert_allclose(q.knots, [(1 - 1 / np.sqrt(3)) / 2, (1 + 1 / np.sqrt(3)) / 2])
        np.testing.assert_allclose(q.weights, [0.5, 0.5])

    def test_three_points_integrate_fifth_power(self):
        assert abs(gauss_legendre(3).integrate(lambda z: z**5) - 1 / 6) <= 1e-15

    @given(st.integers(1, 32))
    def test_exact_to_degree_2n_minus_1(self, n):
        q = gauss_legendre(n)
        assert q.weights.sum() == pytest.approx(1.0, abs=1e-14)
        for d in (0, n, 2 * n - 1):
            assert abs(q.integrate(lambda z: z**d) - 1 / (d + 1)) <= 1e-13

    @pytest.mark.parametrize("n", [0, 33, -1])
    def test_out_of_range(self, n):
        with pytest.raises(ValueError):
            gauss_legendre(n)


class TestScalarMoments:
    def test_no_field(self):
        m = scalar_moments(zero_pulse(), 0.3, 0.1, gauss_legendre(3), use_closed_form=False)
        assert (m.r, m.s) == (0.0, 0.0)

    def test_linear_field(self):
        h = 0.2
        m = scalar_moments(pulse(lambda t: t), 0.0, h, gauss_legendre(3))
        assert m.r == pytest.approx(h / 2, rel=1e-14)
        assert m.s == pytest.approx(h**3 / 6, rel=1e-13)

    def test_quadratic_field(self):
        h = 0.3
        m = scalar_moments(pulse(lambda t: t**2), 0.0, h, gauss_legendre(3))
        assert abs(m.r - h**2 / 3) <= 1e-14
        assert abs(m.s - h**4 / 6) <= 1e-14

    @given(st.floats(-5, 5), st.floats(0.01, 1))
    def test_constant_field_has_no_first_moment(self, a, h):
        m = scalar_moments(pulse(lambda t: np.full_like(t, a)), 0.4, h, gauss_legendre(4))
        assert m.r == pytest.approx(a, abs=1e-13)
        assert abs(m.s) <= 1e-14 * max(1, abs(a))

    @settings(deadline=None)
    @given(st.floats(0, 3), st.floats(1e-3, 0.5))
    def test_closed_form_sine_matches_quadrature(self, t0, h):
        p = sine_pulse(1.5, 4.0, 0.3)
        exact = scalar_moments(p, t0, h)
        quad = scalar_moments(p, t0, h, gauss_legendre(12), use_closed_form=False)
        assert exact.r == pytest.approx(quad.r, abs=1e-12)
        assert exact.s == pytest.approx(quad.s, abs=1e-12)

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValueError):
            scalar_moments(e2(), 0.0, 0.0)

    def test_split_at_discontinuities(self):
        # a step straddling the start of e1's first lobe is integrated piecewise
        t0, h = 0.59, 0.02
        m = scalar_moments(e1(), t0, h, gauss_legendre(8))
        exact = (np.cos(25 * np.pi * 0.6) - np.cos(25 * np.pi * 0.61)) / (25 * np.pi)
        assert m.r * h == pytest.approx(exact, rel=1e-12)

    def test_first_moment_scales_as_h_cubed(self):
        hs = 2.0 ** -np.arange(4, 9)
        s = [abs(scalar_moments(e2(), 0.9 - h / 2, h, gauss_legendre(11)).s) for h in hs]
        assert np.polyfit(np.log(hs), np.log(s), 1)[0] == pytest.approx(3.0, abs=0.1)


def xt_potential():
    return TimeDependentPotential(
        value=lambda x, t: x * t,
        dx=lambda x, t: np.full_like(x, t),
        dxx=lambda x, t: np.zeros_like(x),
        dxxxx=lambda x, t: np.zeros_like(x),
        label="x t",
    )


class TestGridMoments:
    def test_static_potential(self):
        g = Grid1D(-3.0, 3.0, 16)
        V = laser_potential(double_well_2(), zero_pulse())
        m = grid_moments(V, g, 0.2, 0.1, gauss_legendre(3))
        np.testing.assert_allclose(m.mu00, 0.1 * double_well_2()(g.nodes), rtol=1e-14, atol=1e-15)
        np.testing.assert_array_equal(m.mu11, 0.0)

    def test_x_times_t(self):
        g = Grid1D(-3.0, 3.0, 16)
        h = 0.4
        m = grid_moments(xt_potential(), g, 0.0, h, gauss_legendre(3), with_fourth=True)
        x = g.nodes
        np.testing.assert_allclose(m.mu00, x * h**2 / 2, atol=1e-15)
        np.testing.assert_allclose(m.mu11, x * h**3 / 12, atol=1e-15)
        np.testing.assert_allclose(m.dx_mu00, h**2 / 2)
        np.testing.assert_allclose(m.dx_mu11, h**3 / 12)
        np.testing.assert_array_equal(m.dxx_mu00, 0)
        np.testing.assert_array_equal(m.dxxxx_mu00, 0)

    @pytest.mark.parametrize("p", [e2(), e1(), sine_pulse(), constant_pulse(0.5)])
    def test_laser_case_matches_scalar_moments(self, p):
        g = Grid1D(-5.0, 5.0, 32)
        V0 = double_well_2()
        rule = gauss_legendre(11)
        t0, h = 0.58, 0.05
        sm = scalar_moments(p, t0, h, rule, use_closed_form=False)
        gm = grid_moments(laser_potential(V0, p), g, t0, h, rule)
        x = g.nodes
        np.testing.assert_allclose(gm.mu00, h * (V0(x) + sm.r * x), rtol=1e-13, atol=1e-14)
        np.testing.assert_allclose(gm.mu11, sm.s / 2 * x, rtol=1e-13, atol=1e-16)
        np.testing.assert_allclose(gm.dx_mu11, sm.s / 2, rtol=1e-13, atol=1e-16)

    def test_separable_fast_path_matches_general_quadrature(self):
        g = Grid1D(-5.0, 5.0, 32)
        V = laser_potential(double_well_2(), e2())
        plain = TimeDependentPotential(V.value, V.dx, V.dxx, V.dxxxx, "plain")
        a = grid_moments(V, g, 0.97, 0.01, gauss_legendre(11), with_fourth=True)
        b = grid_moments(plain, g, 0.97, 0.01, gauss_legendre(11), with_fourth=True)
        for name in ("mu00", "mu11", "dx_mu00", "dxx_mu00", "dx_mu11", "dxxxx_mu00"):
            np.testing.assert_allclose(getattr(a, name), getattr(b, name), rtol=1e-12, atol=1e-17)

    def test_mu11_scales_as_h_cubed(self):
        g = Grid1D(-np.pi, np.pi, 32)
        V = TimeDependentPotential(
            value=lambda x, t: np.cos(x) * np.sin(2 * np.pi * t),
            dx=lambda x, t: -np.sin(x) * np.sin(2 * np.pi * t),
            dxx=lambda x, t: -np.cos(x) * np.sin(2 * np.pi * t),
        )
        hs = 2.0 ** -np.arange(4, 9)
        sizes = [np.abs(grid_moments(V, g, 0.3 - h / 2, h).mu11).max() for h in hs]
        assert np.polyfit(np.log(hs), np.log(sizes), 1)[0] == pytest.approx(3.0, abs=0.1)
