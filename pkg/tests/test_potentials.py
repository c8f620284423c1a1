import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from laserprop.grid import Grid1D
from laserprop.potentials import (
    double_well_1,
    double_well_2,
    e1,
    e1_plotted,
    e2,
    eval_V_hat,
    eval_V_tilde,
    get_potential,
    get_pulse,
    harmonic,
    laser_potential,
    negated,
    polynomial_potential,
    pulse_e1,
    pulse_e2,
    sine_pulse,
    tabulated_potential,
    zero_potential,
)


class PointGrid:
    """Stand-in exposing only the nodes, for evaluating at chosen points."""

    def __init__(self, *x):
        self.nodes = np.array(x, dtype=float)


class TestVTilde:
    def test_zero_field_gives_static_potential(self):
        g = Grid1D(-3.0, 3.0, 16)
        np.testing.assert_array_equal(eval_V_tilde(double_well_1(), 0.0, g), double_well_1()(g.nodes))

    def test_linear_term_only(self):
        assert eval_V_tilde(zero_potential(), 2.0, PointGrid(3.0))[0] == 6.0

    def test_double_well(self):
        assert eval_V_tilde(double_well_1(), 1.0, PointGrid(1.0))[0] == -13.0


class TestVHat:
    def test_small_step_limit(self):
        g = Grid1D(-3.0, 3.0, 16)
        np.testing.assert_allclose(eval_V_hat(double_well_1(), 0.3, 1e-9, g),
                                   eval_V_tilde(double_well_1(), 0.3, g), rtol=1e-15, atol=1e-12)

    def test_pure_field(self):
        x = np.linspace(-2, 2, 5)
        np.testing.assert_allclose(eval_V_hat(zero_potential(), 1.0, 1.0, PointGrid(*x)), x - 1 / 24)

    def test_quadratic(self):
        V0 = polynomial_potential([0, 0, 1], "x^2")
        assert eval_V_hat(V0, 0.0, 0.1, PointGrid(1.0))[0] == pytest.approx(1 - 0.01 / 24 * 4, rel=1e-14)

    def test_correction_scales_as_h_squared(self):
        g = Grid1D(-4.0, 4.0, 32)
        hs = np.array([0.1, 0.05, 0.025])
        gaps = [np.max(np.abs(eval_V_hat(double_well_1(), 0.7, h, g) - eval_V_tilde(double_well_1(), 0.7, g)))
                for h in hs]
        assert np.polyfit(np.log(hs), np.log(gaps), 1)[0] == pytest.approx(2.0, abs=0.01)


class TestStaticPotentials:
    @given(st.floats(-6, 6))
    def test_double_wells_are_even(self, x):
        for V in (double_well_1(), double_well_2()):
            assert V(x) == V(-x)

    @pytest.mark.parametrize("V", [double_well_1(), double_well_2(), harmonic(2.0)])
    def test_gradient_matches_finite_difference(self, V):
        x, d = np.linspace(-4, 4, 17), 1e-5
        fd = (V(x + d) - V(x - d)) / (2 * d)
        np.testing.assert_allclose(V.gradient(x), fd, rtol=1e-6, atol=1e-6)

    def test_higher_derivatives(self):
        V = double_well_1()
        x = np.array([0.5, 2.0])
        np.testing.assert_allclose(V.derivative(x, 2), 12 * x**2 - 30)
        np.testing.assert_allclose(V.derivative(x, 4), 24)
        with pytest.raises(ValueError):
            V.derivative(x, 7)

    def test_tabulated_potential_interpolates(self):
        g = Grid1D(-np.pi, np.pi, 32)
        V = tabulated_potential(g, np.cos(2 * g.nodes))
        x = np.array([0.123, 1.7])
        np.testing.assert_allclose(V(x), np.cos(2 * x), atol=1e-12)
        np.testing.assert_allclose(V.gradient(x), -2 * np.sin(2 * x), atol=1e-11)
        np.testing.assert_allclose(V.derivative(x, 4), 16 * np.cos(2 * x), atol=1e-9)

    def test_registry(self):
        assert get_potential("VD2").label == "VD2"
        assert get_potential("harmonic", omega=3.0)(2.0) == pytest.approx(9.0)
        with pytest.raises(ValueError):
            get_potential("nope")
        with pytest.raises(ValueError):
            get_pulse("nope")


class TestPulses:
    def test_e1_values(self):
        assert pulse_e1(0.3) == 0.0
        assert pulse_e1(0.62) == pytest.approx(-1.0, abs=1e-12)
        # sin(3.7 pi) = sin(-0.3 pi)
        assert pulse_e1(0.74) == pytest.approx(-0.8090169943749, abs=1e-12)

    def test_e1_silent_before_first_lobe(self):
        t = np.linspace(0, 0.6, 1001, endpoint=False)
        assert np.all(pulse_e1(t) == 0.0)

    def test_e1_lobe_edges(self):
        # fast lobe starts at 3/5, slow lobe ends at 3/5 + 6/25 = 0.84
        assert pulse_e1(0.6) == pytest.approx(np.sin(15 * np.pi), abs=1e-12)
        assert pulse_e1(0.85) == 0.0 and pulse_e1(1.19) == 0.0
        assert pulse_e1(1.21) == pytest.approx(np.sin(25 * np.pi * 1.21))

    def test_e1_breakpoints(self):
        np.testing.assert_allclose(e1().breakpoints(0.0, 1.3), [0.6, 0.64, 0.84, 1.2, 1.24])
        assert e1().smooth is False and e2().smooth is True

    def test_e1_plotted_is_continuous(self):
        t = np.linspace(0.5, 2.0, 200001)
        values = e1_plotted()(t)
        assert np.max(np.abs(np.diff(values))) < 0.05
        assert values.min() == pytest.approx(-50, abs=1e-3)

    def test_e2_values(self):
        assert pulse_e2(1.0) == pytest.approx(-5.4402111088937, rel=1e-12)
        assert pulse_e2(2.0) == pytest.approx(10 * np.exp(-10) * np.sin(510), rel=1e-12)
        assert abs(pulse_e2(40.0)) < 1e-300 and abs(pulse_e2(-40.0)) < 1e-300

    def test_negated(self):
        p = negated(sine_pulse(2.0, 3.0))
        assert p(0.4) == pytest.approx(-2 * np.sin(1.2))
        r, s = p.moments(0.1, 0.2)
        r0, s0 = sine_pulse(2.0, 3.0).moments(0.1, 0.2)
        assert (r, s) == (-r0, -s0)


def test_laser_potential_derivatives():
    V = laser_potential(double_well_2(), e2())
    x, t = np.linspace(-3, 3, 7), 1.1
    np.testing.assert_allclose(V.value(x, t), x**4 / 5 - 2 * x**2 + pulse_e2(t) * x)
    np.testing.assert_allclose(V.dx(x, t), 4 * x**3 / 5 - 4 * x + pulse_e2(t))
    np.testing.assert_allclose(V.dxx(x, t), 12 * x**2 / 5 - 4)
    np.testing.assert_allclose(V.dxxxx(x, t), 24 / 5)
    # the separable description reproduces the same function
    total = sum(g(np.array(t)) * phi(x, 0) for g, phi in V.separable)
    np.testing.assert_allclose(total, V.value(x, t))


def test_spectral_derivative_of_samples_matches_analytic():
    g = Grid1D(-np.pi, np.pi, 64)
    V = laser_potential(tabulated_potential(g, np.sin(g.nodes) + 0.5 * np.cos(3 * g.nodes)),
                        sine_pulse())
    x, t = g.nodes, 0.3
    # the linear field term is not periodic, so compare the static part only
    c = g.symbol(2).values
    spectral = np.fft.ifft(c * np.fft.fft(V.value(x, t) - sine_pulse()(t) * x)).real
    np.testing.assert_allclose(spectral, V.dxx(x, t), rtol=1e-6, atol=1e-10)
