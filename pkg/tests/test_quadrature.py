import logging
import math

import numpy as np
import pytest
from scipy import integrate

from smoothlab.quadrature import (
    ball_sine_moment,
    ball_volume,
    checked_quad,
    half_annulus_moment,
    half_annulus_tail,
    harmonic_terms,
    sine_power_integral,
    sine_power_moment,
    sphere_area,
)


def test_unit_sphere_and_ball():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(0) == pytest.approx(1.0)
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("m", range(1, 7))
def test_harmonic_expansion(m):
    mean, terms = harmonic_terms(m)
    y = np.linspace(-3.0, 3.0, 41)
    trig = np.cos if m % 2 == 0 else np.sin
    expanded = mean + sum(c * trig(w * y) for c, w in terms)
    np.testing.assert_allclose(expanded, np.sin(y) ** m, atol=1e-13)
    with pytest.raises(ValueError):
        harmonic_terms(0)


def test_dirichlet_integrals():
    assert sine_power_integral(0.0, math.inf, 1, 1.0) == pytest.approx(math.pi / 2, rel=1e-6)
    assert sine_power_integral(0.0, math.inf, 2, 2.0) == pytest.approx(math.pi / 2, rel=1e-6)


def test_finite_range_matches_direct_quadrature():
    expected, _ = integrate.quad(lambda s: np.sin(s) ** 3 * s**-1.5, 1.0, 40.0, limit=2000)
    assert sine_power_integral(1.0, 40.0, 3, 1.5) == pytest.approx(expected, rel=1e-8)
    assert sine_power_integral(2.0, 2.0, 3, 1.5) == 0.0
    with pytest.raises(ValueError):
        sine_power_integral(2.0, 1.0, 2, 2.0)


def test_moment_substitution():
    x = 0.7
    expected = sine_power_integral(x, 3 * x, 2, 2.5) * x**1.5
    assert sine_power_moment(x, 2, 2.5, 1.0, 3.0) == pytest.approx(expected)
    assert sine_power_moment(0.0, 2, 2.5) == 0.0


@pytest.mark.parametrize("b", [0.3, 2.0])
def test_ball_sine_moment_on_the_line(b):
    # int_{-1}^{1} sin^2(b u) du = 1 - sin(2b) / (2b)
    assert ball_sine_moment(b, 1, 1) == pytest.approx(1.0 - math.sin(2 * b) / (2 * b), rel=1e-10)
    assert ball_sine_moment(0.0, 1, 3) == 0.0


def test_half_annulus():
    assert half_annulus_tail(3.0, 1, 2.0) == pytest.approx(0.125)
    assert half_annulus_tail(3.0, 1, math.inf) == 0.0
    assert half_annulus_moment(0.5, 1, 3.0, 1, math.inf) == pytest.approx(sine_power_moment(0.5, 2, 3.0))
    with pytest.raises(ValueError):
        half_annulus_moment(0.5, 1, 3.0, 2, math.inf)
    with pytest.raises(ValueError):
        half_annulus_moment(0.5, 1, 3.0, 4, 8.0)


def test_checked_quad_is_quiet_on_smooth_integrands(caplog):
    with caplog.at_level(logging.WARNING, logger="smoothlab.quadrature"):
        value, err = checked_quad(np.cos, 0.0, 1.0)
        sine_power_integral(0.0, math.inf, 2, 2.0)
    assert value == pytest.approx(math.sin(1.0))
    assert err < 1e-12
    assert not caplog.records


def test_checked_quad_reports_subdivision_trouble(caplog):
    with caplog.at_level(logging.WARNING, logger="smoothlab.quadrature"):
        checked_quad(lambda s: math.sin(1.0 / s), 1e-4, 1.0, limit=3)
    assert any(r.levelno == logging.WARNING and "quad on" in r.getMessage() for r in caplog.records)
