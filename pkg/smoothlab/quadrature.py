"""
Integrals of powers of sine against power weights.

sin^m is expanded into harmonics so that long and infinite ranges go through
QUADPACK's Fourier-weight routines (scipy.integrate.quad with weight='cos' or
'sin'); short ranges near the origin use plain adaptive quadrature where the
expansion would cancel.
"""

from __future__ import annotations

import logging
import math
import warnings
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
from scipy import integrate, special

log = logging.getLogger(__name__)

# below this abscissa the expansion cancels badly; integrate directly
DIRECT_LIMIT = 16.0
QUAD_LIMIT = 400

# error estimates above this share of max(1, |value|) are logged
QUAD_TOL = 1e-6


def checked_quad(fn: Callable[[float], float], a: float, b: float, **kwargs) -> Tuple[float, float]:
    """integrate.quad with IntegrationWarning and large error estimates logged at WARNING."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, err = integrate.quad(fn, a, b, **kwargs)
    for w in caught:
        if issubclass(w.category, integrate.IntegrationWarning):
            log.warning("quad on [%g, %g]: %s", a, b, str(w.message).strip().splitlines()[0])
        else:
            warnings.warn(w.message, w.category, stacklevel=2)
    if err > QUAD_TOL * max(1.0, abs(value)):
        log.warning("quad on [%g, %g]: error estimate %.2e for value %.6g", a, b, err, value)
    return value, err


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^(d-1); 2 for d=1."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@lru_cache(maxsize=None)
def harmonic_terms(m: int) -> Tuple[float, List[Tuple[float, int]]]:
    """sin^m(y) = mean + sum c_j * trig(w_j * y).

    Even m uses cosines, odd m uses sines.
    """
    if m < 1:
        raise ValueError(f"power must be >= 1, got {m}")
    if m % 2 == 0:
        r = m // 2
        scale = 4.0**-r
        mean = scale * special.comb(2 * r, r, exact=True)
        terms = [(2.0 * scale * (-1) ** j * special.comb(2 * r, r - j, exact=True), 2 * j) for j in range(1, r + 1)]
        return mean, terms
    q = (m - 1) // 2
    scale = 4.0**-q
    terms = [(scale * (-1) ** j * special.comb(2 * q + 1, q - j, exact=True), 2 * j + 1) for j in range(q + 1)]
    return 0.0, terms


def _power_integral(a: float, b: float, q: float) -> float:
    if math.isinf(b):
        if q <= 1.0:
            raise ValueError(f"int_a^inf s^-q ds diverges for q={q}")
        return a ** (1.0 - q) / (q - 1.0)
    if q == 1.0:
        return math.log(b / a)
    return (a ** (1.0 - q) - b ** (1.0 - q)) / (q - 1.0)


def _weighted(a: float, b: float, q: float, omega: float, weight: str) -> float:
    value, err = checked_quad(lambda s: s ** (-q), a, b, weight=weight, wvar=omega, limit=QUAD_LIMIT)
    if not math.isfinite(value):
        raise ArithmeticError(f"oscillatory quadrature failed on [{a}, {b}] at w={omega}")
    return value


def sine_power_integral(a: float, b: float, m: int, q: float) -> float:
    """int_a^b sin^m(s) s^-q ds for 0 <= a < b <= inf."""
    if not 0.0 <= a <= b:
        raise ValueError(f"need 0 <= a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    total = 0.0
    near_end = min(b, DIRECT_LIMIT)
    if a < near_end:
        value, _ = checked_quad(lambda s: np.sin(s) ** m * s ** (-q), a, near_end, limit=QUAD_LIMIT)
        total += value
    start = max(a, DIRECT_LIMIT)
    if start < b:
        mean, terms = harmonic_terms(m)
        weight = "cos" if m % 2 == 0 else "sin"
        if mean:
            total += mean * _power_integral(start, b, q)
        for coef, omega in terms:
            total += coef * _weighted(start, b, q, float(omega), weight)
    return total


def sine_power_moment(x: float, m: int, q: float, lower: float = 1.0, upper: float = math.inf) -> float:
    """int_lower^upper sin^m(x*u) u^-q du (x >= 0) by the substitution s = x*u."""
    x = abs(float(x))
    if x == 0.0:
        return 0.0
    return x ** (q - 1.0) * sine_power_integral(x * lower, x * upper, m, q)


def ball_sine_moment(b: float, r: int, d: int) -> float:
    """int_{|u|<=1} sin^(2r)(b*u_1) du over the unit ball of R^d."""
    b = abs(float(b))
    if b == 0.0:
        return 0.0
    if b < 0.5:
        # no cancellation: Gauss-Jacobi on the slice weight (1 - s^2)^((d-1)/2)
        a = (d - 1) / 2.0
        nodes, weights = special.roots_jacobi(48, a, a)
        return ball_volume(d - 1) * float(np.sum(weights * np.sin(b * nodes) ** (2 * r)))
    mean, terms = harmonic_terms(2 * r)
    total = mean * ball_volume(d)
    for coef, omega in terms:
        xi = omega * b
        total += coef * (2.0 * math.pi) ** (d / 2.0) * xi ** (-d / 2.0) * special.jv(d / 2.0, xi)
    return float(total)


def _sin_power_primitive(s: float, r: int) -> float:
    # int_0^s sin^(2r)(v) dv
    mean, terms = harmonic_terms(2 * r)
    return mean * s + sum(coef * math.sin(omega * s) / omega for coef, omega in terms)


def half_annulus_moment(a: float, r: int, q: float, d: int, upper: float) -> float:
    """int over {1 <= |u| <= upper, u ~ -u} of sin^(2r)(a*u_1) |u|^-q du."""
    a = abs(float(a))
    if a == 0.0:
        return 0.0
    if d == 1:
        return sine_power_moment(a, 2 * r, q, 1.0, upper)
    if d == 3:
        # angular integral reduces to 2*int_0^1 sin^(2r)(s t) dt = 2 P(s)/s
        lo, hi = a, a * upper
        total = 0.0
        near_end = min(hi, DIRECT_LIMIT)
        if lo < near_end:
            value, _ = checked_quad(lambda s: s ** (1.0 - q) * _sin_power_primitive(s, r), lo, near_end, limit=QUAD_LIMIT)
            total += value
        start = max(lo, DIRECT_LIMIT)
        if start < hi:
            mean, terms = harmonic_terms(2 * r)
            total += mean * _power_integral(start, hi, q - 2.0)
            for coef, omega in terms:
                total += coef / omega * _weighted(start, hi, q - 1.0, float(omega), "sin")
        return float(2.0 * math.pi * a ** (q - 3.0) * total)
    if d == 2:
        if math.isinf(upper):
            raise ValueError("d=2 kernel weights need a finite truncation radius")
        mean, terms = harmonic_terms(2 * r)

        def angular(s: float) -> float:
            return 2.0 * math.pi * (mean + sum(coef * special.j0(omega * s) for coef, omega in terms))

        value, _ = checked_quad(lambda s: s ** (1.0 - q) * angular(s), a, a * upper, limit=4 * QUAD_LIMIT)
        return float(0.5 * a ** (q - 2.0) * value)
    raise ValueError(f"unsupported dimension {d}")


def half_annulus_tail(q: float, d: int, upper: float) -> float:
    """Measure of {|u| > upper} under |u|^-q du on the half space."""
    if math.isinf(upper):
        return 0.0
    return 0.5 * sphere_area(d) * upper ** (d - q) / (q - d)
