"""
Wiener-algebra toolkit on the line.

Transition functions g = (1 - phi)/(1 - psi) with removable points filled in
by extrapolation, FFT estimates of ||f||_A = ||g||_1 for f = g^, the radial
reduction F_0(t) = int_0^1 f_0(ut)(1 - u^2)^((d-3)/2) du and its d=3 inverse,
and the scans behind the step-ratio and kernel transition pairs.

Estimates here never certify membership in A or B; they report refinement
behaviour through flags.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import fft as sfft
from scipy import interpolate, optimize, special

from .errors import SingularityError
from .moduli import psi_symbol
from .quadrature import harmonic_terms, sine_power_integral
from .summation import MultiplierDescriptor

log = logging.getLogger(__name__)

RealFn = Callable[[np.ndarray], np.ndarray]

SINGULAR_DENOMINATOR = 1e-12
SINGULAR_NUMERATOR = 1e-6
RICHARDSON_LEVELS = 8
RADIAL_NODES = 64


@dataclass(frozen=True, eq=False)
class TransitionFunction:
    """g(x) = numerator(x) / denominator(x) on the real line."""

    numerator: RealFn
    denominator: RealFn
    value_at_zero: Optional[complex] = None
    at_infinity: Optional[complex] = None
    label: str = "g"

    @classmethod
    def comparison(cls, phi: MultiplierDescriptor, psi: MultiplierDescriptor) -> "TransitionFunction":
        """(1 - phi)/(1 - psi) for two one-dimensional methods."""
        for m in (phi, psi):
            if m.d != 1:
                raise ValueError(f"transition functions live on the line, got d={m.d} for {m.label}")
        return cls(
            numerator=lambda x: 1.0 - phi(np.asarray(x, dtype=float)[..., None]),
            denominator=lambda x: 1.0 - psi(np.asarray(x, dtype=float)[..., None]),
            label=f"(1-{phi.label})/(1-{psi.label})",
        )

    @classmethod
    def ratio(cls, top: RealFn, bottom: RealFn, *, label: str = "g", **kwargs) -> "TransitionFunction":
        return cls(numerator=top, denominator=bottom, label=label, **kwargs)


def step_ratio_transition(r: int, theta: float) -> TransitionFunction:
    """g_{r,theta} = (1 - e^{i theta x})^r / psi_r(x)."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")

    def top(x: np.ndarray) -> np.ndarray:
        y = theta * np.asarray(x, dtype=float)
        # 1 - e^{iy} = -2i sin(y/2) e^{iy/2}, accurate near 0
        return (-2j * np.sin(0.5 * y) * np.exp(0.5j * y)) ** r

    return TransitionFunction(top, lambda x: psi_symbol(x, r), label=f"step_ratio(r={r},theta={theta:g})")


def _removable_limit(g: TransitionFunction, x0: float) -> complex:
    # Richardson table along x0 + h, h halving
    steps = 1e-2 * 0.5 ** np.arange(RICHARDSON_LEVELS)
    pts = x0 + steps
    T = [[complex(v)] for v in np.asarray(g.numerator(pts)) / np.asarray(g.denominator(pts))]
    for j in range(1, RICHARDSON_LEVELS):
        for k in range(1, j + 1):
            T[j].append(T[j][k - 1] + (T[j][k - 1] - T[j - 1][k - 1]) / (2**k - 1))
    return T[-1][-1]


def transition_eval(g: TransitionFunction, x) -> np.ndarray:
    """Evaluate g with the continuity value at removable points."""
    xs = np.asarray(x, dtype=float)
    num = np.asarray(g.numerator(xs), dtype=complex)
    den = np.asarray(g.denominator(xs), dtype=complex)
    near = np.abs(den) < SINGULAR_DENOMINATOR
    bad = near & (np.abs(num) >= SINGULAR_NUMERATOR)
    if np.any(bad):
        where = float(xs.reshape(-1)[np.flatnonzero(bad)[0]])
        raise SingularityError(f"{g.label} has a nonremovable singularity at x={where:g}")
    out = np.zeros(xs.shape, dtype=complex)
    np.divide(num, den, out=out, where=~near)
    if np.any(near):
        flat = out.reshape(-1)
        flat_x = xs.reshape(-1)
        for idx in np.flatnonzero(near):
            x0 = float(flat_x[idx])
            if x0 == 0.0 and g.value_at_zero is not None:
                flat[idx] = g.value_at_zero
            else:
                flat[idx] = _removable_limit(g, x0)
                log.debug("%s: removable point %g filled with %s", g.label, x0, flat[idx])
    return out


# ---------------------------------------------------------------------------
# A-norm estimates


@dataclass(frozen=True)
class AEstimate:
    value: float
    coarse: float
    converged: bool
    divergent: bool
    window: float


def _a_norm_window(f: RealFn, W: float, points_per_unit: int) -> Tuple[float, np.ndarray, np.ndarray]:
    M = 2 * int(round(W * points_per_unit))
    x = -W + np.arange(M) / points_per_unit
    samples = np.asarray(f(x), dtype=complex)
    # mean |DFT| = sum |g(xi_m)| * dxi for g(xi) = (1/2pi) int f(x) e^{-ix xi} dx
    return float(np.mean(np.abs(sfft.fft(samples)))), x, samples


def a_norm_estimate_1d(f: RealFn, W: float = 64.0, *, points_per_unit: int = 64, offset: float = 0.0) -> AEstimate:
    """FFT quadrature of ||f||_A on [-W, W] and [-2W, 2W].

    offset is a separately known A-norm added to both windows before the
    convergence test.
    """
    if not W > 0:
        raise ValueError(f"window must be positive, got {W}")
    coarse, x, samples = _a_norm_window(f, W, points_per_unit)
    value, _, _ = _a_norm_window(f, 2.0 * W, points_per_unit)
    coarse, value = coarse + offset, value + offset
    ax = np.abs(x)
    weighted = ax * np.abs(samples)
    outer = float(np.max(weighted[(ax >= W / 2) & (ax <= W)], initial=0.0))
    inner = float(np.max(weighted[(ax >= W / 4) & (ax < W / 2)], initial=0.0))
    divergent = outer > 1.5 * inner
    scale = max(value, coarse)
    converged = scale == 0.0 or abs(value - coarse) < 0.01 * scale
    if divergent:
        log.warning("A-norm estimate: |x f(x)| grows on [%g, %g]", W / 2, W)
    elif not converged:
        log.warning("A-norm estimate moved %.3g -> %.3g between W=%g and 2W", coarse, value, W)
    return AEstimate(value, coarse, converged, divergent, W)


@dataclass(frozen=True)
class BEstimate:
    value: float
    limit: complex
    a_part: AEstimate


def b_norm_surrogate(g: TransitionFunction, W: float = 64.0, *, points_per_unit: int = 64) -> BEstimate:
    """||g - g(inf)||_A + |g(inf)|, an upper-bound surrogate for ||g||_B."""
    if g.at_infinity is not None:
        limit = complex(g.at_infinity)
    else:
        far = np.linspace(W, 2.0 * W, 257)
        tail = 0.5 * (transition_eval(g, far) + transition_eval(g, -far))
        limit = complex(np.mean(tail))
    part = a_norm_estimate_1d(lambda x: transition_eval(g, x) - limit, W, points_per_unit=points_per_unit)
    return BEstimate(part.value + abs(limit), limit, part)


def _psi_far_weights(r: int) -> np.ndarray:
    # psi_r(x) = 1 + sum_nu a_nu (e^{i nu x} - 1)/x, nu = 1..r
    nu = np.arange(1, r + 1)
    return np.array([(-1) ** v * math.comb(r, v) for v in range(1, r + 1)]) / (1j * nu)


def step_ratio_tail_terms(r: int, theta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Frequencies lam and weights (c1, c2) of the first two 1/x orders of the B-bound integrand.

    With psi_r = 1 + A(x)/x and phi = (1 - e^{i theta x})^r,
    phi (1 - psi_r)/psi_r = -phi A/x + phi A^2/x^2 + O(x^-3), and
    phi A = sum c1 e^{i lam x}, phi A^2 = sum c2 e^{i lam x}.
    """
    a = _psi_far_weights(r)
    a_full = np.concatenate([[-a.sum()], a])
    b = np.array([(-1) ** m * math.comb(r, m) for m in range(r + 1)], dtype=float)
    first = np.concatenate([a_full, np.zeros(r, dtype=complex)])
    second = np.convolve(a_full, a_full)
    lam = theta * np.arange(r + 1)[:, None] + np.arange(2 * r + 1)[None, :]
    return lam.ravel(), -np.outer(b, first).ravel(), np.outer(b, second).ravel()


def _smoothed_powers(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # u = (1 - e^{-x^2})/x and v = (1 - e^{-x^2})/x^2, continuous through 0
    x = np.asarray(x, dtype=float)
    s = -np.expm1(-x * x)
    u = np.zeros(x.shape)
    v = np.ones(x.shape)
    nz = x != 0
    u[nz] = s[nz] / x[nz]
    v[nz] = s[nz] / (x[nz] * x[nz])
    return u, v


def _smoothed_powers_hat(xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # (1/2pi) int f(x) e^{-ix xi} dx for u and v above
    a = 0.5 * np.abs(xi)
    u_hat = -0.5j * np.sign(xi) * special.erfc(a)
    v_hat = np.exp(-a * a) / math.sqrt(math.pi) - a * special.erfc(a)
    return u_hat, v_hat


def tail_a_norm(lam: np.ndarray, c1: np.ndarray, c2: np.ndarray, *, piece: float = 0.25, nodes: int = 16) -> float:
    """||sum (c1 u + c2 v) e^{i lam x}||_A by composite Gauss quadrature in frequency."""
    breaks = np.unique(np.concatenate([lam, [lam.min() - 20.0, lam.max() + 20.0]]))
    s, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        edges = np.linspace(lo, hi, max(1, int(math.ceil((hi - lo) / piece))) + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        xi = (mid + half * s).ravel()
        u_hat, v_hat = _smoothed_powers_hat(xi[:, None] - lam[None, :])
        density = np.abs(u_hat @ c1 + v_hat @ c2)
        total += float(np.sum(density * (half * w).ravel()))
    return total


def step_ratio_b_bound(r: int, theta: float, W: float = 64.0) -> BEstimate:
    """||phi (1 - psi_r)/psi_r||_A + 2^r with phi = (1 - e^{i theta x})^r.

    The 1/x and 1/x^2 orders are normed exactly in frequency and only the
    O(x^-3) remainder goes through the windowed FFT estimate.
    """
    g = step_ratio_transition(r, theta)
    lam, c1, c2 = step_ratio_tail_terms(r, theta)
    nu = np.arange(1, r + 1)
    a = _psi_far_weights(r)

    def remainder(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phi = g.numerator(x)
        A = (np.exp(1j * x[..., None] * nu) - 1.0) @ a
        u, v = _smoothed_powers(x)
        return transition_eval(g, x) * (1.0 - psi_symbol(x, r)) + phi * A * u - phi * A * A * v

    exact = tail_a_norm(lam, c1, c2)
    part = a_norm_estimate_1d(remainder, W, offset=exact)
    return BEstimate(part.value + 2.0**r, complex(0.0), part)


# ---------------------------------------------------------------------------
# radial reduction


@dataclass(frozen=True, eq=False)
class RadialProfile:
    t: np.ndarray
    values: np.ndarray
    d: int

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 4:
            raise ValueError("profile needs matching 1-D samples (at least 4)")
        if t[0] < 0 or not np.all(np.diff(t) > 0):
            raise ValueError("profile abscissae must start at t >= 0 and increase")
        if not t[-1] > 0:
            raise ValueError("profile extent T must be positive")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile samples must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def extent(self) -> float:
        return float(self.t[-1])

    @classmethod
    def sample(cls, fn: RealFn, T: float, count: int, d: int) -> "RadialProfile":
        t = np.linspace(0.0, T, count)
        return cls(t, np.asarray(fn(t), dtype=float), d)


def power_profile_constant(gamma: float, d: int) -> float:
    """int_0^1 u^gamma (1 - u^2)^((d-3)/2) du."""
    if gamma <= -1:
        raise ValueError(f"gamma must exceed -1, got {gamma}")
    if d < 2:
        raise ValueError(f"the power constant needs d >= 2, got {d}")
    return 0.5 * float(special.beta((gamma + 1.0) / 2.0, (d - 1.0) / 2.0))


def radial_transform(profile: RadialProfile, d: int, direction: str = "reduce") -> RadialProfile:
    if direction not in ("reduce", "invert"):
        raise ValueError(f"direction must be 'reduce' or 'invert', got {direction!r}")
    if d == 1:
        return RadialProfile(profile.t, profile.values, d)
    if direction == "invert":
        if d != 3:
            raise ValueError(f"inversion is implemented for d=3 only, got d={d}")
        t = profile.t
        return RadialProfile(t, np.gradient(t * profile.values, t, edge_order=2), d)
    a = (d - 3) / 2.0
    s, w = special.roots_jacobi(RADIAL_NODES, a, 0.0)
    u = 0.5 * (1.0 + s)
    # (1 - u^2)^a = ((1 - s)/2)^a ((3 + s)/2)^a, du = ds/2
    weights = w * 0.5 ** (a + 1.0) * (0.5 * (3.0 + s)) ** a
    spline = interpolate.CubicSpline(profile.t, profile.values)
    values = np.array([np.dot(weights, spline(u * t)) for t in profile.t])
    return RadialProfile(profile.t, values, d)


# ---------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class ScanResult:
    minimum: float
    location: float
    # min |psi_r(x)| / min(1, x)^r, free of the order-r zero at the origin
    scaled_minimum: float = math.nan
    scaled_location: float = math.nan


def _grid_minimum(fn: RealFn, x: np.ndarray) -> Tuple[float, float]:
    values = fn(x)
    i = int(np.argmin(values))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
    res = optimize.minimize_scalar(lambda v: float(fn(np.array([v]))[0]), bounds=(lo, hi), method="bounded")
    if res.success and res.fun < values[i]:
        return float(res.fun), float(res.x)
    return float(values[i]), float(x[i])


def psi_r_scan(r: int, X: float = 100.0, points: int = 20000) -> ScanResult:
    """min |psi_r| over (0, X], raw and with the x^r factor at 0 divided out."""
    if not 1 <= r <= 8:
        raise ValueError(f"r must be in 1..8, got {r}")
    if not 0 < X <= 1000:
        raise ValueError(f"X must be in (0, 1000], got {X}")
    x = np.linspace(X / points, X, points)
    minimum, location = _grid_minimum(lambda v: np.abs(psi_symbol(v, r)), x)
    scaled, where = _grid_minimum(lambda v: np.abs(psi_symbol(v, r)) / np.minimum(1.0, v) ** r, x)
    return ScanResult(minimum, location, scaled, where)


def kernel_symbol_1d(x: float, r: int, alpha: float) -> float:
    """int_{|u|>=1} sin^(2r)(xu) |u|^(-1-alpha) du."""
    x = abs(float(x))
    if x == 0.0:
        return 0.0
    return 2.0 * x**alpha * sine_power_integral(x, math.inf, 2 * r, alpha + 1.0)


def kernel_symbol_at_infinity(r: int, alpha: float) -> float:
    mean, _ = harmonic_terms(2 * r)
    return 2.0 * mean / alpha


def averaged_kernel_symbol(x0: float, r: int, alpha: float, *, nodes: int = 32) -> float:
    """Mean of the kernel symbol over one period [x0, x0 + pi]."""
    s, w = np.polynomial.legendre.leggauss(nodes)
    xs = x0 + 0.5 * math.pi * (1.0 + s)
    return 0.5 * float(sum(wi * kernel_symbol_1d(xi, r, alpha) for xi, wi in zip(xs, w)))


def near_zero_constant(r: int, alpha: float) -> float:
    """lim psi(x)/|x|^alpha as x -> 0, for alpha < 2r."""
    if not 0 < alpha < 2 * r:
        raise ValueError(f"need 0 < alpha < 2r, got alpha={alpha}, r={r}")
    return 2.0 * sine_power_integral(0.0, math.inf, 2 * r, alpha + 1.0)
