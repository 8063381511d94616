"""
Finite differences and moduli of smoothness on band-limited surrogates.

Every difference operator is a Fourier multiplier, so moduli are computed in
spectrum: the only approximation is the sup over steps, realized on sampled
step sets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy import special

from . import quadrature
from .spectral import (
    ExponentLike,
    GridFunction,
    LebesgueExponent,
    Spectrum,
    _grid_phase,
    _nyquist_variants,
    analyze,
    apply_symbol,
    lp_norm,
    synthesize,
    translate,
    wavenumbers,
)

log = logging.getLogger(__name__)

STEP_STYLES = ("forward", "symmetric")
STEP_SET_KINDS = ("ball", "axes", "segment", "square", "points")
WEIGHT_KINDS = ("ball", "axes", "kernel")

# batch size bound (elements) for multi-step synthesis
_BATCH_ELEMENTS = 1 << 22


def _is_integer(r: float) -> bool:
    return float(r).is_integer()


def forward_factor(theta: np.ndarray, r: float) -> np.ndarray:
    """(1 - exp(i*theta))^r, principal branch with limit 0 at theta = 0."""
    z = 1.0 - np.exp(1j * np.asarray(theta, dtype=float))
    if _is_integer(r):
        return z ** int(r)
    out = np.zeros_like(z)
    nz = np.abs(z) > 0
    out[nz] = np.exp(r * np.log(z[nz]))
    return out


def symmetric_factor(theta: np.ndarray, r: int) -> np.ndarray:
    """(-2i sin theta)^(2r), the symbol of the symmetric difference of order 2r."""
    return (-2j * np.sin(np.asarray(theta, dtype=float))) ** (2 * int(r))


@dataclass(frozen=True)
class DifferenceSpec:
    order: float
    style: str = "forward"
    step: Tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        if not self.order > 0:
            raise ValueError(f"difference order must be positive, got {self.order!r}")
        if self.style not in STEP_STYLES:
            raise ValueError(f"Unsupported difference style: {self.style}")
        if self.style == "symmetric" and not _is_integer(self.order):
            raise ValueError("fractional order requires style=forward")
        step = tuple(float(s) for s in np.atleast_1d(self.step))
        object.__setattr__(self, "step", step)

    @property
    def applied_order(self) -> float:
        return 2 * self.order if self.style == "symmetric" else self.order

    def symbol(self, K: np.ndarray) -> np.ndarray:
        theta = K @ np.asarray(self.step)
        if self.style == "symmetric":
            return symmetric_factor(theta, int(self.order))
        return forward_factor(theta, self.order)


def difference(f: GridFunction, spec: DifferenceSpec) -> GridFunction:
    if len(spec.step) != f.d:
        raise ValueError(f"step has {len(spec.step)} components, function has d={f.d}")
    return synthesize(apply_symbol(analyze(f), spec.symbol))


@dataclass(frozen=True, eq=False)
class BinomialWeights:
    """Signed weights C(r, nu) * (-1)^nu and the full series sum of |C(r, nu)|."""

    weights: np.ndarray
    abs_sum: float
    truncated: bool


def fractional_binomial_weights(r: float, tol: float = 1e-12, max_terms: int = 1 << 20) -> BinomialWeights:
    if not r > 0:
        raise ValueError(f"r must be positive, got {r!r}")
    if _is_integer(r):
        n = int(r)
        nu = np.arange(n + 1)
        w = special.comb(n, nu) * (-1.0) ** nu
        return BinomialWeights(w, float(np.sum(np.abs(w))), False)

    chunks: List[np.ndarray] = [np.array([1.0])]
    last, start = 1.0, 1
    truncated = True
    while start < max_terms:
        nu = np.arange(start, min(start + 4096, max_terms), dtype=float)
        block = last * np.cumprod((nu - 1.0 - r) / nu)
        small = np.nonzero((np.abs(block) < tol) & (nu > r))[0]
        if small.size:
            chunks.append(block[: small[0]])
            truncated = False
            break
        chunks.append(block)
        last, start = float(block[-1]), int(nu[-1]) + 1
    w = np.concatenate(chunks)
    # past nu > r every term has the same sign and the full series sums to 0
    abs_sum = float(np.sum(np.abs(w)) + abs(np.sum(w)))
    if truncated:
        log.debug("binomial series for r=%g cut at %d terms", r, w.size)
    return BinomialWeights(w, abs_sum, truncated)


def binomial_abs_sum_closed_form(r: float) -> float:
    """sum_nu |C(r, nu)| = sum_{nu <= [r]} C(r, nu) (1 + (-1)^([r] + nu))."""
    fl = int(math.floor(r))
    nu = np.arange(fl + 1)
    return float(np.sum(special.binom(r, nu) * (1.0 + (-1.0) ** (fl + nu))))


def translated_sum(f: GridFunction, spec: DifferenceSpec, tol: float = 1e-12) -> GridFunction:
    """The difference as an explicit weighted sum of translates."""
    step = np.asarray(spec.step)
    if spec.style == "symmetric":
        m = 2 * int(spec.order)
        terms = [(special.comb(m, nu) * (-1.0) ** nu, (2 * nu - m) * step) for nu in range(m + 1)]
    else:
        w = fractional_binomial_weights(spec.order, tol).weights
        terms = [(c, nu * step) for nu, c in enumerate(w)]
    total = np.zeros_like(f.samples)
    for c, shift in terms:
        total = total + c * translate(f, shift).samples
    return GridFunction(total)


def axis_difference(f: GridFunction, r: int, delta: float) -> GridFunction:
    """sum_j Delta^r_{delta e_j} f."""

    def symbol(K: np.ndarray) -> np.ndarray:
        return forward_factor(delta * K, r).sum(axis=-1)

    return synthesize(apply_symbol(analyze(f), symbol))


# ---------------------------------------------------------------------------
# sup over steps


def _scales(M: int) -> np.ndarray:
    # log-uniform sweep of (0, 1] plus a uniform sweep for interior maxima
    logs = np.geomspace(1e-3, 1.0, M - M // 2)
    lins = np.linspace(1.0 / (M // 2 + 1), 1.0, M // 2)
    return np.unique(np.concatenate([logs, lins]))


def _directions(d: int, count: int) -> np.ndarray:
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        theta = np.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    # Fibonacci points on the upper hemisphere; -u gives the same norm
    i = np.arange(count) + 0.5
    z = i / count
    phi = np.pi * (1.0 + 5.0**0.5) * i
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


@dataclass(frozen=True)
class StepSet:
    """Star-shaped step set E inside the unit ball, sampled with density M."""

    kind: str = "segment"
    direction: Optional[Tuple[float, ...]] = None
    points: Tuple[Tuple[float, ...], ...] = ()
    density: int = 128

    def __post_init__(self) -> None:
        if self.kind not in STEP_SET_KINDS:
            raise ValueError(f"Unsupported step set: {self.kind}")
        if self.density < 16:
            raise ValueError(f"step set density must be >= 16, got {self.density}")
        if self.direction is not None and np.linalg.norm(self.direction) > 1.0 + 1e-12:
            raise ValueError("segment direction must lie in the unit ball")
        if self.kind == "points":
            if not self.points:
                raise ValueError("points step set needs at least one point")
            if any(np.linalg.norm(p) > 1.0 + 1e-12 for p in self.points):
                raise ValueError("step points must lie in the unit ball")

    def with_density(self, M: int) -> "StepSet":
        return StepSet(self.kind, self.direction, self.points, M)

    def unit_steps(self, d: int) -> np.ndarray:
        """Sampled u in E, shape (count, d)."""
        M = self.density
        t = _scales(M)[:, None]
        if self.kind == "segment" or (self.kind == "ball" and d == 1):
            e = np.zeros(d)
            if self.direction is None:
                e[0] = 1.0
            else:
                e[:] = self.direction
            return t * e
        if self.kind == "axes":
            return np.concatenate([t * np.eye(d)[j] for j in range(d)])
        if self.kind == "ball":
            n_dir = max(8, int(math.isqrt(M)))
            radii = _scales(max(16, -(-M // n_dir)))
            dirs = _directions(d, n_dir)
            return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
        if self.kind == "square":
            side = 1.0 / math.sqrt(d)
            g = max(4, int(round(M ** (1.0 / d))))
            axis = np.linspace(-side, side, g)
            pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
            return pts[np.any(pts != 0.0, axis=1)]
        pts = np.asarray(self.points, dtype=float).reshape(len(self.points), d)
        return (t[:, None, :] * pts[None, :, :]).reshape(-1, d)


def _batched_norms(
    S: Spectrum,
    steps: np.ndarray,
    factor: Callable[[np.ndarray], np.ndarray],
    p: LebesgueExponent,
) -> np.ndarray:
    """||synthesize(factor(K @ step) * S)||_p for each row of `steps`."""
    N, d = S.N, S.d
    K = wavenumbers(N, d)
    variants = list(_nyquist_variants(K, N))
    base = S.coefficients * _grid_phase(N, d)
    axes = tuple(range(d))
    chunk = max(1, _BATCH_ELEMENTS // N**d)
    out = np.empty(len(steps))
    for start in range(0, len(steps), chunk):
        block = steps[start : start + chunk]
        sym = sum(factor(Km @ block.T) for Km in variants) / len(variants)
        samples = sfft.ifftn(base[..., None] * sym, axes=axes) * float(N) ** d
        mod = np.abs(samples).reshape(-1, len(block))
        if p.is_infinite:
            out[start : start + len(block)] = mod.max(axis=0)
        else:
            out[start : start + len(block)] = np.mean(mod**p.value, axis=0) ** (1.0 / p.value)
    return out


def classical_modulus(
    f: GridFunction,
    r: float,
    E: Optional[StepSet],
    h: float,
    p: ExponentLike,
    *,
    refine: bool = True,
    max_density: int = 2048,
    wrap: bool = False,
) -> float:
    """omega_r(f; E; h)_p = sup_{u in E} ||Delta^r_{hu} f||_p over sampled u.

    wrap=True (d=1, integer r) accepts any h > 0: steps of the circle repeat with
    period 2pi and +-delta give equal norms, so omega_r(f; h) = omega_r(f; min(h, pi)).
    """
    if wrap:
        if f.d != 1 or E is not None or not _is_integer(r):
            raise ValueError("wrap applies to the one-dimensional segment modulus of integer order only")
        if not h > 0:
            raise ValueError(f"step bound must be positive, got h={h}")
        h = min(h, math.pi)
    elif not 0 < h <= math.pi / r * (1 + 1e-12):
        raise ValueError(f"step bound must satisfy 0 < h <= pi/r, got h={h}, r={r}")
    exp = LebesgueExponent.parse(p)
    step_set = E or StepSet()
    S = analyze(f)
    nonconstant = np.array(S.coefficients)
    nonconstant[(0,) * f.d] = 0.0
    if not np.any(nonconstant):
        return 0.0

    def evaluate(es: StepSet) -> float:
        steps = h * es.unit_steps(f.d)
        return float(_batched_norms(S, steps, lambda th: forward_factor(th, r), exp).max())

    value = evaluate(step_set)
    M = step_set.density
    while refine and 2 * M <= max_density:
        M *= 2
        finer = max(value, evaluate(step_set.with_density(M)))
        change = abs(finer - value) / max(finer, 1e-300)
        value = finer
        log.debug("classical_modulus r=%g h=%g density=%d change=%.2e", r, h, M, change)
        if change < 5e-3:
            break
    return value


# ---------------------------------------------------------------------------
# linearized moduli


def _stirling_moments(r: int, count: int) -> np.ndarray:
    # S(r, m) = sum_nu (-1)^nu C(r, nu) nu^m for m = 0..count-1, exact integers
    vals = []
    for m in range(count):
        vals.append(sum((-1) ** nu * math.comb(r, nu) * nu**m for nu in range(r + 1)))
    return np.array([float(v) for v in vals])


def psi_symbol(x: np.ndarray, r: int) -> np.ndarray:
    """psi_r(x) = int_0^1 (1 - exp(itx))^r dt, with psi_r(0) = 0 for r >= 1."""
    x = np.asarray(x, dtype=float)
    r = int(r)
    if r == 0:
        return np.ones_like(x, dtype=complex)
    out = np.empty(x.shape, dtype=complex)
    small = np.abs(x) < 1.0
    if np.any(small):
        count = r + 40
        moments = _stirling_moments(r, count)
        m = np.arange(count)
        coef = moments / special.factorial(m + 1)
        xs = x[small][..., None]
        out[small] = np.sum(coef * (1j * xs) ** m, axis=-1)
    big = ~small
    if np.any(big):
        xb = x[big]
        total = np.ones_like(xb, dtype=complex)
        for nu in range(1, r + 1):
            total += (-1) ** nu * math.comb(r, nu) * (np.exp(1j * nu * xb) - 1.0) / (1j * nu * xb)
        out[big] = total
    return out


def linearized_modulus(
    f: GridFunction, r: int, h: float, p: ExponentLike, *, axis: Optional[int] = None
) -> float:
    """||(1/h) int_0^h Delta^r_delta f d delta||_p via the symbol psi_r(hk)."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    if not _is_integer(r):
        raise ValueError(f"linearized modulus needs an integer order, got {r!r}")
    S = analyze(f)
    axes = range(f.d) if axis is None else [axis]
    best = 0.0
    for j in axes:
        g = synthesize(apply_symbol(S, lambda K, j=j: psi_symbol(h * K[..., j], int(r))))
        best = max(best, lp_norm(g, p))
    return best


# ---------------------------------------------------------------------------
# measure- and kernel-weighted moduli


@dataclass(frozen=True)
class WeightSpec:
    """Measure mu for the weighted modulus.

    kind="kernel" is |u|^-q du on the half annulus 1 <= |u| <= truncation
    (u and -u identified, since symmetric differences are even in u).
    """

    kind: str = "ball"
    exponent: Optional[float] = None
    truncation: float = 64.0

    def __post_init__(self) -> None:
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"Unsupported weight: {self.kind}")
        if self.kind == "kernel":
            if self.exponent is None:
                raise ValueError("kernel weight needs an exponent q")
            if not self.truncation >= 8:
                raise ValueError(f"truncation radius must be >= 8, got {self.truncation}")

    @classmethod
    def kernel_for(cls, alpha: float, d: int, truncation: float = 64.0) -> "WeightSpec":
        return cls("kernel", alpha + d, truncation)


@dataclass(frozen=True)
class WeightedModulus:
    value: float
    tail_bound: float = 0.0
    flagged: bool = False
    reason: str = ""


def _radial_table(moment: Callable[[float], float], N: int, d: int, h: float) -> np.ndarray:
    K = wavenumbers(N, d)
    k2 = np.sum(K * K, axis=-1)
    uniq, inverse = np.unique(k2, return_inverse=True)
    vals = np.array([moment(h * math.sqrt(v)) for v in uniq])
    return vals[inverse].reshape(k2.shape)


@lru_cache(maxsize=128)
def _weight_symbol(kind: str, r: int, q: float, U: float, N: int, d: int, h: float) -> np.ndarray:
    if kind == "ball":
        table = _radial_table(lambda b: quadrature.ball_sine_moment(b, r, d), N, d, h)
    elif kind == "axes":
        ks = np.arange(N // 2 + 1)
        line = np.array([quadrature.ball_sine_moment(h * k, r, 1) for k in ks])
        K = np.abs(wavenumbers(N, d))
        table = line[K].sum(axis=-1)
    else:
        table = _radial_table(lambda a: quadrature.half_annulus_moment(a, r, q, d, U), N, d, h)
    table = (-4.0) ** r * table
    table.setflags(write=False)
    return table


def weighted_modulus(f: GridFunction, r: int, w: WeightSpec, h: float, p: ExponentLike) -> WeightedModulus:
    """||int Delta-dot^{2r}_{hu} f dmu(u)||_p with the truncation tail reported."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    r = int(r)
    q = float(w.exponent) if w.exponent is not None else 0.0
    if w.kind == "kernel" and not q > f.d:
        raise ValueError(f"kernel exponent must exceed d={f.d}, got q={q}")
    S = analyze(f)
    try:
        table = _weight_symbol(w.kind, r, q, float(w.truncation), f.N, f.d, float(h))
    except ArithmeticError as e:
        log.warning("weighted modulus quadrature failed: %s", e)
        return WeightedModulus(float("nan"), float("inf"), True, str(e))
    value = lp_norm(synthesize(S.scaled(table)), p)
    if w.kind != "kernel":
        return WeightedModulus(value)
    mean_free = synthesize(S.scaled(np.where(np.all(S.wavenumbers() == 0, axis=-1), 0.0, 1.0)))
    tail = 4.0**r * quadrature.half_annulus_tail(q, f.d, float(w.truncation)) * lp_norm(mean_free, p)
    if tail > 1e-6 * value and tail > 0:
        log.debug("kernel truncation tail %.3e vs value %.3e", tail, value)
        return WeightedModulus(value, tail, True, "truncation tail above 1e-6 of value")
    return WeightedModulus(value, tail)


@lru_cache(maxsize=128)
def _line_kernel_table(r: int, q: float, N: int, scale: float) -> np.ndarray:
    # (-4)^r int_1^inf sin^(2r)(scale*m*u) u^-q du for m = 0..N
    vals = np.array([quadrature.sine_power_moment(scale * m, 2 * r, q) for m in range(N + 1)])
    table = (-4.0) ** r * vals
    table.setflags(write=False)
    return table


def axis_kernel_modulus(f: GridFunction, r: int, alpha: float, eps: float, p: ExponentLike) -> float:
    """||sum_j int_1^inf u^(-1-alpha) Delta-dot^{2r}_{eps u e_j} f du||_p."""
    table = _line_kernel_table(int(r), 1.0 + alpha, f.N, float(eps))
    K = np.abs(wavenumbers(f.N, f.d))
    return lp_norm(synthesize(analyze(f).scaled(table[K].sum(axis=-1))), p)


def diagonal_kernel_modulus(f: GridFunction, n: int, p: ExponentLike) -> float:
    """||int_1^inf (Delta-dot^2_{t(e1+e2)/n} + Delta-dot^2_{t(e1-e2)/n}) f dt/t^2||_p, d=2."""
    if f.d != 2:
        raise ValueError("diagonal kernel modulus is defined for d=2")
    table = _line_kernel_table(1, 2.0, f.N, 1.0 / n)
    K = wavenumbers(f.N, 2)
    plus = np.abs(K[..., 0] + K[..., 1])
    minus = np.abs(K[..., 0] - K[..., 1])
    return lp_norm(synthesize(analyze(f).scaled(table[plus] + table[minus])), p)


@lru_cache(maxsize=32)
def gamma_zero(r: float) -> Tuple[int, float]:
    """(q, gamma_0) for the fractional linearized modulus, q = ceil(r/2) + 1."""
    q = int(math.ceil(r / 2.0)) + 1
    even = quadrature.sine_power_integral(0.0, math.inf, 2 * q, r + 1.0)
    odd = quadrature.sine_power_integral(0.0, math.inf, 2 * q + 1, r + 1.0)
    return q, 0.5 * math.tan(r * math.pi / 2.0) * even / odd


def gamma_corrected_modulus(f: GridFunction, r: float, h: float, p: ExponentLike) -> float:
    """Fractional-order linearized modulus coupling symmetric differences of orders 2q and 2q+1."""
    if _is_integer(r) or not r > 0:
        raise ValueError(f"gamma-corrected modulus needs a positive non-integer order, got {r!r}")
    if f.d != 1:
        raise ValueError("gamma-corrected modulus is defined for d=1")
    q, g0 = gamma_zero(float(r))
    ks = np.arange(f.N // 2 + 1)
    even = np.array([quadrature.sine_power_moment(h * k, 2 * q, r + 1.0) for k in ks])
    odd = np.array([quadrature.sine_power_moment(h * k, 2 * q + 1, r + 1.0) for k in ks])

    def symbol(K: np.ndarray) -> np.ndarray:
        k = K[..., 0]
        a = np.abs(k)
        return (-4.0) ** q * (even[a] + g0 * (-2j) * np.sign(k) * odd[a])

    return lp_norm(synthesize(apply_symbol(analyze(f), symbol)), p)


# ---------------------------------------------------------------------------
# point-anchored composite differences


def lambda_one(x: float) -> complex:
    """Weight making psi_1 - lambda * psi_2 vanish at x (x != 0)."""
    if x == 0:
        raise ValueError("anchor weight is undefined at 0")
    e = np.exp(1j * x)
    return complex(2.0 * (1j * x + 1.0 - e) / (2j * x + 3.0 - 4.0 * e + e * e))


def _check_anchors(anchors: Sequence[Tuple[float, int]]) -> List[Tuple[float, int]]:
    pts = [(float(x), int(r)) for x, r in anchors]
    if not pts or pts[0][0] != 0.0:
        raise ValueError("first anchor must be x_0 = 0")
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError(f"duplicate anchors: {xs}")
    if pts[0][1] < 0 or any(r < 1 for _, r in pts[1:]):
        raise ValueError("anchor orders must be >= 1 (>= 0 at x_0)")
    return pts


def composite_symbol(anchors: Sequence[Tuple[float, int]], x: np.ndarray) -> np.ndarray:
    pts = _check_anchors(anchors)
    x = np.asarray(x, dtype=float)
    value = psi_symbol(x, pts[0][1])
    if len(pts) > 1:
        p1, p2 = psi_symbol(x, 1), psi_symbol(x, 2)
        for xj, rj in pts[1:]:
            value = value * (p1 - lambda_one(xj) * p2) ** rj
    return value


def composite_difference(f: GridFunction, anchors: Sequence[Tuple[float, int]], h: float) -> GridFunction:
    if f.d != 1:
        raise ValueError("composite differences are defined for d=1")
    _check_anchors(anchors)
    return synthesize(apply_symbol(analyze(f), lambda K: composite_symbol(anchors, h * K[..., 0])))
