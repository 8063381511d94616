"""
Moduli of smoothness for bounded maps f: E_1 -> E_2 between finite-dimensional
normed spaces.

The sup over (x, delta) is taken over a scrambled Sobol cloud. Checks that
follow from pointwise identities (scaling, chain, Marchaud, product rule) are
evaluated on the shifted points those identities use, so they hold exactly on
the sampled sup and not only in the limit.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from .kfunctional import guarded_ratio
from .moduli import classical_modulus, fractional_binomial_weights
from .spectral import GridFunction, analyze, apply_symbol, synthesize

log = logging.getLogger(__name__)

NormFn = Callable[[np.ndarray], np.ndarray]
MulFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_SAMPLES = 1 << 14
MAX_SAMPLES = 1 << 17
TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class NormedSpaceHandle:
    """R^dim with a norm acting on rows, optionally a normed algebra."""

    dim: int
    norm: NormFn
    radius: float = 1.0
    multiply: Optional[MulFn] = None
    label: str = "E"

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def norms(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(self.norm(np.asarray(a, dtype=float).reshape(-1, self.dim)), dtype=float)

    @staticmethod
    def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b

    @staticmethod
    def scale(c: float, a: np.ndarray) -> np.ndarray:
        return c * a


def euclidean(dim: int, ord: float = 2, *, radius: float = 1.0) -> NormedSpaceHandle:
    return NormedSpaceHandle(dim, lambda a: np.linalg.norm(a, ord=ord, axis=-1), radius, label=f"l{ord:g}^{dim}")


def scalar_line(*, radius: float = 1.0) -> NormedSpaceHandle:
    return NormedSpaceHandle(1, lambda a: np.abs(a[:, 0]), radius, multiply=lambda a, b: a * b, label="R")


def matrix_algebra(n: int, *, radius: float = 1.0) -> NormedSpaceHandle:
    """n x n real matrices under the operator 2-norm, rows hold flattened matrices."""

    def norm(a: np.ndarray) -> np.ndarray:
        return np.linalg.norm(a.reshape(-1, n, n), ord=2, axis=(1, 2))

    def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.matmul(a.reshape(-1, n, n), b.reshape(-1, n, n)).reshape(-1, n * n)

    return NormedSpaceHandle(n * n, norm, radius, multiply=multiply, label=f"M{n}")


@dataclass(frozen=True)
class NormCheck:
    ok: bool
    definiteness: float
    homogeneity: float
    triangle: float


def check_norm_axioms(space: NormedSpaceHandle, samples: int = 200, *, seed: int = 0, tol: float = 1e-10) -> NormCheck:
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, samples, space.dim))
    c = rng.standard_normal(samples)
    na, nb = space.norms(a), space.norms(b)
    zero = float(space.norms(np.zeros((1, space.dim)))[0])
    definite = max(zero, float(np.max(np.where(na <= 0, 1.0, 0.0))))
    homog = float(np.max(np.abs(space.norms(c[:, None] * a) - np.abs(c) * na) / (1.0 + np.abs(c) * na)))
    tri = float(np.max(space.norms(a + b) - na - nb))
    return NormCheck(definite <= tol and homog <= tol and tri <= tol, definite, homog, tri)


@dataclass(frozen=True, eq=False)
class AbstractFunction:
    """Vectorized map from rows of E_1 to rows of E_2."""

    fn: Callable[[np.ndarray], np.ndarray]
    source: NormedSpaceHandle
    target: NormedSpaceHandle
    label: str = "f"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1, self.source.dim)
        return np.asarray(self.fn(x), dtype=float).reshape(len(x), self.target.dim)

    def sup_norm(self, points: np.ndarray) -> float:
        """Boundedness witness: max |f(x)|_2 over the given points."""
        return float(np.max(self.target.norms(self(points)), initial=0.0))

    def __mul__(self, other: "AbstractFunction") -> "AbstractFunction":
        mul = self.target.multiply
        if mul is None:
            raise ValueError(f"{self.target.label} has no multiplication")
        return AbstractFunction(lambda x: mul(self(x), other(x)), self.source, self.target, f"{self.label}*{other.label}")


def constant_map(value: Sequence[float], source: NormedSpaceHandle, target: NormedSpaceHandle) -> AbstractFunction:
    v = np.asarray(value, dtype=float).reshape(1, target.dim)
    return AbstractFunction(lambda x: np.repeat(v, len(x), axis=0), source, target, "const")


def linear_map(A: np.ndarray, source: NormedSpaceHandle, target: NormedSpaceHandle, b: Optional[Sequence[float]] = None) -> AbstractFunction:
    """x -> A x + b."""
    A = np.asarray(A, dtype=float).reshape(target.dim, source.dim)
    shift = np.zeros(target.dim) if b is None else np.asarray(b, dtype=float)
    return AbstractFunction(lambda x: x @ A.T + shift, source, target, "affine")


# ---------------------------------------------------------------------------
# differences and the sampled sup


def _difference_weights(r: float) -> np.ndarray:
    if r == 0:
        return np.ones(1)
    return fractional_binomial_weights(r).weights


def abstract_difference(f: AbstractFunction, x: np.ndarray, delta: np.ndarray, r: float) -> np.ndarray:
    """sum_nu (-1)^nu C(r, nu) f(x + nu delta), rows in E_2."""
    x = np.asarray(x, dtype=float).reshape(-1, f.source.dim)
    delta = np.broadcast_to(np.asarray(delta, dtype=float).reshape(-1, f.source.dim), x.shape)
    total = np.zeros((len(x), f.target.dim))
    for nu, w in enumerate(_difference_weights(r)):
        if w:
            total += w * f(x + nu * delta)
    return total


@dataclass(frozen=True, eq=False)
class SampleCloud:
    """Base points x, unit steps u (|u|_1 <= 1) and signed scalars in [-1, 1]."""

    points: np.ndarray
    steps: np.ndarray
    scalars: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def sobol(cls, space: NormedSpaceHandle, count: int = DEFAULT_SAMPLES, *, seed: int = 0) -> "SampleCloud":
        m = int(count).bit_length() - 1
        if count < 2 or 1 << m != count:
            raise ValueError(f"sample count must be a power of two, got {count}")
        dim = space.dim
        U = qmc.Sobol(d=2 * dim + 1, scramble=True, seed=seed).random_base2(m)
        points = space.radius * (2.0 * U[:, :dim] - 1.0)
        v = 2.0 * U[:, dim : 2 * dim] - 1.0
        size = space.norms(v)
        size = np.where(size > 0, size, 1.0)
        # a third of the steps sit on the unit sphere
        rho = np.minimum(1.0, 1.5 * U[:, -1])
        steps = v / size[:, None] * rho[:, None]
        scalars = rho * np.where(v[:, 0] < 0, -1.0, 1.0)
        return cls(points, steps, scalars)


def modulus_on_cloud(
    f: AbstractFunction,
    r: float,
    cloud: SampleCloud,
    h: float,
    *,
    shifts: Sequence[int] = (0,),
    step_scales: Sequence[float] = (1.0,),
) -> float:
    """max |Delta^r_delta f(x + s delta)|_2 over cloud pairs, delta = c h u."""
    best = 0.0
    for c in step_scales:
        delta = c * h * cloud.steps
        for s in shifts:
            diff = abstract_difference(f, cloud.points + s * delta, delta, r)
            best = max(best, float(np.max(f.target.norms(diff), initial=0.0)))
    return best


def abstract_modulus(
    f: AbstractFunction,
    r: float,
    h: float,
    cloud: Optional[SampleCloud] = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    max_samples: int = MAX_SAMPLES,
) -> float:
    """omega_r(f; h) as the sampled sup; without a cloud, double until < 1% change."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    if cloud is not None:
        return modulus_on_cloud(f, r, cloud, h)
    count = samples
    value = modulus_on_cloud(f, r, SampleCloud.sobol(f.source, count, seed=seed), h)
    while 2 * count <= max_samples:
        count *= 2
        finer = modulus_on_cloud(f, r, SampleCloud.sobol(f.source, count, seed=seed), h)
        change = abs(finer - value) / max(finer, 1e-300)
        value = max(value, finer)
        log.debug("abstract_modulus r=%g h=%g samples=%d change=%.2e", r, h, count, change)
        if change < 1e-2:
            break
    return value


# ---------------------------------------------------------------------------
# identities and inequalities


def identity_star_check(f: AbstractFunction, r: int, n: int, delta: np.ndarray, x: np.ndarray) -> float:
    """|Delta^r_{n delta} f(x) - sum_{nu in [0,n)^r} Delta^r_delta f(x + |nu| delta)|_2."""
    if r < 1 or n < 1:
        raise ValueError(f"need r, n >= 1, got r={r}, n={n}")
    x = np.asarray(x, dtype=float).reshape(1, f.source.dim)
    delta = np.asarray(delta, dtype=float).reshape(1, f.source.dim)
    lhs = abstract_difference(f, x, n * delta, r)
    rhs = np.zeros_like(lhs)
    for nus in itertools.product(range(n), repeat=r):
        rhs += abstract_difference(f, x + sum(nus) * delta, delta, r)
    return float(f.target.norms(lhs - rhs)[0])


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + TOLERANCE * (1.0 + abs(self.rhs))

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def scaling_check(f: AbstractFunction, r: int, h: float, n: int, cloud: SampleCloud) -> InequalityCheck:
    """omega_r(f; n h) <= n^r omega_r(f; h)."""
    lhs = modulus_on_cloud(f, r, cloud, n * h)
    shifted = modulus_on_cloud(f, r, cloud, h, shifts=range(r * (n - 1) + 1))
    return InequalityCheck(lhs, n**r * shifted)


def _lambda_split(f: AbstractFunction, r: int, h: float, lam: float, cloud: SampleCloud) -> Tuple[float, float, int]:
    n = int(math.floor(lam)) + 1
    lhs = modulus_on_cloud(f, r, cloud, h, step_scales=(lam,))
    shifted = modulus_on_cloud(f, r, cloud, h, shifts=range(r * (n - 1) + 1), step_scales=(lam / n,))
    return lhs, shifted, n


def lambda_scaling_check(f: AbstractFunction, r: int, h: float, lam: float, cloud: SampleCloud) -> InequalityCheck:
    """omega_r(f; lam h) <= (lam + 1)^r omega_r(f; h)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    lhs, shifted, _ = _lambda_split(f, r, h, lam, cloud)
    return InequalityCheck(lhs, (lam + 1.0) ** r * shifted)


def ratio_comparison_check(f: AbstractFunction, r: int, u: float, v: float, cloud: SampleCloud) -> InequalityCheck:
    """omega_r(f; v)/v^r <= 2^r omega_r(f; u)/u^r for u <= v."""
    if not 0 < u <= v:
        raise ValueError(f"need 0 < u <= v, got u={u}, v={v}")
    lhs, shifted, _ = _lambda_split(f, r, u, v / u, cloud)
    return InequalityCheck(lhs / v**r, 2.0**r * shifted / u**r)


def chain_check(f: AbstractFunction, r: int, h: float, cloud: SampleCloud) -> List[float]:
    """[omega_r, 2 omega_{r-1}, ..., 2^r omega_0], nondecreasing on the cloud."""
    return [2.0**j * modulus_on_cloud(f, r - j, cloud, h, shifts=range(j + 1)) for j in range(r + 1)]


def marchaud_rhs(f: AbstractFunction, r: int, h: float, k: int, cloud: SampleCloud) -> InequalityCheck:
    """omega_r(f; h) against (r/2) sum_nu 2^(-nu r) omega_{r+1}(f; 2^nu h) + 2^(-(k+1) r) omega_r(f; 2^(k+1) h)."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    lhs = modulus_on_cloud(f, r, cloud, h)
    total = 0.0
    for nu in range(k + 1):
        total += 0.5 * r * 2.0 ** (-nu * r) * modulus_on_cloud(f, r + 1, cloud, 2.0**nu * h, shifts=range(r))
    total += 2.0 ** (-(k + 1) * r) * modulus_on_cloud(f, r, cloud, 2.0 ** (k + 1) * h)
    return InequalityCheck(lhs, total)


def power_law_deviation(f: AbstractFunction, r: int, hs: Sequence[float], cloud: SampleCloud) -> float:
    """max |omega_r(f; h) / (omega_r(f; 1) h^r) - 1|; zero when omega_{r+1} vanishes."""
    unit = modulus_on_cloud(f, r, cloud, 1.0)
    if unit == 0.0:
        return 0.0
    return max(abs(modulus_on_cloud(f, r, cloud, h) / (unit * h**r) - 1.0) for h in hs)


@dataclass(frozen=True)
class InterpolationConstants:
    a: float
    b: float
    c: float
    excluded: int


def interpolation_constants(
    f: AbstractFunction, r: int, m: int, hs: Sequence[float], cloud: SampleCloud
) -> InterpolationConstants:
    """Largest observed ratios for the three interpolation inequalities, |h| <= 1."""
    w = lambda order, h: modulus_on_cloud(f, order, cloud, h)  # noqa: E731
    wr1, wm1, wrm1 = w(r, 1.0), w(m, 1.0), w(r + m, 1.0)
    worst = [0.0, 0.0, 0.0]
    excluded = 0
    for h in hs:
        if not 0 < h <= 1:
            raise ValueError(f"steps must lie in (0, 1], got {h}")
        pairs = (
            (wrm1**r * w(r, h) ** (r + m), wr1 ** (r + m) * w(r + m, h) ** r),
            (wrm1 * w(r, h ** (r + m)), wr1 * w(r + m, h**r)),
            (wrm1 * w(r, h) * w(m, h), wr1 * wm1 * w(r + m, h)),
        )
        for i, (num, den) in enumerate(pairs):
            ratio = guarded_ratio(num, den)
            if ratio is None:
                excluded += 1
            else:
                worst[i] = max(worst[i], ratio)
    return InterpolationConstants(worst[0], worst[1], worst[2], excluded)


@dataclass(frozen=True)
class ProductCheck:
    lhs: float
    rhs: float
    holds: bool
    constant: float
    degenerate: bool


def product_modulus_check(f: AbstractFunction, g: AbstractFunction, r: int, h: float, cloud: SampleCloud) -> ProductCheck:
    """omega_r(fg; h) against the product-rule bound; r >= 2 reports the measured c(r)."""
    if f.target.multiply is None:
        raise ValueError(f"{f.target.label} has no multiplication")
    fg = f * g
    lhs = modulus_on_cloud(fg, r, cloud, h)
    support = np.concatenate([cloud.points + j * h * cloud.steps for j in range(r + 1)])
    f_sup, g_sup = f.sup_norm(support), g.sup_norm(support)
    wf, wg = modulus_on_cloud(f, r, cloud, h), modulus_on_cloud(g, r, cloud, h)
    if r == 1:
        rhs = f_sup * wg + g_sup * wf
        c = guarded_ratio(lhs, rhs)
        return ProductCheck(lhs, rhs, lhs <= rhs + TOLERANCE * (1.0 + rhs), 0.0 if c is None else c, False)
    wf1, wg1 = modulus_on_cloud(f, r, cloud, 1.0), modulus_on_cloud(g, r, cloud, 1.0)
    tail = (guarded_ratio(wf, wf1) or 0.0) + (guarded_ratio(wg, wg1) or 0.0)
    bracket = g_sup * wf + f_sup * wg + f_sup * g_sup * h**r + f_sup * g_sup * tail
    c = guarded_ratio(lhs, bracket)
    degenerate = wf1 < 1e-14 or wg1 < 1e-14
    if degenerate:
        log.debug("product check r=%d: degenerate branch (omega_r(.;1) vanishes)", r)
    return ProductCheck(lhs, bracket, c is not None and math.isfinite(c), 0.0 if c is None else c, degenerate)


@dataclass(frozen=True)
class SeminormLimit:
    sup_ratio: float
    limit_ratio: float
    holds: bool


def seminorm_limit(f: AbstractFunction, r: int, hs: Sequence[float], cloud: SampleCloud, *, tol: float = 1e-2) -> SeminormLimit:
    """sup_h omega_r(f; h)/h^r versus its value at the smallest h."""
    hs = list(hs)
    if not hs or any(b >= a for a, b in zip(hs, hs[1:])) or hs[-1] <= 0:
        raise ValueError("h sequence must be positive and strictly decreasing")
    ratios = [modulus_on_cloud(f, r, cloud, h) / h**r for h in hs]
    sup, lim = max(ratios), ratios[-1]
    return SeminormLimit(sup, lim, lim >= sup * (1.0 - tol))


# ---------------------------------------------------------------------------
# directional, mixed and full moduli


def directional_modulus(f: AbstractFunction, r: int, e: Sequence[float], h: float, cloud: SampleCloud) -> float:
    """sup over |t| <= h of |Delta^r_{t e} f(x)|_2."""
    e = np.asarray(e, dtype=float).reshape(1, f.source.dim)
    delta = h * cloud.scalars[:, None] * e
    return float(np.max(f.target.norms(abstract_difference(f, cloud.points, delta, r)), initial=0.0))


def mixed_modulus(
    f: AbstractFunction,
    orders: Tuple[int, int],
    directions: Tuple[Sequence[float], Sequence[float]],
    steps: Tuple[float, float],
    cloud: SampleCloud,
) -> float:
    """sup of |Delta^{r2}_{t2 e2} Delta^{r1}_{t1 e1} f(x)|_2."""
    (r1, r2), (h1, h2) = orders, steps
    e1 = np.asarray(directions[0], dtype=float).reshape(1, f.source.dim)
    e2 = np.asarray(directions[1], dtype=float).reshape(1, f.source.dim)
    d1 = h1 * cloud.scalars[:, None] * e1
    d2 = h2 * cloud.scalars[::-1, None] * e2
    total = np.zeros((len(cloud), f.target.dim))
    for nu, w in enumerate(_difference_weights(r2)):
        total += w * abstract_difference(f, cloud.points + nu * d2, d1, r1)
    return float(np.max(f.target.norms(total), initial=0.0))


def full_vs_partial_ratio(f: AbstractFunction, h: float, cloud: SampleCloud) -> float:
    """omega_2(f; h) over omega_2^{e1} + omega_2^{e2} + omega_{1,1}^{e1,e2}, E_1 two-dimensional."""
    if f.source.dim != 2:
        raise ValueError(f"needs a two-dimensional source, got dim={f.source.dim}")
    e1, e2 = (1.0, 0.0), (0.0, 1.0)
    full = modulus_on_cloud(f, 2, cloud, h)
    parts = directional_modulus(f, 2, e1, h, cloud) + directional_modulus(f, 2, e2, h, cloud)
    parts += mixed_modulus(f, (1, 1), (e1, e2), (h, h), cloud)
    ratio = guarded_ratio(full, parts)
    return 0.0 if ratio is None else ratio


# ---------------------------------------------------------------------------
# Steklov means


def _steklov_weights(r: int) -> List[Tuple[int, float]]:
    return [(nu, (-1) ** (nu + 1) * math.comb(r, nu)) for nu in range(1, r + 1)]


def steklov_mean(f: AbstractFunction, r: int, h: float, *, nodes: int = 12) -> AbstractFunction:
    """f_{r,h} on E_1 = R by tensor Gauss-Legendre over [0, h]^r."""
    if f.source.dim != 1:
        raise ValueError("Steklov means are defined for E_1 = R")
    if r < 1 or not h > 0:
        raise ValueError(f"need r >= 1 and h > 0, got r={r}, h={h}")
    s, w = np.polynomial.legendre.leggauss(nodes)
    s, w = 0.5 * h * (s + 1.0), 0.5 * w
    grid = np.meshgrid(*([s] * r), indexing="ij")
    shift = sum(grid).reshape(-1)
    weight = np.prod(np.meshgrid(*([w] * r), indexing="ij"), axis=0).reshape(-1)

    def fn(x: np.ndarray) -> np.ndarray:
        out = np.zeros((len(x), f.target.dim))
        for nu, c in _steklov_weights(r):
            pts = x[:, :1] + nu * shift[None, :]
            vals = f(pts.reshape(-1, 1)).reshape(len(x), len(shift), f.target.dim)
            out += c * np.einsum("j,ijk->ik", weight, vals)
        return out

    return AbstractFunction(fn, f.source, f.target, f"{f.label}_{{{r},{h:g}}}")


def steklov_symbol(K: np.ndarray, r: int, h: float) -> np.ndarray:
    kh = h * np.asarray(K, dtype=float)[..., 0]
    total = np.zeros(kh.shape, dtype=complex)
    for nu, c in _steklov_weights(r):
        z = 1j * nu * kh
        # (e^z - 1)/z with value 1 at z = 0
        avg = np.where(kh == 0, 1.0, np.expm1(z) / np.where(kh == 0, 1.0, z))
        total += c * avg**r
    return total


def steklov_mean_periodic(f: GridFunction, r: int, h: float) -> GridFunction:
    """Spectral f_{r,h} of a periodic scalar function on T."""
    if f.d != 1:
        raise ValueError("periodic Steklov means are implemented for d=1")
    return synthesize(apply_symbol(analyze(f), lambda K: steklov_symbol(K, r, h)))


@dataclass(frozen=True)
class SteklovBounds:
    deviation: InequalityCheck
    seminorm: InequalityCheck

    @property
    def holds(self) -> bool:
        return self.deviation.holds and self.seminorm.holds


def steklov_bounds_check(f: GridFunction, r: int, h: float) -> SteklovBounds:
    """||f - f_{r,h}||_inf <= omega_r(f; rh) and ||f_{r,h}^(r)||_inf <= (2^r - 1) omega_r(f; h)/h^r."""
    smooth = steklov_mean_periodic(f, r, h)
    dev = float(np.max(np.abs((f - smooth).samples)))
    deriv = synthesize(apply_symbol(analyze(smooth), lambda K: (1j * K[..., 0]) ** r))
    seminorm = float(np.max(np.abs(deriv.samples)))
    return SteklovBounds(
        deviation=InequalityCheck(dev, classical_modulus(f, r, None, r * h, "inf", wrap=True)),
        seminorm=InequalityCheck(seminorm, (2.0**r - 1.0) * classical_modulus(f, r, None, h, "inf") / h**r),
    )

