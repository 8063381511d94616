"""
Summation-method multipliers phi and the means Phi_eps(f) = sum phi(eps k) f_k e_k.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from .errors import DescriptorError
from .spectral import ExponentLike, GridFunction, analyze, apply_multiplier, lp_norm, synthesize

log = logging.getLogger(__name__)

# kind -> (required parameters, dimension constraint or None)
CATALOG: Dict[str, Tuple[Tuple[str, ...], Optional[int]]] = {
    "riesz": (("alpha", "beta"), None),
    "trigub_even": (("r",), None),
    "trigub_odd": (("r",), 1),
    "fractional": (("r",), 1),
    "bochner_riesz": (("r", "delta"), None),
    "fejer": ((), None),
    "marcinkiewicz_2d": (("n",), 2),
    "axis_riesz": (("alpha", "beta"), None),
    "identity": ((), None),
    "dirichlet_power": (("s", "r", "n"), 1),
    "custom": ((), 1),
}


def _positive_part_power(base: np.ndarray, power: float) -> np.ndarray:
    out = np.zeros_like(base)
    inside = base > 0
    out[inside] = base[inside] ** power
    return out


@dataclass(frozen=True, eq=False)
class MultiplierDescriptor:
    """Named, parameterized phi: R^d -> C with phi(0) = 1."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)
    d: int = 1
    table: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self) -> None:
        if self.kind not in CATALOG:
            raise DescriptorError(f"Unsupported multiplier kind: {self.kind}")
        required, dim = CATALOG[self.kind]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise DescriptorError(f"{self.kind} is missing parameters {missing}")
        if dim is not None and self.d != dim:
            raise DescriptorError(f"{self.kind} is defined for d={dim}, got d={self.d}")
        object.__setattr__(self, "params", dict(self.params))
        self._check_domain()

    def _check_domain(self) -> None:
        p = self.params
        kind = self.kind
        if kind in ("riesz", "axis_riesz") and not (p["alpha"] > 0 and p["beta"] >= 0):
            raise DescriptorError(f"{kind} needs alpha > 0 and beta >= 0, got {p}")
        if kind == "trigub_even" and not (float(p["r"]).is_integer() and p["r"] >= 2 and int(p["r"]) % 2 == 0):
            raise DescriptorError(f"trigub_even needs an even integer r, got {p['r']}")
        if kind == "trigub_odd" and not (float(p["r"]).is_integer() and int(p["r"]) % 2 == 1):
            raise DescriptorError(f"trigub_odd needs an odd integer r, got {p['r']}")
        if kind == "fractional" and not (p["r"] > 0 and not float(p["r"]).is_integer()):
            raise DescriptorError(f"fractional needs a positive non-integer r, got {p['r']}")
        if kind == "bochner_riesz" and not (p["r"] > 0 and p["delta"] >= 0):
            raise DescriptorError(f"bochner_riesz needs r > 0 and delta >= 0, got {p}")
        if kind == "marcinkiewicz_2d" and not (float(p["n"]).is_integer() and p["n"] >= 0):
            raise DescriptorError(f"marcinkiewicz_2d needs an integer n >= 0, got {p['n']}")
        if kind in ("custom", "dirichlet_power"):
            if self.table is None:
                raise DescriptorError(f"{kind} needs a table")
            nodes, values = self.table
            if nodes.ndim != 1 or nodes.shape != values.shape or np.any(np.diff(nodes) <= 0):
                raise DescriptorError("table nodes must be strictly increasing and match values")
            if nodes[0] <= 0 <= nodes[-1]:
                at0 = np.interp(0.0, nodes, values.real) + 1j * np.interp(0.0, nodes, values.imag)
                if abs(at0 - 1.0) > 1e-12:
                    raise DescriptorError(f"tabulated multiplier must equal 1 at 0, got {at0}")

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={self.params[k]:g}" for k in sorted(self.params))
        return f"{self.kind}({inner})"

    def __repr__(self) -> str:
        return f"MultiplierDescriptor({self.label}, d={self.d})"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """phi at points x of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.d,):
            raise DescriptorError(f"{self.label}: points must have trailing axis {self.d}, got {x.shape}")
        p = self.params
        kind = self.kind
        rho = np.sqrt(np.sum(x * x, axis=-1))
        t = x[..., 0]
        a = np.abs(t)
        if kind == "riesz":
            return _positive_part_power(1.0 - rho ** p["alpha"], p["beta"]).astype(complex)
        if kind == "trigub_even":
            return np.clip(1.0 - rho ** p["r"], 0.0, None).astype(complex)
        if kind == "trigub_odd":
            r = p["r"]
            return np.clip(1.0 - a ** (r + 1), 0.0, None) + 1j * a**r * np.clip(1.0 - a, 0.0, None) * np.sign(t)
        if kind == "fractional":
            r = p["r"]
            odd = math.tan(r * math.pi / 2.0) * a**r * np.clip(1.0 - a, 0.0, None) * np.sign(t)
            return np.clip(1.0 - a**r, 0.0, None) - 1j * odd
        if kind == "bochner_riesz":
            return _positive_part_power(1.0 - rho ** (2 * p["r"]), p["delta"]).astype(complex)
        if kind == "fejer":
            return np.clip(1.0 - rho, 0.0, None).astype(complex)
        if kind == "marcinkiewicz_2d":
            n = int(p["n"])
            m = np.max(np.abs(x), axis=-1)
            count = np.zeros(m.shape)
            for nu in range(n + 1):
                count += m <= nu
            return (count / (n + 1)).astype(complex)
        if kind == "axis_riesz":
            base = 1.0 - np.sum(np.abs(x) ** p["alpha"], axis=-1)
            return _positive_part_power(base, p["beta"]).astype(complex)
        if kind == "identity":
            return np.ones(x.shape[:-1], dtype=complex)
        nodes, values = self.table  # custom / dirichlet_power
        re = np.interp(t, nodes, values.real, left=0.0, right=0.0)
        im = np.interp(t, nodes, values.imag, left=0.0, right=0.0)
        return re + 1j * im


def evaluate(phi: MultiplierDescriptor, x: Any) -> complex:
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.shape != (phi.d,):
        raise DescriptorError(f"{phi.label}: expected a point in R^{phi.d}, got {x!r}")
    if not np.all(np.isfinite(pt)):
        raise ValueError(f"point must be finite, got {x!r}")
    return complex(phi(pt[None, :])[0])


# factories


def riesz(alpha: float, beta: float, d: int = 1) -> MultiplierDescriptor:
    return MultiplierDescriptor("riesz", {"alpha": alpha, "beta": beta}, d)


def trigub_even(r: int) -> MultiplierDescriptor:
    return MultiplierDescriptor("trigub_even", {"r": r})


def trigub_odd(r: int) -> MultiplierDescriptor:
    return MultiplierDescriptor("trigub_odd", {"r": r})


def trigub_method(r: int) -> MultiplierDescriptor:
    """(1-|x|^r)_+ for even r, the odd-order companion otherwise."""
    return trigub_even(r) if int(r) % 2 == 0 else trigub_odd(r)


def fractional(r: float) -> MultiplierDescriptor:
    return MultiplierDescriptor("fractional", {"r": r})


def bochner_riesz(r: float, delta: float, d: int = 1) -> MultiplierDescriptor:
    return MultiplierDescriptor("bochner_riesz", {"r": r, "delta": delta}, d)


def fejer(d: int = 1) -> MultiplierDescriptor:
    return MultiplierDescriptor("fejer", {}, d)


def marcinkiewicz_2d(n: int) -> MultiplierDescriptor:
    return MultiplierDescriptor("marcinkiewicz_2d", {"n": n}, 2)


def axis_riesz(alpha: float, beta: float, d: int = 2) -> MultiplierDescriptor:
    return MultiplierDescriptor("axis_riesz", {"alpha": alpha, "beta": beta}, d)


def identity(d: int = 1) -> MultiplierDescriptor:
    return MultiplierDescriptor("identity", {}, d)


def custom(nodes: Sequence[float], values: Sequence[complex]) -> MultiplierDescriptor:
    return MultiplierDescriptor("custom", {}, 1, (np.asarray(nodes, dtype=float), np.asarray(values, dtype=complex)))


def from_dict(spec: Mapping[str, Any]) -> MultiplierDescriptor:
    """Descriptor from a config mapping like {"kind": "riesz", "alpha": 2, "beta": 1}."""
    data = dict(spec)
    kind = data.pop("kind", None)
    d = int(data.pop("d", 1))
    if kind == "dirichlet_power":
        return dirichlet_power_multiplier(int(data["s"]), int(data["r"]), int(data["n"]))
    if kind is None or kind == "custom":
        raise DescriptorError(f"cannot build a multiplier from {spec!r}")
    return MultiplierDescriptor(kind, {k: float(v) for k, v in data.items()}, d)


def degree(eps: float) -> int:
    """n = [1/eps]."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return int(math.floor(1.0 / eps + 1e-9))


def dirichlet_kernel_coefficients(s: int, n: int) -> np.ndarray:
    """Coefficients of D_n^s over k = -sn..sn, normalized to 1 at k = 0."""
    box = np.ones(2 * n + 1)
    c = box
    for _ in range(s - 1):
        c = np.convolve(c, box)
    return c / c[s * n]


def dirichlet_power_multiplier(s: int, r: int, n: int, *, resolution: Optional[int] = None) -> MultiplierDescriptor:
    """phi_n(k/n) = sum_{nu=1}^r (-1)^(nu+1) C(r, nu) kappa(nu k), tabulated at k/n."""
    if s < 2 or r < 1 or n < 1:
        raise ValueError(f"need s >= 2, r >= 1, n >= 1, got s={s}, r={r}, n={n}")
    if s < r + 2:
        log.warning("dirichlet_power s=%d, r=%d is outside the standing assumption s >= r + 2", s, r)
    if resolution is not None and s * n > resolution // 2:
        raise ValueError(f"kernel degree s*n={s * n} exceeds N/2={resolution // 2}")
    kappa = dirichlet_kernel_coefficients(s, n)
    top = s * n
    m = np.arange(-top, top + 1)
    phi = np.zeros(m.shape)
    for nu in range(1, r + 1):
        idx = nu * m
        inside = np.abs(idx) <= top
        phi += (-1) ** (nu + 1) * special.comb(r, nu) * np.where(inside, kappa[np.clip(idx + top, 0, 2 * top)], 0.0)
    return MultiplierDescriptor("dirichlet_power", {"s": s, "r": r, "n": n}, 1, (m / n, phi.astype(complex)))


def approximate(f: GridFunction, phi: MultiplierDescriptor, eps: float, p: ExponentLike) -> Tuple[GridFunction, float]:
    """Phi_eps(f) and ||f - Phi_eps(f)||_p."""
    approx = synthesize(apply_multiplier(analyze(f), phi, eps))
    return approx, lp_norm(f - approx, p)


@dataclass(frozen=True)
class UnitRoots:
    locations: Tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.locations)


def find_unit_roots(
    phi: MultiplierDescriptor,
    interval: Optional[Tuple[float, float]] = None,
    *,
    points: int = 10_000,
    xtol: float = 1e-10,
) -> UnitRoots:
    """Positive roots of phi(x) = 1 by sign-change scan and bisection."""
    if phi.d != 1:
        raise DescriptorError("root scan needs a one-dimensional multiplier")
    if interval is None:
        top = math.pi * phi.params["s"] if phi.kind == "dirichlet_power" else math.pi
        interval = (0.0, top)
    lo, hi = interval
    xs = np.linspace(lo, hi, points + 1)
    xs = xs[xs > 0]
    values = phi(xs[:, None])
    if np.max(np.abs(values.imag)) > 1e-12:
        log.warning("%s is not real on the scan interval; using the real part", phi.label)
    g = values.real - 1.0

    def fn(x: float) -> float:
        return float(phi(np.array([[x]])).real[0]) - 1.0

    roots: List[float] = []
    for i in range(len(xs) - 1):
        if g[i] == 0.0:
            roots.append(float(xs[i]))
        elif g[i] * g[i + 1] < 0:
            roots.append(float(optimize.bisect(fn, xs[i], xs[i + 1], xtol=xtol)))
    if len(xs) and g[-1] == 0.0:
        roots.append(float(xs[-1]))
    return UnitRoots(tuple(roots))


def roots_in_step_variable(roots: Sequence[float], s: int, n: int) -> List[float]:
    """Map roots in the k/n variable to the k*h_n variable, h_n = 2*pi/((2n+1)s)."""
    h_n = 2.0 * math.pi / ((2 * n + 1) * s)
    return [x * n * h_n for x in roots]
