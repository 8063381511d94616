"""
Differential operators as spectral symbols, K-functionals and the
approximation-vs-K condition report.

K(t; f) = inf_g ||f - g||_p + t ||D g||_p. At p = 2 the infimum is solved
exactly over coefficient-wise scalings of f; elsewhere only candidate upper
bounds are available.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .errors import DescriptorError
from .spectral import (
    ExponentLike,
    GridFunction,
    LebesgueExponent,
    Spectrum,
    analyze,
    apply_multiplier,
    apply_symbol,
    lattice_values,
    lp_norm,
    synthesize,
    wavenumbers,
)
from .summation import MultiplierDescriptor

log = logging.getLogger(__name__)

OPERATOR_KINDS = ("derivative", "laplacian_power", "axis_power", "max_degree", "radial_power", "custom")

# ratios with denominators below this are excluded (0/0) or unbounded (x/0)
DENOMINATOR_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class OperatorSymbol:
    """Spectral symbol mu_k of a differential operator, mu_0 = 0."""

    kind: str
    order: float = 1.0
    axis: int = 0
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self) -> None:
        if self.kind not in OPERATOR_KINDS:
            raise DescriptorError(f"Unsupported operator kind: {self.kind}")
        if self.kind == "custom" and self.fn is None:
            raise DescriptorError("custom operator needs a symbol function")
        if self.kind != "custom" and not self.order > 0:
            raise DescriptorError(f"operator order must be positive, got {self.order}")
        if self.kind == "laplacian_power" and not float(self.order).is_integer():
            raise DescriptorError(f"laplacian_power needs an integer order, got {self.order}")

    @property
    def label(self) -> str:
        if self.kind in ("max_degree", "custom"):
            return self.kind
        return f"{self.kind}({self.order:g})"

    def values(self, K: np.ndarray) -> np.ndarray:
        K = np.asarray(K)
        r = self.order
        if self.kind == "derivative":
            k = K[..., self.axis].astype(float)
            mu = np.abs(k) ** r * np.exp(0.5j * math.pi * r * np.sign(k))
        elif self.kind == "laplacian_power":
            mu = (-1.0) ** int(r) * np.sum(K * K, axis=-1).astype(float) ** int(r)
        elif self.kind == "axis_power":
            mu = np.sum(np.abs(K).astype(float) ** r, axis=-1)
        elif self.kind == "max_degree":
            mu = np.max(np.abs(K), axis=-1).astype(float)
        elif self.kind == "radial_power":
            mu = np.sqrt(np.sum(K * K, axis=-1).astype(float)) ** r
        else:
            mu = np.asarray(self.fn(K), dtype=complex)
        return np.where(np.all(K == 0, axis=-1), 0.0, mu).astype(complex)

    def validate(self, N: int, d: int) -> None:
        """Check mu_k != 0 off the origin and growth towards the lattice edge."""
        K = wavenumbers(N, d)
        mod = np.abs(lattice_values(self.values, N, d))
        sup = np.max(np.abs(K), axis=-1)
        off = sup > 0
        if np.any(mod[off] == 0):
            raise DescriptorError(f"{self.label} vanishes off the origin on the N={N} lattice")
        if np.min(mod[sup == N // 2 - 1]) <= np.max(mod[sup == 1]):
            raise DescriptorError(f"{self.label} does not grow on the N={N} lattice")


def derivative(r: float = 1.0, axis: int = 0) -> OperatorSymbol:
    return OperatorSymbol("derivative", r, axis)


def laplacian_power(r: int = 1) -> OperatorSymbol:
    return OperatorSymbol("laplacian_power", r)


def axis_power(alpha: float) -> OperatorSymbol:
    return OperatorSymbol("axis_power", alpha)


def max_degree() -> OperatorSymbol:
    return OperatorSymbol("max_degree")


def radial_power(alpha: float) -> OperatorSymbol:
    return OperatorSymbol("radial_power", alpha)


def custom(fn: Callable[[np.ndarray], np.ndarray]) -> OperatorSymbol:
    return OperatorSymbol("custom", fn=fn)


def operator_apply(S: Spectrum, D: OperatorSymbol) -> Spectrum:
    return apply_symbol(S, D.values)


@dataclass(frozen=True)
class KBound:
    """Candidate values for K: g = Phi_eps f, g = 0 and g = f."""

    via_method: float
    via_zero: float
    via_identity: float

    @property
    def best(self) -> float:
        return min(self.via_method, self.via_zero, self.via_identity)


def k_upper_bound(
    f: GridFunction,
    eps: float,
    p: ExponentLike,
    D: OperatorSymbol,
    method: MultiplierDescriptor,
    *,
    order: float = 1.0,
) -> KBound:
    """||f - Phi_eps f||_p + t ||D Phi_eps f||_p with t = eps^order."""
    t = eps**order
    S = analyze(f)
    approx_s = apply_multiplier(S, method, eps)
    err = lp_norm(f - synthesize(approx_s), p)
    smooth = lp_norm(synthesize(operator_apply(approx_s, D)), p)
    return KBound(
        via_method=err + t * smooth,
        via_zero=lp_norm(f, p),
        via_identity=t * lp_norm(synthesize(operator_apply(S, D)), p),
    )


@dataclass(frozen=True)
class KSolution:
    value: float
    lam: float
    converged: bool
    grid_value: float
    reason: str = ""


def _family_values(a: np.ndarray, m: np.ndarray, t: float, log_lams: np.ndarray) -> np.ndarray:
    out = np.empty(len(log_lams))
    for start in range(0, len(log_lams), 64):
        lam = np.exp(log_lams[start : start + 64])[:, None]
        tk = 1.0 / (1.0 + lam * m)
        U = np.sqrt(np.sum(a * (1.0 - tk) ** 2, axis=1))
        V = np.sqrt(np.sum(a * m * tk * tk, axis=1))
        out[start : start + 64] = U + t * V
    return out


def k_exact_l2(f: GridFunction, eps: float, D: OperatorSymbol, *, grid_points: int = 1201) -> KSolution:
    """Exact K(eps; f, L_2, W(D)_2) over the stationarity family t_k = 1/(1 + lam m_k)."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    S = analyze(f)
    a_all = np.abs(S.coefficients) ** 2
    m_all = np.abs(lattice_values(D.values, S.N, S.d)) ** 2
    keep = a_all > 0
    a, m = a_all[keep], m_all[keep]
    via_zero = math.sqrt(float(np.sum(a)))
    via_identity = eps * math.sqrt(float(np.sum(a * m)))
    if via_zero == 0.0 or via_identity == 0.0:
        return KSolution(0.0, 0.0, True, 0.0)
    endpoint = min(via_zero, via_identity)

    m_pos = m[m > 0]
    lo = -math.log(float(m_pos.max())) - 30.0
    hi = -math.log(float(m_pos.min())) + 30.0
    log_lams = np.linspace(lo, hi, grid_points)
    values = _family_values(a, m, eps, log_lams)
    i = int(np.argmin(values))
    grid_value = float(values[i])

    def G(log_lam: float) -> float:
        lam = math.exp(log_lam)
        tk = 1.0 / (1.0 + lam * m)
        U = math.sqrt(float(np.sum(a * (1.0 - tk) ** 2)))
        V = math.sqrt(float(np.sum(a * m * tk * tk)))
        return lam * V - eps * U

    a_lo, a_hi = log_lams[max(i - 1, 0)], log_lams[min(i + 1, grid_points - 1)]
    if G(a_lo) < 0 < G(a_hi):
        root = optimize.brentq(G, a_lo, a_hi, xtol=1e-14, rtol=1e-14)
        solved = float(_family_values(a, m, eps, np.array([root]))[0])
        value = min(solved, grid_value, endpoint)
        if solved > grid_value * (1.0 + 1e-6):
            log.warning("K solver value %.12g above grid search %.12g", solved, grid_value)
            return KSolution(value, math.exp(root), False, grid_value, "solver above grid search")
        return KSolution(value, math.exp(root), True, grid_value)
    if endpoint <= grid_value * (1.0 + 1e-9):
        # boundary optimum: g = 0 or g = f
        return KSolution(endpoint, math.inf if via_zero <= via_identity else 0.0, True, grid_value)
    log.warning("K stationarity equation has no bracket near the grid minimum")
    return KSolution(min(grid_value, endpoint), math.exp(log_lams[i]), False, grid_value, "no sign change")


# ---------------------------------------------------------------------------
# condition report


@dataclass(frozen=True)
class KRow:
    function: str
    eps: float
    k_value: float
    error: float
    ratio: float
    excluded: bool = False


@dataclass(frozen=True)
class KReport:
    eps: Tuple[float, ...]
    rows: Tuple[KRow, ...]
    a_alpha: float
    a_beta: float
    a_gamma: float
    excluded: int

    @property
    def passes(self) -> bool:
        return all(math.isfinite(v) for v in (self.a_alpha, self.a_beta, self.a_gamma))


def guarded_ratio(num: float, den: float) -> Optional[float]:
    """num/den; None for 0/0, inf for x/0."""
    if den < DENOMINATOR_FLOOR:
        return None if num < 1e-12 else math.inf
    return num / den


CorpusLike = Union[Mapping[str, GridFunction], Iterable[Tuple[str, GridFunction]]]


def _items(corpus: CorpusLike) -> List[Tuple[str, GridFunction]]:
    return list(corpus.items()) if isinstance(corpus, Mapping) else list(corpus)


def lemma_condition_report(
    method: MultiplierDescriptor,
    D: OperatorSymbol,
    p: ExponentLike,
    eps_grid: Sequence[float],
    corpus: CorpusLike,
    *,
    order: float = 1.0,
) -> KReport:
    """Largest observed ratios for the three approximation/K conditions."""
    items = _items(corpus)
    if not items:
        raise ValueError("corpus must be nonempty")
    exp = LebesgueExponent.parse(p)
    exact = exp.value == 2.0
    worst = {"alpha": 0.0, "beta": 0.0, "gamma": 0.0}
    excluded = 0
    rows: List[KRow] = []
    for name, f in items:
        S = analyze(f)
        f_norm = lp_norm(f, exp)
        df_norm = lp_norm(synthesize(operator_apply(S, D)), exp)
        for eps in eps_grid:
            t = eps**order
            approx_s = apply_multiplier(S, method, eps)
            approx = synthesize(approx_s)
            err = lp_norm(f - approx, exp)
            checks = {
                "alpha": (err, t * df_norm),
                "beta": (lp_norm(approx, exp), f_norm),
                "gamma": (t * lp_norm(synthesize(operator_apply(approx_s, D)), exp), err),
            }
            for key, (num, den) in checks.items():
                ratio = guarded_ratio(num, den)
                if ratio is None:
                    excluded += 1
                else:
                    worst[key] = max(worst[key], ratio)
            if exact:
                k_value = k_exact_l2(f, t, D).value
            else:
                k_value = k_upper_bound(f, eps, exp, D, method, order=order).best
            ratio = guarded_ratio(k_value, err)
            rows.append(KRow(name, float(eps), k_value, err, math.nan if ratio is None else ratio, ratio is None))
    return KReport(tuple(float(e) for e in eps_grid), tuple(rows), worst["alpha"], worst["beta"], worst["gamma"], excluded)


def l2_lemma_constants(
    method: MultiplierDescriptor,
    D: OperatorSymbol,
    eps_grid: Sequence[float],
    N: int,
    d: int = 1,
    *,
    order: float = 1.0,
) -> Tuple[float, float, float]:
    """Coefficient-wise suprema of the three condition ratios: exact operator norms at p = 2."""
    mu = np.abs(lattice_values(D.values, N, d))
    off = ~np.all(wavenumbers(N, d) == 0, axis=-1)
    a_alpha = a_beta = a_gamma = 0.0
    for eps in eps_grid:
        t = eps**order
        phi = np.abs(lattice_values(lambda K: method(eps * K), N, d))
        gap = np.abs(1.0 - lattice_values(lambda K: method(eps * K), N, d))
        a_beta = max(a_beta, float(phi.max()))
        sel = off & (mu > 0)
        a_alpha = max(a_alpha, float(np.max(gap[sel] / (t * mu[sel]))))
        num = t * mu * phi
        zero_gap = gap < DENOMINATOR_FLOOR
        if np.any(zero_gap & (num > 1e-12)):
            a_gamma = math.inf
        # Fejer peaks at |k| = 1 on the lattice, so its a_gamma is 1 - eps_min rather than the sup 1
        ok = ~zero_gap
        if np.any(ok):
            a_gamma = max(a_gamma, float(np.max(num[ok] / gap[ok])))
    return a_alpha, a_beta, a_gamma
