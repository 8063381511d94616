"""
Experiment runner: evaluates both sides of each claimed order equivalence
over a corpus and an n-grid (eps = h = 1/n) and returns flat rows.

Three-way relations are split into row groups whose experiment column reads
"<kind>/<relation>". Rows are computed per (function, n) on a thread pool and
sorted before they are returned, so output never depends on scheduling.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import banach, kfunctional, summation, wiener
from .config import ExperimentConfig
from .corpus import corpus_generate
from .errors import ConfigError
from .kfunctional import OperatorSymbol, guarded_ratio, k_exact_l2, k_upper_bound
from .moduli import (
    WeightSpec,
    axis_kernel_modulus,
    classical_modulus,
    composite_difference,
    diagonal_kernel_modulus,
    gamma_corrected_modulus,
    linearized_modulus,
    weighted_modulus,
)
from .spectral import GridFunction, analyze, apply_multiplier, conjugate_antiderivative, lp_norm, synthesize

log = logging.getLogger(__name__)

FLAG_EXCLUDED = "excluded"
FLAG_VIOLATION = "violation"
FLAG_UNCONVERGED = "unconverged"
ERROR_PREFIX = "error:"

# one-sided bounds on sampled sups carry discretization slack
BOUND_RTOL = 1e-3
BOUND_ATOL = 1e-9


@dataclass(frozen=True)
class EquivalenceRow:
    experiment: str
    function: str
    p: str
    param: float
    lhs: float
    rhs: float
    ratio: float
    flag: str = ""

    @property
    def failing(self) -> bool:
        return self.flag in (FLAG_VIOLATION, FLAG_UNCONVERGED) or self.flag.startswith(ERROR_PREFIX)

    def sort_key(self) -> Tuple[str, str, float, float]:
        return (self.experiment, self.function, float(self.p), float(self.param))

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def make_row(experiment: str, function: str, p: str, param: float, lhs: float, rhs: float, flag: str = "") -> EquivalenceRow:
    ratio = guarded_ratio(lhs, rhs)
    if ratio is None:
        return EquivalenceRow(experiment, function, str(p), float(param), float(lhs), float(rhs), math.nan, flag or FLAG_EXCLUDED)
    if math.isinf(ratio):
        # an lhs above the float slack over a vanishing rhs breaks every two-sided bound
        flag = flag or (FLAG_VIOLATION if lhs > BOUND_ATOL else FLAG_EXCLUDED)
    return EquivalenceRow(experiment, function, str(p), float(param), float(lhs), float(rhs), float(ratio), flag)


def bound_flag(lhs: float, rhs: float) -> str:
    """violation when lhs <= rhs fails beyond the sampling slack."""
    return FLAG_VIOLATION if lhs > rhs * (1.0 + BOUND_RTOL) + BOUND_ATOL else ""


def strict_bound_flag(lhs: float, rhs: float) -> str:
    """violation when lhs <= rhs fails beyond the absolute float slack only."""
    return FLAG_VIOLATION if lhs > rhs + BOUND_ATOL else ""


def worker_count() -> int:
    raw = os.environ.get("SMOOTHLAB_THREADS")
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError(f"SMOOTHLAB_THREADS must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class _Run:
    cfg: ExperimentConfig
    shared: Mapping[str, Any]

    def param(self, key: str, default: Any) -> Any:
        return self.cfg.params.get(key, default)


KindFn = Callable[[_Run, str, GridFunction, int], List[EquivalenceRow]]


def _k_row(experiment: str, name: str, n: int, sol: kfunctional.KSolution, err: float) -> EquivalenceRow:
    return make_row(experiment, name, "2", n, sol.value, err, "" if sol.converged else FLAG_UNCONVERGED)


# ---------------------------------------------------------------------------
# one-dimensional equivalences


def _equiv_2_2(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    r = int(run.param("r", 2))
    h = 1.0 / n
    rows = []
    for p in run.cfg.p:
        full = classical_modulus(f, r, None, h, p)
        lin = linearized_modulus(f, r, h, p)
        rows.append(make_row("equiv_2_2", name, p, n, full, lin, strict_bound_flag(lin, full)))
    return rows


def _equiv_2_3(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    r = int(run.param("r", 2))
    phi = summation.trigub_method(r)
    eps = 1.0 / n
    rows = []
    for p in run.cfg.p:
        _, err = summation.approximate(f, phi, eps, p)
        rows.append(make_row("equiv_2_3", name, p, n, err, classical_modulus(f, r, None, eps, p)))
    return rows


def _equiv_2_4(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    alpha = int(run.param("alpha", 1))
    r = int(run.param("r", alpha // 2 + 1))
    if alpha < 1 or 2 * r <= alpha:
        raise ValueError(f"need alpha >= 1 and 2r > alpha, got alpha={alpha}, r={r}")
    eps = 1.0 / n
    w = WeightSpec("kernel", alpha + 1.0, math.inf)
    odd = alpha % 2 == 1
    order = alpha + 1 if odd else alpha
    conj = conjugate_antiderivative(f) if odd else None
    rows = []
    for p in run.cfg.p:
        kern = weighted_modulus(f, r, w, eps, p)
        rhs = classical_modulus(f, order, None, eps, p)
        if conj is not None:
            rhs += classical_modulus(conj, order, None, eps, p) / eps
        rows.append(make_row("equiv_2_4", name, p, n, kern.value, rhs, FLAG_UNCONVERGED if kern.flagged else ""))
    return rows


def _equiv_2_5(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    r = float(run.param("r", 0.5))
    phi = summation.fractional(r)
    eps = 1.0 / n
    rows = []
    for p in run.cfg.p:
        _, err = summation.approximate(f, phi, eps, p)
        rows.append(make_row("equiv_2_5/approx_vs_modulus", name, p, n, err, gamma_corrected_modulus(f, r, eps, p)))
        if p == "2":
            rows.append(_k_row("equiv_2_5/k_vs_approx", name, n, k_exact_l2(f, eps**r, kfunctional.derivative(r)), err))
    return rows


def _bernstein_anchors(phi: summation.MultiplierDescriptor, s: int, r: int, n: int) -> List[Tuple[float, int]]:
    roots = summation.find_unit_roots(phi)
    thetas = summation.roots_in_step_variable(roots.locations, s, n)
    r1 = 2 * ((r + 1) // 2)
    r0 = r1 - 2 * len(thetas)
    if r0 < 0:
        raise ValueError(f"{len(thetas)} unit roots need order >= {2 * len(thetas)}, have {r1}")
    anchors: List[Tuple[float, int]] = [(0.0, r0)]
    for t in thetas:
        anchors += [(t, 1), (-t, 1)]
    return anchors


def _equiv_2_7(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    s = int(run.param("s", 6))
    r = int(run.param("r", 2))
    phi = summation.dirichlet_power_multiplier(s, r, n, resolution=f.N)
    anchors = _bernstein_anchors(phi, s, r, n)
    h_n = 2.0 * math.pi / ((2 * n + 1) * s)
    diff = composite_difference(f, anchors, h_n)
    rows = []
    for p in run.cfg.p:
        _, err = summation.approximate(f, phi, 1.0 / n, p)
        rows.append(make_row("equiv_2_7", name, p, n, err, lp_norm(diff, p)))
    return rows


# ---------------------------------------------------------------------------
# multidimensional equivalences: approximation vs modulus, K vs approximation


def _three_way(
    kind: str,
    run: _Run,
    name: str,
    f: GridFunction,
    n: int,
    phi: summation.MultiplierDescriptor,
    eps: float,
    modulus: Callable[[str], Tuple[float, bool]],
    relation: str,
    D: OperatorSymbol,
    t: float,
) -> List[EquivalenceRow]:
    rows = []
    for p in run.cfg.p:
        _, err = summation.approximate(f, phi, eps, p)
        value, flagged = modulus(p)
        rows.append(make_row(f"{kind}/{relation}", name, p, n, err, value, FLAG_UNCONVERGED if flagged else ""))
        if p == "2":
            rows.append(_k_row(f"{kind}/k_vs_approx", name, n, k_exact_l2(f, t, D), err))
    return rows


def _default_delta(d: int) -> float:
    return (d - 1) / 2.0 + 0.5


def _equiv_3_4(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    r = int(run.param("r", 1))
    delta = float(run.param("delta", _default_delta(f.d)))
    eps = 1.0 / n

    def modulus(p: str) -> Tuple[float, bool]:
        wm = weighted_modulus(f, r, WeightSpec("ball"), eps, p)
        return wm.value, wm.flagged

    phi = summation.bochner_riesz(r, delta, f.d)
    return _three_way("equiv_3_4", run, name, f, n, phi, eps, modulus, "approx_vs_modulus", kfunctional.laplacian_power(r), eps ** (2 * r))


def _equiv_3_5(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    r = int(run.param("r", 1))
    delta = float(run.param("delta", _default_delta(f.d)))
    eps = 1.0 / n

    def modulus(p: str) -> Tuple[float, bool]:
        wm = weighted_modulus(f, r, WeightSpec("axes"), eps, p)
        return wm.value, wm.flagged

    phi = summation.axis_riesz(2.0 * r, delta, f.d)
    return _three_way("equiv_3_5", run, name, f, n, phi, eps, modulus, "approx_vs_modulus", kfunctional.axis_power(2.0 * r), eps ** (2 * r))


def _equiv_3_6(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    phi = summation.marcinkiewicz_2d(n)

    def modulus(p: str) -> Tuple[float, bool]:
        return diagonal_kernel_modulus(f, n, p), False

    # the Marcinkiewicz table is indexed by k itself
    return _three_way("equiv_3_6", run, name, f, n, phi, 1.0, modulus, "approx_vs_kernel", kfunctional.max_degree(), 1.0 / n)


def _equiv_3_8(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    alpha = float(run.param("alpha", 1.0))
    beta = float(run.param("beta", 1.0))
    r = int(run.param("r", int(alpha // 2) + 1))
    eps = 1.0 / n

    def modulus(p: str) -> Tuple[float, bool]:
        return axis_kernel_modulus(f, r, alpha, eps, p), False

    phi = summation.axis_riesz(alpha, beta, f.d)
    return _three_way("equiv_3_8", run, name, f, n, phi, eps, modulus, "approx_vs_kernel", kfunctional.axis_power(alpha), eps**alpha)


def _equiv_3_9(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    d = f.d
    alpha = float(run.param("alpha", 1.0))
    beta = float(run.param("beta", _default_delta(d)))
    r = int(run.param("r", int(alpha // 2) + 1))
    # exact oscillatory quadrature on [1, inf) exists for d in {1, 3}
    U = math.inf if d in (1, 3) else float(run.param("truncation", 64.0))
    w = WeightSpec.kernel_for(alpha, d, U)
    eps = 1.0 / n

    def modulus(p: str) -> Tuple[float, bool]:
        wm = weighted_modulus(f, r, w, eps, p)
        return wm.value, wm.flagged

    phi = summation.riesz(alpha, beta, d)
    return _three_way("equiv_3_9", run, name, f, n, phi, eps, modulus, "approx_vs_kernel", kfunctional.radial_power(alpha), eps**alpha)


# ---------------------------------------------------------------------------
# approximation / K-functional conditions


def operator_from_dict(spec: Mapping[str, Any]) -> OperatorSymbol:
    """Operator from a config mapping like {"kind": "radial_power", "order": 1}."""
    data = dict(spec)
    kind = data.get("kind", "radial_power")
    order = float(data.get("order", 1.0))
    if kind == "derivative":
        return kfunctional.derivative(order, int(data.get("axis", 0)))
    if kind == "laplacian_power":
        return kfunctional.laplacian_power(int(order))
    if kind == "axis_power":
        return kfunctional.axis_power(order)
    if kind == "max_degree":
        return kfunctional.max_degree()
    if kind == "radial_power":
        return kfunctional.radial_power(order)
    raise ConfigError(f"unsupported operator kind in config: {kind!r}")


def _prepare_kfunc(cfg: ExperimentConfig) -> Dict[str, Any]:
    method = summation.from_dict({"kind": "fejer", "d": cfg.d, **cfg.params.get("method", {})})
    D = operator_from_dict(cfg.params.get("operator", {}))
    D.validate(cfg.N, cfg.d)
    order = float(cfg.params.get("order", 1.0))
    shared: Dict[str, Any] = {"method": method, "operator": D, "order": order, "band": None}
    if "2" in cfg.p:
        eps_grid = [1.0 / n for n in cfg.grid]
        consts = kfunctional.l2_lemma_constants(method, D, eps_grid, cfg.N, cfg.d, order=order)
        log.info("L2 condition constants for %s: a_alpha=%.6g a_beta=%.6g a_gamma=%.6g", method.label, *consts)
        shared["band"] = max(consts)
    return shared


def _kfunc_lemma(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    method = run.shared["method"]
    D = run.shared["operator"]
    order = run.shared["order"]
    eps = 1.0 / n
    t = eps**order
    S = analyze(f)
    approx_s = apply_multiplier(S, method, eps)
    approx = synthesize(approx_s)
    smooth = synthesize(kfunctional.operator_apply(approx_s, D))
    df = synthesize(kfunctional.operator_apply(S, D))
    rows = []
    for p in run.cfg.p:
        err = lp_norm(f - approx, p)
        rows.append(make_row("kfunc_lemma/alpha", name, p, n, err, t * lp_norm(df, p)))
        rows.append(make_row("kfunc_lemma/beta", name, p, n, lp_norm(approx, p), lp_norm(f, p)))
        rows.append(make_row("kfunc_lemma/gamma", name, p, n, t * lp_norm(smooth, p), err))
        if p != "2":
            k_value = k_upper_bound(f, eps, p, D, method, order=order).best
            rows.append(make_row("kfunc_lemma/k_vs_error", name, p, n, k_value, err))
            continue
        sol = k_exact_l2(f, t, D)
        row = _k_row("kfunc_lemma/k_vs_error", name, n, sol, err)
        a = run.shared["band"]
        if not row.flag and a is not None and math.isfinite(a):
            lo, hi = 1.0 / (1.0 + a), 1.0 + a
            if not lo * (1.0 - 1e-9) <= row.ratio <= hi * (1.0 + 1e-9):
                row = EquivalenceRow(**{**row.as_dict(), "flag": FLAG_VIOLATION})
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Banach-valued moduli on scalar corpus functions


def grid_map(f: GridFunction, label: str = "f") -> banach.AbstractFunction:
    """The trigonometric surrogate of f as a map on the whole line."""
    if f.d != 1:
        raise ValueError("grid_map needs a one-dimensional function")
    S = analyze(f)
    coeffs = S.coefficients
    k = S.wavenumbers()[..., 0]
    keep = np.abs(coeffs) > 1e-15 * max(float(np.max(np.abs(coeffs))), 1e-300)
    ks, cs = k[keep].astype(float), coeffs[keep]
    nyquist = k[keep] == -(f.N // 2)
    line = banach.scalar_line(radius=math.pi)

    def fn(x: np.ndarray) -> np.ndarray:
        out = np.empty(len(x))
        for start in range(0, len(x), 2048):
            t = x[start : start + 2048, :1]
            waves = np.where(nyquist, np.cos(t * ks), np.exp(1j * t * ks))
            out[start : start + 2048] = (waves @ cs).real
        return out[:, None]

    return banach.AbstractFunction(fn, line, line, label)


def _prepare_banach(cfg: ExperimentConfig) -> Dict[str, Any]:
    samples = int(cfg.params.get("samples", 1 << 12))
    cloud = banach.SampleCloud.sobol(banach.scalar_line(radius=math.pi), samples, seed=cfg.seed)
    return {"cloud": cloud}


def _banach_suite(run: _Run, name: str, f: GridFunction, n: int) -> List[EquivalenceRow]:
    r = int(run.param("r", 2))
    k = int(run.param("marchaud_terms", 2))
    h = 1.0 / n
    cloud = run.shared["cloud"]
    F = grid_map(f, name)
    rows = []

    def check(relation: str, c: banach.InequalityCheck) -> None:
        rows.append(make_row(f"banach_suite/{relation}", name, "inf", n, c.lhs, c.rhs, "" if c.holds else FLAG_VIOLATION))

    check("scaling", banach.scaling_check(F, r, h, 2, cloud))
    check("lambda_scaling", banach.lambda_scaling_check(F, r, h, 1.5, cloud))
    check("ratio_comparison", banach.ratio_comparison_check(F, r, h, 3.0 * h, cloud))
    check("marchaud", banach.marchaud_rhs(F, r, h, k, cloud))

    chain = banach.chain_check(F, r, h, cloud)
    monotone = all(a <= b + banach.TOLERANCE * (1.0 + abs(b)) for a, b in zip(chain, chain[1:]))
    rows.append(make_row("banach_suite/chain", name, "inf", n, chain[0], chain[-1], "" if monotone else FLAG_VIOLATION))

    prod = banach.product_modulus_check(F, F, 1, h, cloud)
    rows.append(make_row("banach_suite/product", name, "inf", n, prod.lhs, prod.rhs, "" if prod.holds else FLAG_VIOLATION))

    st = banach.steklov_bounds_check(f, r, h)
    for relation, c in (("steklov_deviation", st.deviation), ("steklov_seminorm", st.seminorm)):
        rows.append(make_row(f"banach_suite/{relation}", name, "inf", n, c.lhs, c.rhs, bound_flag(c.lhs, c.rhs)))
    return rows


# ---------------------------------------------------------------------------
# Wiener-algebra scans (no corpus)


def _wiener_scan(run: _Run, r: int) -> List[EquivalenceRow]:
    X = float(run.param("X", 100.0))
    W = float(run.param("window", 64.0))
    thetas = [float(t) for t in run.param("thetas", [0.25, 0.5, 1.0])]
    alphas = [float(a) for a in run.param("alphas", [1.0, 2.0])]
    rows = []

    scan = wiener.psi_r_scan(r, X)
    rows.append(make_row("wiener_scan/psi_min", "psi_r", "inf", r, scan.scaled_minimum, 1.0, "" if scan.scaled_minimum > 1e-12 else FLAG_VIOLATION))

    for theta in thetas:
        label = f"theta={theta:g}"
        g0 = abs(complex(wiener.transition_eval(wiener.step_ratio_transition(r, theta), np.array([0.0]))[0]))
        target = (r + 1) * theta**r
        rows.append(make_row("wiener_scan/step_ratio_zero", label, "inf", r, g0, target, FLAG_VIOLATION if abs(g0 - target) > 1e-6 * target else ""))
        b = wiener.step_ratio_b_bound(r, theta, W)
        ok = b.a_part.converged and not b.a_part.divergent
        rows.append(make_row("wiener_scan/step_ratio_b", label, "1", r, b.value, 2.0**r, "" if ok else FLAG_UNCONVERGED))

    for alpha in alphas:
        if not alpha < 2 * r:
            continue
        label = f"alpha={alpha:g}"
        far = wiener.averaged_kernel_symbol(1e3, r, alpha)
        limit = wiener.kernel_symbol_at_infinity(r, alpha)
        rows.append(make_row("wiener_scan/kernel_infinity", label, "inf", r, far, limit, FLAG_VIOLATION if abs(far / limit - 1.0) > 2e-2 else ""))
        x = 1e-3
        near = wiener.kernel_symbol_1d(x, r, alpha) / x**alpha
        const = wiener.near_zero_constant(r, alpha)
        rows.append(make_row("wiener_scan/near_zero", label, "inf", r, near, const, FLAG_VIOLATION if abs(near / const - 1.0) > 1e-2 else ""))

    if r == 1:
        hat = wiener.a_norm_estimate_1d(lambda x: np.clip(1.0 - np.abs(x), 0.0, None), W)
        flag = "" if hat.converged else FLAG_UNCONVERGED
        if not flag and abs(hat.value - 1.0) > 1e-2:
            flag = FLAG_VIOLATION
        rows.append(make_row("wiener_scan/fejer_hat", "fejer_hat", "1", W, hat.value, 1.0, flag))
    return rows


# ---------------------------------------------------------------------------
# dispatch


KINDS: Dict[str, KindFn] = {
    "equiv_2_2": _equiv_2_2,
    "equiv_2_3": _equiv_2_3,
    "equiv_2_4": _equiv_2_4,
    "equiv_2_5": _equiv_2_5,
    "equiv_2_7": _equiv_2_7,
    "equiv_3_4": _equiv_3_4,
    "equiv_3_5": _equiv_3_5,
    "equiv_3_6": _equiv_3_6,
    "equiv_3_8": _equiv_3_8,
    "equiv_3_9": _equiv_3_9,
    "kfunc_lemma": _kfunc_lemma,
    "banach_suite": _banach_suite,
}

PREPARE: Dict[str, Callable[[ExperimentConfig], Dict[str, Any]]] = {
    "kfunc_lemma": _prepare_kfunc,
    "banach_suite": _prepare_banach,
}


def _error_rows(cfg: ExperimentConfig, name: str, n: float, e: Exception) -> List[EquivalenceRow]:
    msg = " ".join(str(e).split()) or type(e).__name__
    nan = math.nan
    p_list = ("inf",) if cfg.kind in ("banach_suite", "wiener_scan") else cfg.p
    return [EquivalenceRow(cfg.kind, name, p, float(n), nan, nan, nan, f"{ERROR_PREFIX}{msg}") for p in p_list]


def _guarded(cfg: ExperimentConfig, name: str, n: float, fn: Callable[[], List[EquivalenceRow]]) -> List[EquivalenceRow]:
    try:
        return fn()
    except Exception as e:
        log.error("%s %s n=%g failed: %s", cfg.kind, name, n, e)
        return _error_rows(cfg, name, n, e)


def run_experiment(cfg: ExperimentConfig, *, max_workers: Optional[int] = None) -> List[EquivalenceRow]:
    """All rows of one experiment, sorted by (experiment, function, p, param)."""
    try:
        shared = PREPARE[cfg.kind](cfg) if cfg.kind in PREPARE else {}
    except ValueError as e:
        raise ConfigError(f"{cfg.kind}: {e}") from e
    run = _Run(cfg, shared)
    workers = max_workers or worker_count()

    jobs: List[Tuple[str, float, Callable[[], List[EquivalenceRow]]]] = []
    rows: List[EquivalenceRow] = []
    if cfg.kind == "wiener_scan":
        r_max = int(cfg.params.get("r_max", 6))
        for r in range(1, r_max + 1):
            jobs.append(("psi_r", r, lambda r=r: _wiener_scan(run, r)))
    else:
        kind_fn = KINDS[cfg.kind]
        for name in cfg.corpus:
            try:
                f = corpus_generate(name, cfg.N, seed=cfg.seed, d=cfg.d)
            except ValueError as e:
                log.error("corpus %s at N=%d: %s", name, cfg.N, e)
                for n in cfg.grid:
                    rows += _error_rows(cfg, name, n, e)
                continue
            for n in cfg.grid:
                jobs.append((name, n, lambda name=name, f=f, n=n: kind_fn(run, name, f, n)))

    log.info("%s: %d tasks on %d threads (N=%d)", cfg.kind, len(jobs), workers, cfg.N)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_guarded, cfg, name, n, fn) for name, n, fn in jobs]
        for fut in futures:
            rows += fut.result()
    rows.sort(key=EquivalenceRow.sort_key)
    return rows


# ---------------------------------------------------------------------------
# analysis of emitted rows

Group = Tuple[str, str, str]


@dataclass(frozen=True)
class RatioBand:
    low: float
    high: float
    count: int
    excluded: int

    @property
    def spread(self) -> float:
        return self.high / self.low if self.low > 0 else math.inf


def band_summary(rows: Sequence[EquivalenceRow]) -> Dict[Group, RatioBand]:
    """Ratio band per (experiment, function, p) over unflagged rows."""
    ratios: Dict[Group, List[float]] = {}
    excluded: Dict[Group, int] = {}
    for row in rows:
        key = (row.experiment, row.function, row.p)
        ratios.setdefault(key, [])
        excluded.setdefault(key, 0)
        if row.flag == FLAG_EXCLUDED:
            excluded[key] += 1
        elif not row.flag and math.isfinite(row.ratio):
            ratios[key].append(row.ratio)
    out: Dict[Group, RatioBand] = {}
    for key in sorted(ratios):
        vals = ratios[key]
        if vals:
            out[key] = RatioBand(min(vals), max(vals), len(vals), excluded[key])
        else:
            out[key] = RatioBand(math.nan, math.nan, 0, excluded[key])
    return out


@dataclass(frozen=True)
class RefinementResult:
    group: Group
    coarse: RatioBand
    fine: RatioBand
    change: float
    stable: bool


def refinement_check(coarse: Sequence[EquivalenceRow], fine: Sequence[EquivalenceRow], *, tol: float = 0.1) -> List[RefinementResult]:
    """Band change per group when N doubles; stable if it shrinks or moves < tol."""
    a, b = band_summary(coarse), band_summary(fine)
    out = []
    for key in sorted(set(a) & set(b)):
        ca, fb = a[key], b[key]
        if ca.count == 0 or fb.count == 0:
            continue
        change = max(abs(fb.high / ca.high - 1.0), abs(fb.low / ca.low - 1.0)) if ca.low > 0 else math.inf
        stable = change < tol or fb.spread <= ca.spread
        if not stable:
            log.warning("ratio band of %s moved by %.1f%% under refinement", "/".join(key), 100.0 * change)
        out.append(RefinementResult(key, ca, fb, change, stable))
    return out


def loglog_slope(params: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(params)."""
    pairs = [(float(x), float(y)) for x, y in zip(params, values) if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)]
    if len({x for x, _ in pairs}) < 2:
        raise ValueError("slope fit needs at least two distinct positive points")
    xs, ys = np.log([x for x, _ in pairs]), np.log([y for _, y in pairs])
    return float(np.polyfit(xs, ys, 1)[0])


def slope_summary(rows: Sequence[EquivalenceRow]) -> Dict[Group, Tuple[float, float]]:
    """(lhs slope, rhs slope) against the grid parameter per group."""
    groups: Dict[Group, List[EquivalenceRow]] = {}
    for row in rows:
        if not row.flag:
            groups.setdefault((row.experiment, row.function, row.p), []).append(row)
    out: Dict[Group, Tuple[float, float]] = {}
    for key in sorted(groups):
        g = groups[key]
        try:
            out[key] = (loglog_slope([r.param for r in g], [r.lhs for r in g]), loglog_slope([r.param for r in g], [r.rhs for r in g]))
        except ValueError:
            continue
    return out
