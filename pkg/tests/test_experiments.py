import math

import pytest

from smoothlab.config import load_config, parse_config
from smoothlab.errors import ConfigError
from smoothlab.experiments import (
    FLAG_EXCLUDED,
    FLAG_UNCONVERGED,
    FLAG_VIOLATION,
    EquivalenceRow,
    band_summary,
    bound_flag,
    loglog_slope,
    make_row,
    refinement_check,
    run_experiment,
    slope_summary,
    strict_bound_flag,
    worker_count,
)


def run(doc, **kwargs):
    return run_experiment(parse_config(doc), max_workers=kwargs.get("max_workers", 2))


def test_make_row_guards_the_ratio():
    assert make_row("e", "f", "2", 8, 1.0, 2.0).ratio == 0.5
    zero = make_row("e", "f", "2", 8, 0.0, 0.0)
    assert zero.flag == FLAG_EXCLUDED
    assert math.isnan(zero.ratio)
    blown = make_row("e", "f", "2", 8, 1.0, 0.0)
    assert blown.ratio == math.inf
    assert blown.flag == FLAG_VIOLATION
    assert blown.failing
    assert make_row("e", "f", "2", 8, 1.0, 0.0, FLAG_UNCONVERGED).flag == FLAG_UNCONVERGED
    assert make_row("e", "f", "2", 8, 1e-10, 0.0).flag == FLAG_EXCLUDED
    assert make_row("e", "f", "2", 8, 0.0, 0.0, FLAG_VIOLATION).flag == FLAG_VIOLATION


def test_bound_flag_slack():
    assert bound_flag(1.0, 1.0) == ""
    assert bound_flag(1.0005, 1.0) == ""
    assert bound_flag(1.01, 1.0) == FLAG_VIOLATION


def test_failing_flags():
    row = make_row("e", "f", "2", 8, 1.0, 1.0)
    assert not row.failing
    for flag in (FLAG_VIOLATION, FLAG_UNCONVERGED, "error:boom"):
        assert EquivalenceRow(**{**row.as_dict(), "flag": flag}).failing
    assert not EquivalenceRow(**{**row.as_dict(), "flag": FLAG_EXCLUDED}).failing


def test_sort_key_orders_exponents_numerically():
    rows = [make_row("e", "f", p, n, 1.0, 1.0) for p in ("inf", "2", "1") for n in (16, 8)]
    ordered = sorted(rows, key=EquivalenceRow.sort_key)
    assert [(r.p, r.param) for r in ordered] == [("1", 8), ("1", 16), ("2", 8), ("2", 16), ("inf", 8), ("inf", 16)]


def test_worker_count_from_env(monkeypatch):
    monkeypatch.setenv("SMOOTHLAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SMOOTHLAB_THREADS", "zero")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.delenv("SMOOTHLAB_THREADS")
    assert worker_count() >= 1


def test_linearized_modulus_never_exceeds_the_classical_one():
    rows = run({"kind": "equiv_2_2", "corpus": ["abs_sin", "random_trig(4)"], "N": 64, "p": [1, 2, "inf"], "grid": [4, 8]})
    assert len(rows) == 2 * 3 * 2
    assert not any(r.failing for r in rows)
    assert all(r.ratio >= 1 - 1e-3 for r in rows)


def test_constant_function_rows_are_excluded():
    rows = run({"kind": "equiv_2_3", "corpus": ["constant"], "N": 64, "p": [2, "inf"], "grid": [4, 8]})
    assert len(rows) == 4
    assert all(r.flag == FLAG_EXCLUDED for r in rows)


def test_rows_do_not_depend_on_thread_count():
    doc = {"kind": "equiv_2_3", "corpus": ["abs_sin", "sawtooth"], "N": 64, "p": [2], "grid": [4, 8, 16]}
    assert run(doc, max_workers=1) == run(doc, max_workers=4)


def test_generation_failures_become_error_rows():
    rows = run({"kind": "equiv_2_3", "corpus": ["random_trig(40)", "abs_sin"], "N": 64, "p": [2], "grid": [4, 8]})
    errors = [r for r in rows if r.function == "random_trig(40)"]
    assert len(errors) == 2
    assert all(r.flag.startswith("error:") and r.failing for r in errors)
    assert all(not r.flag for r in rows if r.function == "abs_sin")


def test_k_functional_rows_stay_in_band():
    rows = run(
        {
            "kind": "kfunc_lemma",
            "corpus": ["abs_sin", "random_trig(8)"],
            "N": 64,
            "p": [2, "inf"],
            "grid": [4, 8],
            "params": {"method": {"kind": "fejer"}, "operator": {"kind": "radial_power", "order": 1}},
        }
    )
    groups = {r.experiment for r in rows}
    assert groups == {"kfunc_lemma/alpha", "kfunc_lemma/beta", "kfunc_lemma/gamma", "kfunc_lemma/k_vs_error"}
    assert not any(r.failing for r in rows)
    beta = [r for r in rows if r.experiment == "kfunc_lemma/beta" and r.p == "2"]
    assert all(r.ratio <= 1 + 1e-12 for r in beta)


def test_vanishing_error_with_a_nonzero_smooth_part_fails():
    rows = run(
        {
            "kind": "kfunc_lemma",
            "corpus": ["random_trig(8)"],
            "N": 64,
            "p": [2],
            "grid": [4],
            "params": {"method": {"kind": "identity"}, "operator": {"kind": "radial_power", "order": 1}},
        }
    )
    gamma = next(r for r in rows if r.experiment == "kfunc_lemma/gamma")
    assert gamma.ratio == math.inf
    assert gamma.failing


def test_linearized_bound_uses_absolute_slack():
    rows = run({"kind": "equiv_2_2", "corpus": ["random_trig(4)"], "N": 64, "p": [2], "grid": [4]})
    assert all(r.lhs >= r.rhs - 1e-9 for r in rows)
    assert strict_bound_flag(1.0 + 1e-6, 1.0) == FLAG_VIOLATION
    assert bound_flag(1.0 + 1e-6, 1.0) == ""
    assert strict_bound_flag(1.0 + 1e-10, 1.0) == ""


def test_bundled_wiener_scan_is_clean():
    rows = run_experiment(load_config("wiener_scan"), max_workers=2)
    assert rows
    assert not any(r.failing for r in rows), [r for r in rows if r.failing]


def test_bad_operator_is_a_config_error():
    with pytest.raises(ConfigError):
        run({"kind": "kfunc_lemma", "corpus": ["abs_sin"], "N": 64, "grid": [4], "params": {"operator": {"kind": "curl"}}})


def test_banach_suite_on_a_trigonometric_polynomial():
    rows = run({"kind": "banach_suite", "corpus": ["random_trig(4)"], "N": 32, "grid": [4, 8], "params": {"samples": 256}})
    relations = {r.experiment.split("/")[1] for r in rows}
    assert relations == {
        "scaling",
        "lambda_scaling",
        "ratio_comparison",
        "marchaud",
        "chain",
        "product",
        "steklov_deviation",
        "steklov_seminorm",
    }
    assert all(r.p == "inf" for r in rows)
    assert not any(r.failing for r in rows)


def test_wiener_scan_rows():
    rows = run({"kind": "wiener_scan", "params": {"r_max": 2, "thetas": [0.5], "alphas": [1.0], "window": 64}})
    names = sorted({r.experiment for r in rows})
    assert names == [
        "wiener_scan/fejer_hat",
        "wiener_scan/kernel_infinity",
        "wiener_scan/near_zero",
        "wiener_scan/psi_min",
        "wiener_scan/step_ratio_b",
        "wiener_scan/step_ratio_zero",
    ]
    assert len(rows) == 11
    assert not any(row.flag for row in rows), [row for row in rows if row.flag]
    hat = next(r for r in rows if r.experiment == "wiener_scan/fejer_hat")
    assert hat.param == 64
    assert hat.lhs == pytest.approx(1.0, abs=1e-2)


def test_bernstein_type_rows_are_computed():
    rows = run({"kind": "equiv_2_7", "corpus": ["abs_sin"], "N": 64, "p": [2], "grid": [2, 4]})
    assert len(rows) == 2
    assert not any(r.flag.startswith("error:") for r in rows)
    assert all(r.lhs > 0 and r.rhs > 0 for r in rows)


def _rows(ratios, experiment="e"):
    return [make_row(experiment, "f", "2", n, ratio * n**-1.0, n**-1.0) for n, ratio in zip((4, 8, 16), ratios)]


def test_band_summary():
    rows = _rows([1.0, 2.0, 1.5]) + [make_row("e", "f", "2", 32, 0.0, 0.0)]
    band = band_summary(rows)[("e", "f", "2")]
    assert (band.low, band.high, band.count, band.excluded) == (pytest.approx(1.0), pytest.approx(2.0), 3, 1)
    assert band.spread == pytest.approx(2.0)


def test_refinement_check():
    coarse = _rows([1.0, 2.0, 1.5])
    assert refinement_check(coarse, coarse)[0].stable
    moved = refinement_check(coarse, _rows([3.0, 6.0, 4.5]))[0]
    assert moved.change == pytest.approx(2.0)
    assert not moved.stable


def test_loglog_slope():
    assert loglog_slope([1, 2, 4], [1, 4, 16]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        loglog_slope([2, 2], [1, 3])
    lhs, rhs = slope_summary(_rows([1.0, 1.0, 1.0]))[("e", "f", "2")]
    assert lhs == pytest.approx(-1.0)
    assert rhs == pytest.approx(-1.0)


def test_linearized_ratio_band_is_stable_under_refinement():
    doc = {"kind": "equiv_2_2", "corpus": ["abs_sin", "weierstrass(0.5)", "random_trig(6)"], "p": [2, "inf"], "grid": [4, 8]}
    coarse = run({**doc, "N": 128})
    fine = run({**doc, "N": 256})
    results = refinement_check(coarse, fine)
    assert len(results) == 6
    assert sum(r.stable for r in results) >= 2 * len(results) / 3
