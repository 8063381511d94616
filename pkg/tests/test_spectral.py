import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from smoothlab.corpus import corpus_generate
from smoothlab.errors import DescriptorError
from smoothlab.spectral import (
    GridFunction,
    LebesgueExponent,
    Spectrum,
    analyze,
    apply_multiplier,
    apply_symbol,
    check_resolution,
    conjugate_antiderivative,
    grid_points,
    lp_norm,
    refine,
    synthesize,
    translate,
)
from smoothlab.summation import fejer


def test_grid_starts_at_minus_pi():
    x = grid_points(16)[..., 0]
    assert x[0] == pytest.approx(-math.pi)
    assert_allclose(np.diff(x), 2 * math.pi / 16)


@pytest.mark.parametrize("N, d", [(12, 1), (4, 1), (16, 4), (16, 0)])
def test_check_resolution_rejects(N, d):
    with pytest.raises(ValueError):
        check_resolution(N, d)


def test_cosine_coefficients():
    f = GridFunction.from_callable(lambda x: np.cos(3 * x), 32)
    S = analyze(f)
    assert S.coefficient(3) == pytest.approx(0.5)
    assert S.coefficient(-3) == pytest.approx(0.5)
    assert abs(S.coefficient(0)) < 1e-14
    assert S.is_hermitian()


def test_synthesize_inverts_analyze(trig_poly):
    assert_allclose(synthesize(analyze(trig_poly)).samples, trig_poly.samples, atol=1e-13)


def test_nyquist_entry_stays_real_under_odd_symbols():
    N = 32
    f = GridFunction.from_callable(lambda x: np.cos(N // 2 * x) + np.sin(3 * x), N)
    deriv = synthesize(apply_symbol(analyze(f), lambda K: 1j * K[..., 0]))
    assert deriv.is_real()
    assert_allclose(deriv.samples.real, 3 * np.cos(3 * grid_points(N)[..., 0]), atol=1e-12)


def test_from_coefficients_folds_nyquist():
    S = Spectrum.from_coefficients(16, 1, lambda K: np.where(np.abs(K[..., 0]) == 8, 0.5, 0.0))
    assert S.coefficients[8] == pytest.approx(1.0)
    assert S.coefficient(8) == pytest.approx(0.5)
    assert S.coefficient(-8) == pytest.approx(0.5)


@pytest.mark.parametrize("p", [1, 2, 3.5, "inf"])
def test_constant_has_unit_norm(p):
    one = GridFunction(np.ones(32))
    assert lp_norm(one, p) == pytest.approx(1.0)


def test_cosine_norms(cosine):
    assert lp_norm(cosine, 2) == pytest.approx(1 / math.sqrt(2))
    assert lp_norm(cosine, "inf") == pytest.approx(1.0)
    assert lp_norm(cosine, 1) == pytest.approx(2 / math.pi, rel=2e-3)


def test_oversampled_sup_norm_is_not_smaller(trig_poly):
    assert lp_norm(trig_poly, "inf", oversample=4) >= lp_norm(trig_poly, "inf") - 1e-12


def test_refine_keeps_the_surrogate(trig_poly):
    fine = refine(trig_poly, 2)
    assert fine.N == 128
    assert_allclose(fine.samples[::2], trig_poly.samples, atol=1e-12)


def test_translate_by_grid_step_is_a_roll(trig_poly):
    shifted = translate(trig_poly, 2 * math.pi * 3 / trig_poly.N)
    assert_allclose(shifted.samples, np.roll(trig_poly.samples, -3), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0))
def test_translate_off_grid_matches_shifted_samples(t):
    fn = lambda x: np.sin(2 * x) + 0.3 * np.cos(5 * x)  # noqa: E731
    f = GridFunction.from_callable(fn, 32)
    expected = GridFunction.from_callable(lambda x: fn(x + t), 32)
    assert_allclose(translate(f, t).samples, expected.samples, atol=1e-12)


@pytest.mark.parametrize("t", [0.37, 1.9, -2.6])
def test_corpus_shifts_compose_and_keep_the_norm(t):
    f = corpus_generate("weierstrass(0.5)", 64)
    moved = translate(f, t)
    assert lp_norm(moved, 2) == pytest.approx(lp_norm(f, 2), abs=1e-10)
    assert_allclose(translate(moved, -t).samples, f.samples, atol=1e-12)


def test_nyquist_content_moves_as_its_cosine_part():
    f = GridFunction.from_callable(lambda x: np.cos(32 * x), 64)
    t = 0.05
    assert_allclose(translate(f, t).samples, math.cos(32 * t) * f.samples, atol=1e-12)


def test_fejer_multiplier_on_a_harmonic():
    f = GridFunction.from_callable(lambda x: np.cos(4 * x), 32)
    out = synthesize(apply_multiplier(analyze(f), fejer(), 0.125))
    assert_allclose(out.samples, 0.5 * f.samples, atol=1e-13)


def test_apply_multiplier_wraps_evaluation_failures(cosine):
    def broken(x):
        raise KeyError("no table")

    with pytest.raises(DescriptorError):
        apply_multiplier(analyze(cosine), broken, 0.1)
    with pytest.raises(ValueError):
        apply_multiplier(analyze(cosine), fejer(), 0.0)


def test_conjugate_antiderivative_of_cosine():
    f = GridFunction.from_callable(lambda x: np.cos(3 * x), 32)
    expected = GridFunction.from_callable(lambda x: -np.cos(3 * x) / 3, 32)
    assert_allclose(conjugate_antiderivative(f).samples, expected.samples, atol=1e-13)


def test_lebesgue_exponent_parsing():
    assert LebesgueExponent.parse("inf").is_infinite
    assert str(LebesgueExponent.parse("Infinity")) == "inf"
    assert str(LebesgueExponent.parse(2)) == "2"
    assert str(LebesgueExponent.parse("1.5")) == "1.5"
    with pytest.raises(ValueError):
        LebesgueExponent.parse(0.5)


def test_grid_function_validation():
    with pytest.raises(ValueError):
        GridFunction(np.ones((16, 8)))
    with pytest.raises(ValueError):
        GridFunction(np.full(16, np.nan))
    with pytest.raises(ValueError):
        GridFunction(np.ones(16)) + GridFunction(np.ones(32))


def test_corpus_function_energy_matches_norm():
    f = corpus_generate("abs_sin", 128)
    assert analyze(f).energy() == pytest.approx(lp_norm(f, 2) ** 2)
