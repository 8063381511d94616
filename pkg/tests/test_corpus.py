import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from smoothlab.corpus import (
    CATALOG,
    corpus_generate,
    corpus_spectrum,
    describe,
    dimension_of,
    parse_name,
    smoothness_of,
)
from smoothlab.experiments import loglog_slope
from smoothlab.moduli import classical_modulus
from smoothlab.spectral import GridFunction, lp_norm


def test_parse_name_fills_defaults():
    assert parse_name("weierstrass") == ("weierstrass", (0.5,))
    assert parse_name("weierstrass(0.25)") == ("weierstrass", (0.25,))
    assert parse_name("random_trig(16)") == ("random_trig", (16.0, 0))
    assert parse_name("const") == ("constant", ())


@pytest.mark.parametrize("name", ["bessel", "abs_sin(", "weierstrass(0.5,1,2)", "random_trig(a)", ""])
def test_parse_name_rejects(name):
    with pytest.raises(ValueError):
        parse_name(name)


def test_dimensions_and_smoothness():
    assert dimension_of("radial_2d") == 2
    assert dimension_of("abs_sin") == 1
    assert smoothness_of("weierstrass(0.3)") == pytest.approx(0.3)
    assert smoothness_of("tensor_2d(0.5,1.5)") == pytest.approx(0.5)
    assert smoothness_of("gaussian_smooth") is None


def test_every_real_entry_builds_a_real_function():
    for name, entry in CATALOG.items():
        if name == "harmonic":
            continue
        f = corpus_generate(name, 32)
        assert f.d == entry.d
        assert f.is_real(), name


def test_abs_sin_samples():
    f = corpus_generate("abs_sin", 256)
    exact = GridFunction.from_callable(lambda x: np.abs(np.sin(x)), 256)
    # band-limited surrogate of a function with kinks
    assert lp_norm(f - exact, 2) < 5e-3


def test_sawtooth_has_a_jump_at_zero():
    f = corpus_generate("sawtooth", 256).samples.real
    mid = 128
    assert f[mid] == pytest.approx(0.0, abs=1e-12)
    assert f[mid + 1] > 1.0
    assert f[mid - 1] < -1.0


def test_weierstrass_coefficients():
    S = corpus_spectrum("weierstrass(1)", 64)
    assert S.coefficient(1) == pytest.approx(0.5)
    assert S.coefficient(4) == pytest.approx(0.5 * 2.0**-2)
    assert S.coefficient(3) == 0
    assert S.coefficient(16) == pytest.approx(0.5 * 2.0**-4)
    assert S.coefficient(32) == 0


@pytest.mark.parametrize("name", ["abs_sin", "weierstrass(0.5)", "sawtooth", "tensor_2d", "radial_2d"])
def test_surrogates_carry_no_nyquist_content(name):
    S = corpus_spectrum(name, 32)
    on_nyquist = np.any(S.wavenumbers() == -16, axis=-1)
    assert np.all(S.coefficients[on_nyquist] == 0)


def test_random_trig_seeds():
    a = corpus_generate("random_trig", 64, seed=1)
    b = corpus_generate("random_trig", 64, seed=1)
    c = corpus_generate("random_trig", 64, seed=2)
    assert_allclose(a.samples, b.samples)
    assert not np.allclose(a.samples, c.samples)
    # an explicit seed in the name wins
    assert_allclose(corpus_generate("random_trig(8,5)", 64, seed=1).samples, corpus_generate("random_trig(8,5)", 64).samples)
    with pytest.raises(ValueError):
        corpus_generate("random_trig(40)", 64)


def test_constant_follows_the_requested_dimension():
    f = corpus_generate("constant", 16, d=2)
    assert f.d == 2
    assert_allclose(f.samples, 1.0)
    assert corpus_generate("abs_sin", 16, d=2).d == 1


def test_harmonic_index_checked():
    f = corpus_generate("harmonic(2)", 16)
    assert lp_norm(f, "inf") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        corpus_generate("harmonic(8)", 16)


def test_describe_lists_every_entry():
    rows = describe()
    assert [name for name, _, _ in rows] == list(CATALOG)
    assert all(d in (1, 2) and desc for _, d, desc in rows)


def test_radial_2d_is_radial():
    f = corpus_generate("radial_2d", 32).samples.real
    assert_allclose(f, f.T, atol=1e-12)
    assert math.isfinite(lp_norm(corpus_generate("radial_2d", 32), 2))


def _log_slope(name):
    f = corpus_generate(name, 1024)
    hs = [2.0**-k for k in range(2, 6)]
    return loglog_slope(hs, [classical_modulus(f, 1, None, h, "inf") for h in hs])


def test_weierstrass_moduli_follow_the_exponent():
    # dyadic truncation at N/2 bends the smallest steps, hence the loose tolerance
    assert _log_slope("weierstrass(0.5)") == pytest.approx(0.5, abs=0.2)
    assert _log_slope("weierstrass(0.3)") < _log_slope("weierstrass(0.7)")
