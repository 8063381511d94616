import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from smoothlab import summation
from smoothlab.errors import DescriptorError
from smoothlab.summation import (
    MultiplierDescriptor,
    approximate,
    degree,
    dirichlet_kernel_coefficients,
    dirichlet_power_multiplier,
    evaluate,
    find_unit_roots,
    from_dict,
    roots_in_step_variable,
)


def test_every_factory_equals_one_at_origin():
    methods = [
        summation.riesz(2.0, 1.0),
        summation.trigub_method(2),
        summation.trigub_method(3),
        summation.fractional(0.5),
        summation.bochner_riesz(1.0, 0.5, 2),
        summation.fejer(3),
        summation.marcinkiewicz_2d(4),
        summation.axis_riesz(1.0, 1.0),
        summation.identity(2),
    ]
    for phi in methods:
        assert evaluate(phi, np.zeros(phi.d)) == pytest.approx(1.0)


def test_riesz_support_and_value():
    phi = summation.riesz(2.0, 1.0)
    assert evaluate(phi, 0.5) == pytest.approx(0.75)
    assert evaluate(phi, 1.0) == 0
    assert evaluate(phi, -1.7) == 0


def test_odd_trigub_companion_is_odd_in_imaginary_part():
    phi = summation.trigub_method(1)
    a, b = evaluate(phi, 0.3), evaluate(phi, -0.3)
    assert a.real == pytest.approx(b.real)
    assert a.imag == pytest.approx(-b.imag)
    assert a.imag > 0


def test_marcinkiewicz_closed_form():
    n = 5
    phi = summation.marcinkiewicz_2d(n)
    k = np.stack(np.meshgrid(np.arange(-9, 10), np.arange(-9, 10), indexing="ij"), axis=-1)
    m = np.max(np.abs(k), axis=-1)
    assert_allclose(phi(k.astype(float)).real, np.clip(1.0 - m / (n + 1), 0.0, None), atol=1e-15)


@pytest.mark.parametrize(
    "build",
    [
        lambda: summation.riesz(0.0, 1.0),
        lambda: summation.trigub_even(3),
        lambda: summation.trigub_odd(2),
        lambda: summation.fractional(1.0),
        lambda: summation.marcinkiewicz_2d(2.5),
        lambda: MultiplierDescriptor("marcinkiewicz_2d", {"n": 3}, 1),
        lambda: MultiplierDescriptor("riesz", {"alpha": 1.0}),
        lambda: MultiplierDescriptor("lanczos"),
        lambda: summation.custom([0.0, 1.0], [0.5, 0.0]),
        lambda: summation.custom([1.0, 0.0], [1.0, 0.0]),
    ],
)
def test_malformed_descriptors(build):
    with pytest.raises(DescriptorError):
        build()


def test_point_dimension_is_checked():
    with pytest.raises(DescriptorError):
        summation.fejer(2)(np.zeros((4, 1)))
    with pytest.raises(DescriptorError):
        evaluate(summation.fejer(), [0.1, 0.2])


def test_from_dict():
    phi = from_dict({"kind": "riesz", "alpha": 2, "beta": 1, "d": 2})
    assert phi.d == 2
    assert phi.label == "riesz(alpha=2,beta=1)"
    with pytest.raises(DescriptorError):
        from_dict({"alpha": 2})
    assert from_dict({"kind": "dirichlet_power", "s": 6, "r": 2, "n": 4}).kind == "dirichlet_power"


def test_degree():
    assert degree(1 / 8) == 8
    assert degree(0.3) == 3
    with pytest.raises(ValueError):
        degree(0.0)


def test_dirichlet_kernel_coefficients():
    n = 4
    c = dirichlet_kernel_coefficients(2, n)
    assert len(c) == 4 * n + 1
    assert c[2 * n] == pytest.approx(1.0)
    assert c[0] == pytest.approx(1.0 / (2 * n + 1))
    assert_allclose(c, c[::-1])


def test_dirichlet_power_multiplier_checks():
    phi = dirichlet_power_multiplier(6, 2, 4)
    assert evaluate(phi, 0.0) == pytest.approx(1.0)
    assert evaluate(phi, 7.0) == 0
    with pytest.raises(ValueError):
        dirichlet_power_multiplier(6, 2, 8, resolution=64)
    with pytest.raises(ValueError):
        dirichlet_power_multiplier(1, 2, 4)


def test_unit_roots_are_stable_under_denser_scans():
    phi = dirichlet_power_multiplier(6, 2, 8)
    coarse = find_unit_roots(phi, points=10_000)
    fine = find_unit_roots(phi, points=20_000)
    assert coarse.count >= 1
    assert coarse.count == fine.count
    assert_allclose(coarse.locations, fine.locations, atol=1e-6)
    for x in coarse.locations:
        assert evaluate(phi, x).real == pytest.approx(1.0, abs=1e-8)


def test_roots_in_step_variable():
    s, n = 6, 8
    h_n = 2 * math.pi / ((2 * n + 1) * s)
    assert roots_in_step_variable([0.5, 1.0], s, n) == pytest.approx([0.5 * n * h_n, n * h_n])


def test_unit_roots_need_one_dimension():
    with pytest.raises(DescriptorError):
        find_unit_roots(summation.fejer(2))


def test_identity_method_has_no_error(trig_poly):
    g, err = approximate(trig_poly, summation.identity(), 0.1, "inf")
    assert err == pytest.approx(0.0, abs=1e-13)
    assert_allclose(g.samples, trig_poly.samples, atol=1e-13)


def test_fejer_error_decreases_with_eps(trig_poly):
    errs = [approximate(trig_poly, summation.fejer(), eps, 2)[1] for eps in (0.5, 0.25, 0.125)]
    assert errs[0] > errs[1] > errs[2] > 0
