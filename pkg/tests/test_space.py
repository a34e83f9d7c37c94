import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from semipert import (
    INF,
    DimensionError,
    InvalidExponentError,
    MeasureSpace,
    ValidationError,
    dual_exponent,
    dual_pairing,
    lp_norm,
)
from semipert.space import format_exponent, parse_exponent


def test_pairing_examples():
    sp = MeasureSpace([2, 3])
    assert dual_pairing(sp.element([1, 2]), sp.element([4, 5])) == 38
    assert dual_pairing(sp.element([1, 2]), sp.element([0, 0])) == 0
    sp3 = MeasureSpace.uniform(3)
    assert dual_pairing(sp3.element([1, 0, 2]), sp3.element([0, 5, 1])) == 2


def test_pairing_dimension_mismatch():
    with pytest.raises(DimensionError):
        dual_pairing(MeasureSpace([1, 1]).element([1, 1]), MeasureSpace([1, 1, 1]).element([1, 1, 1]))


def test_norm_examples():
    sp = MeasureSpace([2, 3])
    assert lp_norm(sp.element([1, 1]), 1) == 5
    assert lp_norm(sp.element([3, -4]), INF) == 4
    assert lp_norm(MeasureSpace([1, 1]).element([3, 4]), 2) == pytest.approx(5, rel=1e-15)
    with pytest.raises(InvalidExponentError):
        lp_norm(sp.element([1, 1]), 0.5)


def test_norm_no_overflow():
    sp = MeasureSpace([1, 1])
    assert lp_norm(sp.element([1e200, 1e200]), 4) == pytest.approx(1e200 * 2**0.25)


def test_dual_exponent():
    assert dual_exponent(2) == 2
    assert dual_exponent(1) == INF
    assert dual_exponent(INF) == 1
    assert dual_exponent(4) == pytest.approx(4 / 3)


@given(st.floats(1.0, 1e6))
def test_dual_exponent_involution(p):
    assert dual_exponent(dual_exponent(p)) == pytest.approx(p, rel=1e-9)


@pytest.mark.parametrize("w", [[1, 0], [1, -2], [1, math.nan], [1, math.inf], [1e-301], []])
def test_bad_weights(w):
    with pytest.raises(ValidationError):
        MeasureSpace(w)


def test_element_validation():
    sp = MeasureSpace([1, 2])
    with pytest.raises(DimensionError):
        sp.element([1, 2, 3])
    with pytest.raises(ValidationError):
        sp.element([1, -1], nonneg=True)
    with pytest.raises(ValidationError):
        sp.element([1, math.nan])
    e = sp.element([1, 2])
    with pytest.raises(ValueError):
        e.values[0] = 5.0


def test_exponent_parsing():
    assert parse_exponent("inf") == INF
    assert parse_exponent(3) == 3.0
    assert format_exponent(INF) == "inf"
    with pytest.raises(InvalidExponentError):
        parse_exponent(0.2)


weights = arrays(np.float64, 4, elements=st.floats(0.1, 10))
vals = arrays(np.float64, 4, elements=st.floats(-10, 10))


@settings(max_examples=200, deadline=None)
@given(weights, vals, vals, st.sampled_from([1.0, 2.0, 4.0, INF]))
def test_holder(w, f, g, p):
    sp = MeasureSpace(w)
    lhs = abs(dual_pairing(sp.element(f), sp.element(g)))
    rhs = lp_norm(sp.element(f), p) * lp_norm(sp.element(g), dual_exponent(p))
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


@settings(max_examples=100, deadline=None)
@given(weights, vals, vals, vals, st.floats(-5, 5))
def test_pairing_bilinear(w, f1, f2, g, a):
    sp = MeasureSpace(w)
    lhs = dual_pairing(sp.element(a * f1 + f2), sp.element(g))
    rhs = a * dual_pairing(sp.element(f1), sp.element(g)) + dual_pairing(sp.element(f2), sp.element(g))
    assert lhs == pytest.approx(rhs, abs=1e-9)
    assert dual_pairing(sp.element(f1), sp.element(g)) == dual_pairing(sp.element(g), sp.element(f1))
