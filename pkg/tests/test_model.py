import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tailreg.errors import DegenerateObservation, DimensionMismatch, InputError, UnsupportedDesign
from tailreg.model import (
    EULER_GAMMA,
    GUMBEL_VARIANCE,
    TailSample,
    TailSide,
    add_intercept,
    expected_tail_index,
    tail_index,
    tail_subsample,
    transform_response,
)


def one_obs(y, w):
    return TailSample(np.array([y]), np.ones((1, 1)), w)


def test_constants():
    assert EULER_GAMMA == pytest.approx(0.5772156649015329, abs=1e-16)
    assert GUMBEL_VARIANCE == math.pi**2 / 6


@pytest.mark.parametrize(
    "y, w, expected",
    [
        (3.0 * math.e, 3.0, -0.5772156649015329),
        (0.2 * math.exp(math.e), 0.2, -1.5772156649015329),
        # -ln(ln 2) - gamma, evaluated with mpmath at 30 digits
        (2.0, 1.0, -0.21070274431986853),
    ],
)
def test_transform_response_examples(y, w, expected):
    assert transform_response(one_obs(y, w))[0] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("y", [1.0, 0.5])
def test_response_at_or_below_threshold_rejected(y):
    with pytest.raises(DegenerateObservation):
        one_obs(y, 1.0)


def test_tail_sample_invariants():
    with pytest.raises(InputError):
        TailSample(np.array([2.0, 3.0]), np.array([[1.0, 0.0], [2.0, 1.0]]), 1.0)
    with pytest.raises(InputError):
        TailSample(np.array([2.0, 3.0]), np.ones((2, 1)), 1.0, parent_size=1)
    with pytest.raises(DimensionMismatch):
        TailSample(np.array([2.0, 3.0]), np.ones((3, 1)), 1.0)


def test_tail_sample_is_immutable():
    s = TailSample(np.array([2.0, 3.0]), np.ones((2, 1)), 1.0)
    with pytest.raises(ValueError):
        s.responses[0] = 5.0


def test_tail_subsample_keeps_strict_exceedances_in_order():
    y = np.array([0.5, 3.0, 1.0, 2.0])
    X = add_intercept(np.arange(4.0))
    s = tail_subsample(y, X, 1.0, "left")
    np.testing.assert_array_equal(s.responses, [3.0, 2.0])
    np.testing.assert_array_equal(s.covariates[:, 1], [1.0, 3.0])
    assert s.parent_size == 4 and s.tail_side is TailSide.LEFT


ratios = st.floats(min_value=1.0 + 1e-6, max_value=1e6)


@given(ratios, ratios)
def test_transform_strictly_decreasing(r1, r2):
    if r1 == r2:
        return
    z = transform_response(TailSample(np.array([r1, r2]), np.ones((2, 1)), 1.0))
    assert (z[0] > z[1]) == (r1 < r2)


@given(ratios, st.floats(min_value=1e-3, max_value=1e3))
def test_transform_depends_only_on_ratio(r, c):
    a = transform_response(one_obs(r, 1.0))[0]
    b = transform_response(one_obs(r * c, c))[0]
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize(
    "beta, x, expected",
    [
        ((0.0, 0.0, 0.0), (1.0, 0.3, -2.0), 1.0),
        ((0.1, 1.0, 1.0), (1.0, 0.5, 0.0), 1.8221188003905089),
        ((0.1, 1.0, 1.0), (1.0, 1.0, 1.0), 8.1661699125676508),
    ],
)
def test_tail_index_examples(beta, x, expected):
    assert tail_index(beta, x) == pytest.approx(expected, rel=1e-12)


def test_tail_index_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        tail_index([0.1, 1.0], [1.0, 2.0, 3.0])


finite = st.floats(min_value=-3, max_value=3)


@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3))
def test_tail_index_positive_and_log_linear(beta, x1, x2):
    a = tail_index(beta, np.add(x1, x2))
    assert a > 0
    assert a == pytest.approx(tail_index(beta, x1) * tail_index(beta, x2), rel=1e-10)


def test_expected_tail_index():
    assert round(expected_tail_index((0.1, 1.0, 1.0)), 2) == 3.13
    assert round(expected_tail_index((0.1, 1.0, 0.64)), 2) == 2.33
    assert expected_tail_index((0.0, 0.0, 0.0)) == 1.0
    assert expected_tail_index((0.0, 1e-12, 0.0)) == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(UnsupportedDesign):
        expected_tail_index((0.1, 1.0))


def test_expected_tail_index_against_quadrature():
    from scipy import integrate, stats

    b1, b2, b3 = 0.1, 1.0, 0.64
    e_u = integrate.quad(lambda u: math.exp(b2 * u), 0, 1)[0]
    e_n = integrate.quad(lambda x: math.exp(b3 * x) * stats.norm.pdf(x), -12, 12)[0]
    assert expected_tail_index((b1, b2, b3)) == pytest.approx(math.exp(b1) * e_u * e_n, rel=1e-10)
