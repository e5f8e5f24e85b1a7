import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triq.ftype import (
    FTypeSample,
    check_f_type,
    min_of_linear,
    min_ratio,
    random_min_of_linear,
    ratio_property,
)
from triq.state import make_rng


def identity(x):
    return float(x[0])


def minimum(x):
    return float(np.min(x))


def geometric(x):
    return math.sqrt(x[0] * x[1])


def square(x):
    return float(x[0]) ** 2


LINEAR = min_of_linear([[0.3, 1.2]])
ACCEPTED = [(identity, 1), (minimum, 2), (LINEAR, 2), (geometric, 2)]


def pairs(rng, dim, n=1000):
    return [(rng.uniform(0, 1, dim), rng.uniform(0.01, 1, dim)) for _ in range(n)]


@pytest.mark.parametrize("f,dim", ACCEPTED)
def test_accepts_f_type(f, dim):
    assert check_f_type(f, FTypeSample.uniform(make_rng(80), dim)).ok


def test_rejects_square_with_witness():
    res = check_f_type(square, FTypeSample.uniform(make_rng(81), 1))
    assert not res.ok
    assert res.failed == "concave"
    x, y, p = res.witness
    assert square(p * x + (1 - p) * y) < p * square(x) + (1 - p) * square(y)


@pytest.mark.parametrize(
    "f,failed",
    [(lambda x: 1.0 + float(x[0]), "f(0) = 0"), (lambda x: -float(x[0]), "monotone")],
)
def test_other_failures(f, failed):
    res = check_f_type(f, FTypeSample.uniform(make_rng(82), 1))
    assert res.failed == failed


def test_sample_must_be_nonnegative():
    with pytest.raises(ValueError):
        FTypeSample([[-0.1, 0.2]])


@pytest.mark.parametrize("f,dim", ACCEPTED)
def test_ratio_property(f, dim):
    rep = ratio_property(f, pairs(make_rng(83), dim))
    assert rep.ok, rep.witness
    assert rep.pairs == 1000


def test_minimum_example():
    assert minimum([0.5, 0.9]) / minimum([1, 1]) >= min_ratio([0.5, 0.9], [1, 1])


def test_ratio_property_catches_non_f_type():
    rep = ratio_property(square, pairs(make_rng(84), 1))
    assert rep.failures > 0 and rep.witness is not None


def test_min_of_linear_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        min_of_linear([[1.0, 0.0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 4))
def test_random_minima_of_linear_forms(seed, dim, forms):
    rng = make_rng(seed)
    f = random_min_of_linear(rng, dim, forms)
    assert check_f_type(f, FTypeSample.uniform(rng, dim, count=30)).ok
    assert ratio_property(f, pairs(rng, dim, 30)).ok
