from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from quasimarkov.cumulants import (
    EnumerationTooLarge,
    cumulants_from_moments,
    moments_from_cumulants,
    raw_moments,
    sixth_moment_oracle,
    unit_interval_cumulant_bounds,
    universal_sixth_moment_constant,
)
from quasimarkov.verify import exact_sixth_moment

HALF = F(1, 2)

laws = st.lists(st.tuples(st.integers(-3, 3), st.integers(1, 4)), min_size=1, max_size=3,
                unique_by=lambda t: t[0]).map(lambda items: {F(v): F(w, sum(q for _, q in items)) for v, w in items})
unit_laws = st.lists(st.tuples(st.integers(0, 6), st.integers(1, 4)), min_size=1, max_size=3,
                     unique_by=lambda t: t[0]).map(
    lambda items: {F(v, 6): F(w, sum(q for _, q in items)) for v, w in items})


def test_bernoulli_half_n1_m2():
    assert sixth_moment_oracle({0: HALF, 1: HALF}, 1, 2) == (HALF, HALF)


def test_degenerate_split_is_zero():
    assert sixth_moment_oracle({0: F(1, 3), 2: F(2, 3)}, 3, 3) == (0, 0)


def test_three_point_support():
    brute, formula = sixth_moment_oracle({0: F(1, 4), 1: HALF, 3: F(1, 4)}, 2, 3)
    assert brute == formula


def test_enumeration_guard():
    with pytest.raises(EnumerationTooLarge):
        sixth_moment_oracle({v: F(1, 10) for v in range(10)}, 4, 8)


@settings(max_examples=40, deadline=None)
@given(laws, st.data())
def test_oracle_agrees(law, data):
    m = data.draw(st.integers(1, 5))
    n = data.draw(st.integers(1, m))
    brute, formula = sixth_moment_oracle(law, n, m)
    assert brute == formula


@settings(max_examples=40, deadline=None)
@given(laws)
def test_moment_cumulant_round_trip(law):
    mu = raw_moments(law, 6)
    assert moments_from_cumulants(cumulants_from_moments(mu)) == mu


def test_cumulants_of_bernoulli():
    k = cumulants_from_moments(raw_moments({0: HALF, 1: HALF}, 4))
    assert k[1] == HALF and k[2] == F(1, 4) and k[3] == 0 and k[4] == F(-1, 8)


@settings(max_examples=60, deadline=None)
@given(unit_laws)
def test_unit_interval_bounds_hold(law):
    k = cumulants_from_moments(raw_moments(law, 6))
    for j, bound in unit_interval_cumulant_bounds().items():
        assert abs(k[j]) <= bound


@settings(max_examples=30, deadline=None)
@given(unit_laws, st.data())
def test_universal_constant_bounds_sixth_moment(law, data):
    m = data.draw(st.integers(1, 12))
    n = data.draw(st.integers(1, m))
    assert exact_sixth_moment(law, n, m) <= universal_sixth_moment_constant() * n**3 * m**6


def test_convolution_agrees_with_oracle():
    law = {F(0): F(1, 3), F(1, 2): F(1, 3), F(1): F(1, 3)}
    assert exact_sixth_moment(law, 2, 5) == sixth_moment_oracle(law, 2, 5)[0]


def test_constant_value():
    assert universal_sixth_moment_constant() == F(153, 32)
