import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasimarkov.distributions import make_distribution, named_sequence, rng_for
from quasimarkov.empirical import (
    IN_DOMAIN,
    INCONCLUSIVE,
    OUT_OF_DOMAIN,
    Cofinite,
    HorizonSchedule,
    Interval,
    PiecewiseFunction,
    SequencePrefix,
    classify,
    classify_countable,
    classify_finite,
    classify_real,
    classify_real_avg,
    empirical_cdf,
    empirical_expectation,
    empirical_measure,
    positive_part,
    relative_frequency,
)

N = 100_000


def sample(name, params=None, n=N, seed=0, kind=None):
    d = make_distribution(name, params)
    vals = d.sample(rng_for(seed), n)
    kind = kind or d.kind
    if kind == "finite":
        return SequencePrefix("finite", vals.astype(np.int64), d.alphabet_size or 2)
    return SequencePrefix(kind, vals)


def finite(values, k=2):
    return SequencePrefix("finite", np.asarray(values), k)


def real(values):
    return SequencePrefix("real", np.asarray(values, dtype=float))


# schedule ------------------------------------------------------------------------


def test_default_schedule():
    h = HorizonSchedule.default(N)
    assert h.checkpoints[0] == N // 8 and h.checkpoints[-1] == N
    assert len(h.checkpoints) == 9
    assert h.eps == pytest.approx(max(0.01, 4 / math.sqrt(N)))
    assert h.guard == h.checkpoints[4]


def test_schedule_validation():
    with pytest.raises(ValueError):
        HorizonSchedule((10,), 0.1)
    with pytest.raises(ValueError):
        HorizonSchedule((10, 5), 0.1)
    with pytest.raises(ValueError):
        HorizonSchedule((5, 10), 0.0)


# empirical CDF and frequencies --------------------------------------------------------


def test_empirical_cdf_examples():
    c = empirical_cdf(real([3.0] * 5), 5)
    assert c.cdf(2.999) == 0 and c.cdf(3.0) == 1
    c = empirical_cdf(real([1, 2]), 2)
    assert c.cdf(1) == 0.5 and c.cdf(2) == 1
    x = sample("normal", n=1000)
    assert empirical_cdf(x, 1000).cdf(x.values.max()) == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_cdf_validity(values):
    c = empirical_cdf(real(values), len(values))
    assert np.all(np.diff(c.cdf_values) > 0)
    assert c.cdf_values[-1] == 1.0
    assert c.cdf(min(values) - 1) == 0.0


def test_relative_frequency_examples():
    x = finite([0, 1] * 50)
    assert relative_frequency(x, {0, 1}, 100) == 1
    assert relative_frequency(x, {0}, 100) == 0.5
    assert relative_frequency(x, set(), 100) == 0
    nat = SequencePrefix("nat", np.arange(1, 11))
    assert relative_frequency(nat, Cofinite(frozenset({1, 2})), 10) == 0.8
    assert relative_frequency(real([0.1, 0.5, 0.9]), Interval(0.2, 1.0), 3) == pytest.approx(2 / 3)
    with pytest.raises(TypeError):
        relative_frequency(real([0.1]), {0.1}, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=60), st.sets(st.integers(1, 20), max_size=8))
def test_frequency_additive(values, T):
    x = SequencePrefix("nat", np.asarray(values))
    n = len(values)
    counts = sum(round(relative_frequency(x, {t}, n) * n) for t in T)
    assert counts == round(relative_frequency(x, T, n) * n)


# finite classifier ---------------------------------------------------------------------


def test_dyadic_oscillation_out_of_domain():
    v = classify_finite(named_sequence("dyadic_oscillation", N))
    assert v.status == OUT_OF_DOMAIN
    assert v.witness is not None


def test_fair_coin_in_domain():
    x = sample("finite", {"probs": [0.5, 0.5]})
    v = classify_finite(x, HorizonSchedule.default(N, 0.02))
    assert v.status == IN_DOMAIN
    mu = empirical_measure(x, v)
    assert abs(float(mu.pmf[0]) - 0.5) < 0.01


def test_constant_finite_sequence():
    x = finite([1] * 1000)
    v = classify_finite(x)
    assert v.in_domain
    assert dict(empirical_measure(x, v).pmf) == {1: F(1)}


def test_alternating_measure():
    x = named_sequence("alternating", 1000)
    v = classify_finite(x)
    assert dict(empirical_measure(x, v).pmf) == {0: F(1, 2), 1: F(1, 2)}


def test_measure_refused_out_of_domain():
    x = named_sequence("dyadic_oscillation", N)
    with pytest.raises(ValueError):
        empirical_measure(x, classify_finite(x))


# countable classifier ------------------------------------------------------------------


def test_naturals_fail_all_three_criteria():
    v = classify_countable(named_sequence("naturals", N))
    assert v.status == OUT_OF_DOMAIN
    assert not any(v.criteria[c]["passed"] for c in ("uniform_limits", "tightness", "normalization"))


def test_escaping_sequence_in_countable_domain():
    x = named_sequence("escaping", N)
    v = classify_countable(x)
    assert v.status == IN_DOMAIN
    mu = empirical_measure(x, v)
    assert mu.pmf[1] > 0.999
    assert mu.is_point_mass(1.0, tol=1e-3)


def test_geometric_in_domain():
    x = sample("geometric", {"p": 0.3})
    v = classify_countable(x)
    assert v.status == IN_DOMAIN
    mu = empirical_measure(x, v)
    assert abs(mu.pmf[1] - 0.3) < 0.01
    assert mu.tail_mass <= v.schedule.eps


def test_constant_nat():
    x = SequencePrefix("nat", np.full(1000, 4))
    v = classify_countable(x)
    assert v.in_domain and empirical_measure(x, v).is_point_mass(4.0)


def test_criteria_agree_when_conclusive():
    for x in (named_sequence("naturals", N), named_sequence("escaping", N), sample("geometric", {"p": 0.5})):
        v = classify_countable(x)
        if v.status != INCONCLUSIVE:
            flags = {v.criteria[c]["passed"] for c in ("uniform_limits", "tightness", "normalization")}
            assert len(flags) == 1


def test_countable_and_real_embedding_agree():
    for x in (named_sequence("naturals", N), sample("geometric", {"p": 0.5})):
        a, b = classify_countable(x), classify_real(x.as_real(), HorizonSchedule.default(N))
        assert a.status == b.status


# real classifiers ------------------------------------------------------------------------


def test_harmonic_out_of_domain():
    v = classify_real(named_sequence("harmonic", N), HorizonSchedule.default(N, 0.01))
    assert v.status == OUT_OF_DOMAIN


def test_neg_harmonic_cdf_jumps_at_every_horizon():
    # F_n(-1/n) = 1 for every n while the pointwise limit at any t < 0 is 0
    x = named_sequence("neg_harmonic", 1000)
    for n in (10, 100, 1000):
        assert empirical_cdf(x, n).cdf(-1 / n) == 1.0
        assert empirical_cdf(x, n).cdf(-1 / n - 1e-9) == pytest.approx(1 - 1 / n)


def test_uniform_in_domain():
    x = sample("uniform01")
    v = classify_real(x)
    assert v.status == IN_DOMAIN
    assert abs(empirical_measure(x, v).cdf(0.5) - 0.5) < 0.01


def test_escaping_averages_out_of_domain():
    x = named_sequence("escaping", N).as_real()
    v = classify_real_avg(x, HorizonSchedule.default(N, 0.01))
    assert v.status == OUT_OF_DOMAIN
    avgs = v.criteria["absolute_average"]["averages"]
    assert max(avgs) - min(avgs) > 0.5


def test_exponential_average():
    x = sample("exponential", {"rate": 1.0})
    v = classify_real_avg(x, HorizonSchedule.default(N, 0.03))
    assert v.status == IN_DOMAIN
    assert abs(v.criteria["mean"] - 1) < 0.01


def test_constant_average():
    v = classify_real_avg(real([2.5] * 1000))
    assert v.in_domain and v.criteria["mean"] == 2.5


def test_cauchy_average_not_certified():
    v = classify_real_avg(sample("cauchy"))
    assert v.status != IN_DOMAIN


def test_averaged_domain_within_plain_domain():
    for x in (sample("exponential"), sample("uniform01", seed=3), real([1.0] * 100)):
        if classify_real_avg(x).in_domain:
            assert classify_real(x).in_domain


def test_dispatch():
    assert classify(named_sequence("alternating", 100)).kind == "finite"
    assert classify(named_sequence("escaping", 1000)).kind == "nat"
    assert classify(named_sequence("escaping", 1000), averaged=True).kind == "real-avg"


# permutation invariance --------------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["uniform01", "geometric", "fair"]))
def test_verdict_invariant_under_prefix_permutation(seed, which):
    if which == "fair":
        x = sample("finite", {"probs": [0.5, 0.5]}, n=8000, seed=seed)
    else:
        x = sample(which, {"p": 0.4} if which == "geometric" else None, n=8000, seed=seed)
    order = np.random.default_rng(seed).permutation(1000)
    y = x.permuted_prefix(order)
    a, b = classify(x), classify(y)
    assert a.to_json() == b.to_json()
    if a.in_domain:
        assert empirical_measure(x, a).to_json() == empirical_measure(y, b).to_json()


# expectations ---------------------------------------------------------------------------------


def test_expectation_examples():
    x = sample("normal", n=5000)
    integral, average = empirical_expectation(x, PiecewiseFunction.indicator_le(0.3), 5000)
    f_n = float(empirical_cdf(x, 5000).cdf(0.3))
    assert integral == pytest.approx(f_n) and average == pytest.approx(f_n)
    assert empirical_expectation(x, PiecewiseFunction.constant(1.0), 5000) == (1.0, 1.0)
    u = sample("uniform01", n=10_000)
    integral, average = empirical_expectation(u, PiecewiseFunction.clamp(), 10_000)
    assert abs(integral - 0.5) < 5 / math.sqrt(10_000)
    assert integral == pytest.approx(average)


def test_unbounded_function_rejected():
    with pytest.raises(ValueError):
        PiecewiseFunction((), (lambda y: y,))
    with pytest.raises(TypeError):
        empirical_expectation(real([1.0]), lambda y: y, 1)


def test_positive_part_examples():
    z = positive_part(real([-1.0, -2.0, -0.5]))
    assert np.all(z.values == 0)
    nh = named_sequence("neg_harmonic", 1000)
    p = positive_part(nh)
    v = classify_real(p)
    assert v.in_domain and empirical_measure(p, v).is_point_mass(0.0)
