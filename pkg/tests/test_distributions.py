import io
import math

import numpy as np
import pytest
from scipy import stats

from quasimarkov.distributions import (
    CATALOGUE,
    GeneratorSpec,
    InputError,
    make_distribution,
    named_sequence,
    read_csv,
    rng_for,
)

CASES = [
    ("uniform01", {}, stats.uniform()),
    ("exponential", {"rate": 2.0}, stats.expon(scale=0.5)),
    ("normal", {"mu": 1.0, "sigma": 2.0}, stats.norm(1, 2)),
    ("cauchy", {"x0": 0.0, "gamma": 1.0}, stats.cauchy()),
    ("geometric", {"p": 0.3}, stats.geom(0.3)),
]


@pytest.mark.parametrize("name,params,ref", CASES)
def test_cdf_matches_reference(name, params, ref):
    d = make_distribution(name, params)
    t = np.linspace(-3, 8, 57)
    assert np.allclose(d.cdf(t), ref.cdf(t), atol=1e-12)


def test_catalogue_complete():
    assert set(CATALOGUE) >= {"constant", "bernoulli", "uniform01", "geometric", "exponential", "normal",
                              "cauchy", "finite"}


def test_means():
    assert make_distribution("exponential", {"rate": 4.0}).mean == 0.25
    assert math.isnan(make_distribution("cauchy").mean)
    assert make_distribution("finite", {"probs": [0.25, 0.75]}).mean == 0.75


def test_bad_parameters():
    with pytest.raises(InputError):
        make_distribution("bernoulli", {"p": 2})
    with pytest.raises(InputError):
        make_distribution("nope")


def test_left_limits_at_atoms():
    d = make_distribution("bernoulli", {"p": 0.25})
    assert d.cdf_left(0.0) == 0.0 and d.cdf(0.0) == 0.75
    assert list(d.atoms_between(-1, 2)) == [0.0, 1.0]
    assert make_distribution("uniform01").atoms_between(0, 1).size == 0


def test_rng_streams_reproducible_and_distinct():
    a = rng_for(7, 3).random(5)
    assert np.array_equal(a, rng_for(7, 3).random(5))
    assert not np.array_equal(a, rng_for(7, 4).random(5))
    assert isinstance(rng_for(0).bit_generator, np.random.Philox)


def test_named_sequences():
    x = named_sequence("escaping", 10).values.tolist()
    assert x == [2, 3, 1, 5, 1, 1, 1, 9, 1, 1]
    assert named_sequence("dyadic_oscillation", 8).values.tolist() == [0, 1, 0, 0, 1, 1, 1, 1]
    assert named_sequence("neg_harmonic", 3).values.tolist() == [-1.0, -0.5, -1 / 3]


def test_generator_spec():
    spec = GeneratorSpec.from_json('{"dist": "uniform01", "seed": 7, "n": 10}')
    a, b = spec.generate(), spec.generate()
    assert np.array_equal(a.values, b.values) and len(a) == 10
    with pytest.raises(InputError, match="line 1"):
        GeneratorSpec.from_json('{"dist": ')
    with pytest.raises(InputError):
        GeneratorSpec.from_json('{"dist": "uniform01", "n": 0}')


def test_read_csv():
    x = read_csv(io.StringIO("# header\n1\n2\n\n3\n"), "nat")
    assert x.values.tolist() == [1, 2, 3]
    with pytest.raises(InputError, match="line 3"):
        read_csv(io.StringIO("1\n2\nabc\n"), "nat")
    with pytest.raises(InputError, match="line 1"):
        read_csv(io.StringIO("0\n"), "nat")
    with pytest.raises(InputError, match="line 2"):
        read_csv(io.StringIO("0\n5\n"), "finite", alphabet_size=2)
