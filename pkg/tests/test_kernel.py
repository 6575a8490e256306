import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from quasimarkov.kernel import (
    UNIT,
    FiniteSpace,
    PartialKernel,
    almost_surely_equal,
    chain_meet,
    check_positivity_instance,
    compose,
    domain_of,
    extends,
    is_copyable,
    is_domain_idempotent,
    kernel_from_json,
    kernel_to_json,
    meet_domains,
    parse_rational,
    partial_identity,
    state,
    structural,
    tensor,
)
from quasimarkov.laws import random_kernel, random_space

AB = FiniteSpace("AB", 2, ("a", "b"))
CD = FiniteSpace("CD", 2, ("c", "d"))
ABC = FiniteSpace("ABC", 3, ("a", "b", "c"))
HALF = F(1, 2)


def matrix_product(f, g):
    """Plain substochastic matrix product, kept to rows of mass 1."""
    A, B = f.to_matrix(), g.to_matrix()
    rows = {}
    for x, row in enumerate(A):
        out = [sum(row[y] * B[y][z] for y in range(len(B))) for z in range(len(B[0]))]
        if sum(out) == 1:
            rows[x] = tuple(out)
    return PartialKernel(f.source, g.target, rows)


seeds = st.integers(min_value=0, max_value=2**32)


def kernels(seed, source=None, target=None):
    rng = random.Random(seed)
    source = source or random_space(rng)
    target = target or random_space(rng)
    return random_kernel(rng, source, target), rng


# construction -------------------------------------------------------------------


def test_parse_rational_refuses_floats():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational(2) == 2
    with pytest.raises(TypeError):
        parse_rational(0.5)


def test_rows_must_be_probability_vectors():
    with pytest.raises(ValueError):
        PartialKernel(AB, AB, {0: (HALF, F(1, 3))})
    with pytest.raises(ValueError):
        PartialKernel(AB, AB, {0: (F(3, 2), F(-1, 2))})
    with pytest.raises(ValueError):
        PartialKernel(AB, AB, {5: (1, 0)})


def test_from_matrix_zero_rows_are_undefined():
    f = PartialKernel.from_matrix(AB, AB, [[0, 0], ["1/3", "2/3"]])
    assert f.domain == {1}
    with pytest.raises(ValueError):
        PartialKernel.from_matrix(AB, AB, [["1/2", 0], [0, 1]])


def test_space_mismatch_is_type_error():
    with pytest.raises(TypeError):
        compose(structural(AB, "identity"), structural(ABC, "identity"))


# compose ---------------------------------------------------------------------------


def test_identity_absorbs_partial_identity():
    f = partial_identity(AB, [0])
    assert compose(f, structural(AB, "identity")) == f


def test_composite_domain_requires_full_mass_in_next_domain():
    f = PartialKernel(AB, AB, {0: (HALF, HALF), 1: (0, 1)})
    g = PartialKernel(AB, AB, {1: (0, 1)})
    h = compose(f, g)
    assert h.domain == {1}
    assert h.rows[1] == (0, 1)


def test_total_composite_is_matrix_product():
    rng = random.Random(3)
    f = random_kernel(rng, ABC, AB, p_undefined=0)
    g = random_kernel(rng, AB, CD, p_undefined=0)
    h = compose(f, g)
    assert h.is_total
    assert h == matrix_product(f, g)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_compose_matches_matrix_oracle(seed):
    f, rng = kernels(seed)
    g = random_kernel(rng, f.target, random_space(rng))
    assert compose(f, g) == matrix_product(f, g)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_associativity_and_unit(seed):
    f, rng = kernels(seed)
    g = random_kernel(rng, f.target, random_space(rng))
    h = random_kernel(rng, g.target, random_space(rng))
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    assert compose(structural(f.source, "identity"), f) == f == compose(f, structural(f.target, "identity"))


# tensor and structure ---------------------------------------------------------------


def test_tensor_examples():
    ident = structural(AB, "identity")
    assert tensor(ident, ident) == structural(AB * AB, "identity")
    f, g = partial_identity(AB, [0]), partial_identity(CD, [0])
    assert tensor(f, g).domain == {0}  # (a, c)
    rng = random.Random(1)
    assert tensor(random_kernel(rng, AB, CD, 0), random_kernel(rng, CD, AB, 0)).is_total


def test_structural_examples():
    copy = structural(AB, "copy")
    assert copy.rows[0] == (1, 0, 0, 0)
    assert all(row == (1,) for row in structural(ABC, "delete").rows.values())
    swap = structural(AB * CD, "swap")
    back = structural(CD * AB, "swap")
    assert compose(swap, back) == structural(AB * CD, "identity")


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_comonoid_laws(seed):
    X = random_space(random.Random(seed))
    copy, delete, ident = (structural(X, w) for w in ("copy", "delete", "identity"))
    assoc_l = compose(copy, tensor(copy, ident))
    assoc_r = compose(copy, tensor(ident, copy))
    assert [r.index(1) for r in assoc_l.rows.values()] == [r.index(1) for r in assoc_r.rows.values()]
    assert compose(copy, structural(X * X, "swap")).rows == copy.rows
    counit = compose(copy, tensor(delete, ident))
    assert [r.index(1) for r in counit.rows.values()] == list(range(X.size))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_tensor_domain_is_product(seed):
    f, rng = kernels(seed)
    g = random_kernel(rng, random_space(rng), random_space(rng))
    expected = {a * g.source.size + b for a in f.domain for b in g.domain}
    assert tensor(f, g).domain == expected


# domains and order -------------------------------------------------------------------


def test_domain_examples():
    rng = random.Random(0)
    f = random_kernel(rng, AB, CD, p_undefined=0)
    assert domain_of(f) == structural(AB, "identity")
    g = PartialKernel(AB, CD, {0: (1, 0)})
    assert domain_of(g) == partial_identity(AB, [0])


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_domain_laws(seed):
    f, rng = kernels(seed)
    g = random_kernel(rng, f.target, random_space(rng))
    assert domain_of(compose(f, g)) == domain_of(compose(f, domain_of(g)))
    assert compose(domain_of(f), f) == f
    assert is_domain_idempotent(domain_of(f))


def test_extends_examples():
    f = PartialKernel(AB, CD, {0: (HALF, HALF)})
    assert extends(f, f)
    assert extends(structural(AB, "delete"), PartialKernel(AB, UNIT, {1: (1,)}))
    assert extends(structural(AB, "identity"), partial_identity(AB, [0]))
    assert not extends(partial_identity(AB, [0]), structural(AB, "identity"))


def test_meet_examples():
    assert meet_domains(partial_identity(ABC, [0, 1]), partial_identity(ABC, [1, 2])) == partial_identity(ABC, [1])
    total = structural(ABC, "identity")
    g = partial_identity(ABC, [2])
    assert meet_domains(total, g) == domain_of(g)
    assert meet_domains(g, g) == g


def test_chain_meet_examples():
    d = partial_identity(ABC, [0, 1])
    assert chain_meet([d]) == d
    chain = [partial_identity(ABC, s) for s in ([0, 1, 2], [0, 1], [0])]
    assert chain_meet(chain) == partial_identity(ABC, [0])
    with pytest.raises(ValueError):
        chain_meet(list(reversed(chain)))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_chain_meet_preserved_by_composition(seed):
    from quasimarkov.laws import random_descending_chain

    f, rng = kernels(seed)
    chain = random_descending_chain(rng, f, 3)
    h = random_kernel(rng, random_space(rng), f.source)
    assert compose(h, chain_meet(chain)) == chain_meet([compose(h, c) for c in chain])


# copyability and almost-sure equality ---------------------------------------------------


def test_copyable_examples():
    assert is_copyable(structural(AB, "identity"))
    assert not is_copyable(state(AB, (HALF, HALF)))
    assert is_copyable(PartialKernel(ABC, AB, {0: (1, 0), 2: (0, 1)}))


def test_almost_surely_equal_examples():
    f = PartialKernel(AB, CD, {0: (1, 0), 1: (1, 0)})
    g = PartialKernel(AB, CD, {0: (1, 0), 1: (0, 1)})
    assert almost_surely_equal(state(AB, (1, 0)), f, f)
    assert almost_surely_equal(state(AB, (1, 0)), f, g)
    assert not almost_surely_equal(state(AB, (HALF, HALF)), f, g)


def test_positivity_examples():
    f = PartialKernel(AB, CD, {0: (1, 0), 1: (0, 1)})
    g = PartialKernel(CD, AB, {0: (1, 0), 1: (0, 1)})
    assert check_positivity_instance(f, g)
    # a splitting: f stochastic on an enlarged space, g collapses it back
    X = FiniteSpace("X", 1)
    split = PartialKernel(X, AB, {0: (HALF, HALF)})
    collapse = PartialKernel(AB, X, {0: (1,), 1: (1,)})
    assert is_copyable(compose(split, collapse))
    assert check_positivity_instance(split, collapse)
    noisy = PartialKernel(AB, AB, {0: (HALF, HALF), 1: (HALF, HALF)})
    assert not is_copyable(compose(noisy, structural(AB, "identity")))
    assert check_positivity_instance(noisy, structural(AB, "identity"))


# JSON ----------------------------------------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_json_round_trip(seed):
    f, _ = kernels(seed)
    text = json.dumps(kernel_to_json(f))
    assert kernel_from_json(text) == f


def test_json_uses_element_names():
    f = PartialKernel(AB, CD, {1: (F(1, 3), F(2, 3))})
    assert kernel_to_json(f)["rows"] == {"b": ["1/3", "2/3"]}
