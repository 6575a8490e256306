"""Randomised exact checks of the quasi-Markov laws on small finite kernels.

Every check draws fresh random kernels with small denominators and compares
both sides with exact rational equality.  ``run_law_suite`` is what the
``kernel laws`` CLI command and the acceptance tests call.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from .kernel import (
    FiniteSpace,
    PartialKernel,
    all_partial_identities,
    chain_meet,
    check_positivity_instance,
    compose,
    domain_of,
    extends,
    is_copyable,
    meet_domains,
    restrict,
    structural,
    tensor,
)

_SPACES = {n: FiniteSpace(f"S{n}", n) for n in range(1, 5)}


def random_space(rng: random.Random, max_size: int = 3) -> FiniteSpace:
    return _SPACES[rng.randint(1, max_size)]


def random_row(rng: random.Random, size: int, deterministic: bool = False) -> tuple:
    if deterministic:
        i = rng.randrange(size)
        return tuple(Fraction(int(j == i)) for j in range(size))
    weights = [rng.choice((0, 0, 1, 1, 2, 3)) for _ in range(size)]
    if not any(weights):
        weights[rng.randrange(size)] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def random_kernel(
    rng: random.Random,
    source: FiniteSpace,
    target: FiniteSpace,
    p_undefined: float = 0.25,
    p_deterministic: float = 0.2,
) -> PartialKernel:
    """Random partial kernel; rows often have zeros so composite domains shrink."""
    det = rng.random() < p_deterministic
    rows = {}
    for x in range(source.size):
        if rng.random() < p_undefined:
            continue
        rows[x] = random_row(rng, target.size, det)
    return PartialKernel(source, target, rows)


def random_subset(rng: random.Random, items) -> set:
    return {i for i in items if rng.random() < 0.6}


def random_descending_chain(rng: random.Random, f: PartialKernel, length: int) -> list[PartialKernel]:
    chain = [f]
    for _ in range(length - 1):
        chain.append(restrict(chain[-1], random_subset(rng, chain[-1].rows)))
    return chain


def _matrix_oracle(f: PartialKernel, g: PartialKernel) -> PartialKernel:
    # zero-row matrix product; rows with mass strictly in (0, 1) are dropped
    a, b = f.to_matrix(), g.to_matrix()
    rows = {}
    for x, arow in enumerate(a):
        prod = [sum(arow[y] * b[y][z] for y in range(len(b))) for z in range(g.target.size)]
        if sum(prod) == 1:
            rows[x] = prod
    return PartialKernel(f.source, g.target, rows)


def _same_rows(f: PartialKernel, g: PartialKernel) -> bool:
    # equality up to the associator / unitor: product indices coincide
    return f.source.size == g.source.size and f.target.size == g.target.size and dict(f.rows) == dict(g.rows)


# individual laws ---------------------------------------------------------------


def law_associativity(rng):
    a, b, c, d = (random_space(rng) for _ in range(4))
    f, g, h = random_kernel(rng, a, b), random_kernel(rng, b, c), random_kernel(rng, c, d)
    return compose(compose(f, g), h) == compose(f, compose(g, h))


def law_unit(rng):
    a, b = random_space(rng), random_space(rng)
    f = random_kernel(rng, a, b)
    return compose(structural(a, "identity"), f) == f == compose(f, structural(b, "identity"))


def law_comonoid(rng):
    x = random_space(rng)
    copy, ident, delete = structural(x, "copy"), structural(x, "identity"), structural(x, "delete")
    coassoc = _same_rows(compose(copy, tensor(copy, ident)), compose(copy, tensor(ident, copy)))
    cocomm = compose(copy, structural(x * x, "swap")) == copy
    left = _same_rows(compose(copy, tensor(delete, ident)), ident)
    right = _same_rows(compose(copy, tensor(ident, delete)), ident)
    swap2 = compose(structural(x * x, "swap"), structural(x * x, "swap")) == structural(x * x, "identity")
    return coassoc and cocomm and left and right and swap2


def law_dom_comp(rng):
    a, b, c = random_space(rng), random_space(rng), random_space(rng)
    f, g = random_kernel(rng, a, b), random_kernel(rng, b, c)
    fg = compose(f, g)
    expected = {x for x, row in f.rows.items() if sum(p for y, p in enumerate(row) if y in g.rows) == 1}
    return fg.domain == expected and fg == _matrix_oracle(f, g)


def law_dom_repeat(rng):
    a, b, c = random_space(rng), random_space(rng), random_space(rng)
    f, g = random_kernel(rng, a, b), random_kernel(rng, b, c)
    return domain_of(compose(f, g)) == domain_of(compose(f, domain_of(g)))


def law_quasi_total(rng):
    a, b = random_space(rng), random_space(rng)
    f = random_kernel(rng, a, b)
    return compose(domain_of(f), f) == f


def law_meet_of_domains(rng):
    a = random_space(rng)
    f, g = random_kernel(rng, a, random_space(rng)), random_kernel(rng, a, random_space(rng))
    m = meet_domains(f, g)
    df, dg = domain_of(f), domain_of(g)
    if m != compose(df, dg) or not (extends(df, m) and extends(dg, m)):
        return False
    lower = [h for h in all_partial_identities(a) if extends(df, h) and extends(dg, h)]
    return all(extends(m, h) for h in lower)


def law_chain_meet(rng):
    a, b, c = random_space(rng), random_space(rng), random_space(rng)
    chain = random_descending_chain(rng, random_kernel(rng, a, b, p_undefined=0.1), rng.randint(1, 4))
    meet = chain_meet(chain)
    if meet.domain != frozenset.intersection(*(k.domain for k in chain)):
        return False
    pre = random_kernel(rng, c, a)
    post = random_kernel(rng, b, c)
    side = random_kernel(rng, c, c)
    return (
        compose(pre, meet) == chain_meet([compose(pre, k) for k in chain])
        and compose(meet, post) == chain_meet([compose(k, post) for k in chain])
        and tensor(meet, side) == chain_meet([tensor(k, side) for k in chain])
        and tensor(side, meet) == chain_meet([tensor(side, k) for k in chain])
    )


def law_enrichment(rng):
    a, b, c = random_space(rng), random_space(rng), random_space(rng)
    f = random_kernel(rng, a, b)
    g = restrict(f, random_subset(rng, f.rows))
    h, k, t = random_kernel(rng, c, a), random_kernel(rng, b, c), random_kernel(rng, c, c)
    return (
        extends(f, g)
        and extends(compose(h, f), compose(h, g))
        and extends(compose(f, k), compose(g, k))
        and extends(tensor(f, t), tensor(g, t))
        and extends(tensor(t, f), tensor(t, g))
    )


def law_partial_order(rng):
    a, b = random_space(rng), random_space(rng)
    f = random_kernel(rng, a, b)
    g = restrict(f, random_subset(rng, f.rows))
    h = restrict(g, random_subset(rng, g.rows))
    antisym = (not (extends(f, g) and extends(g, f))) or f == g
    return extends(f, f) and extends(f, g) and extends(g, h) and extends(f, h) and antisym


def law_copyable_restriction(rng):
    a, b = random_space(rng), random_space(rng)
    f = random_kernel(rng, a, b, p_deterministic=0.6)
    g = restrict(f, random_subset(rng, f.rows))
    return (not is_copyable(f)) or is_copyable(g)


def law_positivity(rng):
    a, b, c = random_space(rng), random_space(rng), random_space(rng)
    f = random_kernel(rng, a, b)
    g = random_kernel(rng, b, c, p_deterministic=0.7)
    return check_positivity_instance(f, g)


LAWS = {
    "associativity": law_associativity,
    "unit": law_unit,
    "comonoid": law_comonoid,
    "dom_comp": law_dom_comp,
    "dom_repeat": law_dom_repeat,
    "quasi_totality": law_quasi_total,
    "meet_of_domains": law_meet_of_domains,
    "chain_meet_preservation": law_chain_meet,
    "enrichment": law_enrichment,
    "extension_partial_order": law_partial_order,
    "copyable_restriction": law_copyable_restriction,
    "positivity": law_positivity,
}


@dataclass
class LawResult:
    name: str
    instances: int
    failures: int
    seconds: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def run_law_suite(instances: int = 1000, seed: int = 0, laws=None) -> list[LawResult]:
    """Run each law on ``instances`` random instances with a per-law seeded stream."""
    results = []
    for name in laws or LAWS:
        rng = random.Random(f"{seed}:{name}")
        check = LAWS[name]
        start = time.perf_counter()
        failures = sum(1 for _ in range(instances) if not check(rng))
        results.append(LawResult(name, instances, failures, time.perf_counter() - start))
    return results
