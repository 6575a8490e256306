"""Exact partial stochastic kernels between finite spaces.

A partial kernel ``f: X -> Y`` is a subset ``D_f`` of ``X`` (its domain) together
with a probability vector over ``Y`` for every element of ``D_f``. Elements outside
the domain have no row at all; they are never represented as zero rows.

Composition is written in diagrammatic order: ``compose(f, g)`` runs ``f`` first
and then ``g``.  Its domain is the set of ``x`` in ``D_f`` for which ``f(.|x)``
puts all of its mass on ``D_g``.

All probabilities are :class:`fractions.Fraction` values, so every law below is an
exact identity rather than a floating point approximation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

__all__ = [
    "FiniteSpace",
    "PartialKernel",
    "UNIT",
    "almost_surely_equal",
    "chain_meet",
    "check_positivity_instance",
    "compose",
    "domain_of",
    "extends",
    "is_copyable",
    "is_domain_idempotent",
    "kernel_from_json",
    "kernel_to_json",
    "meet_domains",
    "parse_rational",
    "partial_identity",
    "restrict",
    "state",
    "structural",
    "tensor",
]

Row = tuple  # tuple[Fraction, ...]


@dataclass(frozen=True)
class FiniteSpace:
    """A finite set ``{0, ..., size-1}`` with an optional name per element.

    Product spaces remember their factors so that ``swap`` can be built on them.
    Element ``(a, b)`` of ``A x B`` has index ``a * B.size + b``.
    """

    label: str
    size: int
    names: tuple[str, ...] | None = None
    factors: tuple["FiniteSpace", ...] = ()

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"space {self.label!r} must have size >= 1, got {self.size}")
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != self.size:
                raise ValueError(f"space {self.label!r}: {len(self.names)} names for size {self.size}")
            if len(set(self.names)) != self.size:
                raise ValueError(f"space {self.label!r}: element names must be distinct")

    def name(self, i: int) -> str:
        return self.names[i] if self.names is not None else str(i)

    def index(self, name: str) -> int:
        if self.names is not None and name in self.names:
            return self.names.index(name)
        try:
            i = int(name)
        except ValueError:
            raise KeyError(f"{name!r} is not an element of {self.label!r}") from None
        if not 0 <= i < self.size:
            raise KeyError(f"{name!r} is not an element of {self.label!r}")
        return i

    def __mul__(self, other: "FiniteSpace") -> "FiniteSpace":
        names = None
        if self.names is not None or other.names is not None:
            names = tuple(f"({self.name(a)},{other.name(b)})" for a in range(self.size) for b in range(other.size))
        return FiniteSpace(f"{self.label}x{other.label}", self.size * other.size, names, (self, other))

    def __repr__(self):
        return f"FiniteSpace({self.label!r}, {self.size})"


UNIT = FiniteSpace("I", 1)


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an int, or a Fraction into a Fraction (floats are refused)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"exact rational expected, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational")


def _check_row(row: Row, target: FiniteSpace, where: str) -> None:
    if len(row) != target.size:
        raise ValueError(f"{where}: row has {len(row)} entries, target has {target.size}")
    nonzero = [p for p in row if p.numerator]
    for p in nonzero:
        if p.numerator < 0 or p.numerator > p.denominator:
            raise ValueError(f"{where}: entry {p} outside [0, 1]")
    total = nonzero[0] if len(nonzero) == 1 else sum(nonzero, Fraction(0))
    if total != 1:
        raise ValueError(f"{where}: row sums to {total}, not 1")


@dataclass(frozen=True, eq=False)
class PartialKernel:
    """Immutable partial Markov kernel with exact rational rows."""

    source: FiniteSpace
    target: FiniteSpace
    rows: Mapping[int, Row] = field(repr=False)

    def __post_init__(self):
        rows = {}
        for x, row in dict(self.rows).items():
            if not 0 <= x < self.source.size:
                raise ValueError(f"row key {x} outside source {self.source.label!r}")
            row = tuple(p if type(p) is Fraction else parse_rational(p) for p in row)
            _check_row(row, self.target, f"row {self.source.name(x)}")
            rows[x] = row
        object.__setattr__(self, "rows", MappingProxyType(dict(sorted(rows.items()))))

    @classmethod
    def from_matrix(cls, source: FiniteSpace, target: FiniteSpace, matrix: Sequence[Sequence]) -> "PartialKernel":
        """Build a kernel from a substochastic matrix.

        Rows summing to 1 are kept, rows summing to 0 become undefined, and any other
        row sum is rejected: a row of mass strictly between 0 and 1 is not quasi-total.
        """
        if len(matrix) != source.size:
            raise ValueError(f"matrix has {len(matrix)} rows, source has {source.size}")
        rows = {}
        for x, row in enumerate(matrix):
            row = tuple(parse_rational(p) for p in row)
            total = sum(row)
            if total == 0:
                if any(p != 0 for p in row):
                    raise ValueError(f"row {x} has negative entries")
                continue
            if total != 1:
                raise ValueError(f"row {x} sums to {total}; rows must sum to 0 (undefined) or 1")
            rows[x] = row
        return cls(source, target, rows)

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self.rows)

    @property
    def is_total(self) -> bool:
        return len(self.rows) == self.source.size

    def prob(self, x: int, y: int) -> Fraction:
        return self.rows[x][y]

    def to_matrix(self) -> list[list[Fraction]]:
        """Substochastic matrix with zero rows outside the domain."""
        zero = (Fraction(0),) * self.target.size
        return [list(self.rows.get(x, zero)) for x in range(self.source.size)]

    def __eq__(self, other):
        if not isinstance(other, PartialKernel):
            return NotImplemented
        return self.source == other.source and self.target == other.target and dict(self.rows) == dict(other.rows)

    def __hash__(self):
        return hash((self.source, self.target, tuple(self.rows.items())))

    def __repr__(self):
        dom = ",".join(self.source.name(x) for x in self.rows)
        return f"PartialKernel({self.source.label} -> {self.target.label}, domain={{{dom}}})"


def _require_same(a: FiniteSpace, b: FiniteSpace, what: str) -> None:
    if a != b:
        raise TypeError(f"{what}: {a!r} does not match {b!r}")


_ZERO, _ONE = Fraction(0), Fraction(1)


def _point(size: int, i: int) -> Row:
    return tuple(_ONE if j == i else _ZERO for j in range(size))


def partial_identity(space: FiniteSpace, subset: Iterable[int]) -> PartialKernel:
    """The identity restricted to ``subset`` and undefined elsewhere."""
    return PartialKernel(space, space, {x: _point(space.size, x) for x in subset})


def state(space: FiniteSpace, probs: Sequence) -> PartialKernel:
    """A probability vector viewed as a kernel ``I -> space``."""
    return PartialKernel(UNIT, space, {0: tuple(probs)})


def compose(f: PartialKernel, g: PartialKernel) -> PartialKernel:
    """``f`` followed by ``g``.

    The result is defined at ``x`` iff ``f`` is defined at ``x`` and ``f(D_g|x) = 1``.
    """
    _require_same(f.target, g.source, "compose")
    g_dom = g.rows
    rows = {}
    nz = g.target.size
    for x, frow in f.rows.items():
        support = [(y, p) for y, p in enumerate(frow) if p]
        if any(y not in g_dom for y, _ in support):
            continue
        out = [Fraction(0)] * nz
        for y, p in support:
            for z, q in enumerate(g_dom[y]):
                if q:
                    out[z] += p * q
        rows[x] = tuple(out)
    return PartialKernel(f.source, g.target, rows)


def tensor(f: PartialKernel, g: PartialKernel) -> PartialKernel:
    """Parallel product with domain ``(D_f x B) ∩ (A x D_g)`` and product rows."""
    source = f.source * g.source
    target = f.target * g.target
    rows = {}
    for a, frow in f.rows.items():
        for b, grow in g.rows.items():
            rows[a * g.source.size + b] = tuple(p * q for p in frow for q in grow)
    return PartialKernel(source, target, rows)


def structural(space: FiniteSpace, which: str) -> PartialKernel:
    """The deterministic copy, delete, swap, or identity kernel on ``space``."""
    n = space.size
    if which == "identity":
        return partial_identity(space, range(n))
    if which == "copy":
        sq = space * space
        return PartialKernel(space, sq, {x: _point(sq.size, x * n + x) for x in range(n)})
    if which == "delete":
        return PartialKernel(space, UNIT, {x: (Fraction(1),) for x in range(n)})
    if which == "swap":
        if len(space.factors) != 2:
            raise ValueError(f"swap needs a product space, got {space!r}")
        a, b = space.factors
        flipped = b * a
        rows = {}
        for i in range(a.size):
            for j in range(b.size):
                rows[i * b.size + j] = _point(flipped.size, j * a.size + i)
        return PartialKernel(space, flipped, rows)
    raise ValueError(f"unknown structural kernel {which!r}")


def domain_of(f: PartialKernel) -> PartialKernel:
    return partial_identity(f.source, f.rows)


def is_domain_idempotent(d: PartialKernel) -> bool:
    if d.source != d.target:
        return False
    return all(row == _point(d.source.size, x) for x, row in d.rows.items())


def restrict(f: PartialKernel, subset: Iterable[int]) -> PartialKernel:
    """Restriction of ``f`` to ``subset ∩ D_f``."""
    keep = set(subset)
    return PartialKernel(f.source, f.target, {x: r for x, r in f.rows.items() if x in keep})


def extends(f: PartialKernel, g: PartialKernel) -> bool:
    """True iff ``D_g ⊆ D_f`` and ``f`` agrees with ``g`` on ``D_g``."""
    _require_same(f.source, g.source, "extends (source)")
    _require_same(f.target, g.target, "extends (target)")
    return all(x in f.rows and f.rows[x] == row for x, row in g.rows.items())


def meet_domains(f: PartialKernel, g: PartialKernel) -> PartialKernel:
    _require_same(f.source, g.source, "meet_domains")
    return compose(domain_of(f), domain_of(g))


def chain_meet(chain: Sequence[PartialKernel]) -> PartialKernel:
    """Meet of a finite descending chain ``chain[0] ⊒ chain[1] ⊒ ...``.

    Only the supplied prefix of a countable chain is seen; on finite spaces every
    descending chain of domains stabilises, so a long enough prefix gives the meet.
    """
    if not chain:
        raise ValueError("chain_meet needs at least one kernel")
    for i, (a, b) in enumerate(zip(chain, chain[1:])):
        if not extends(a, b):
            raise ValueError(f"chain is not descending at position {i}")
    common = set(chain[0].rows)
    for k in chain[1:]:
        common &= set(k.rows)
    return restrict(chain[0], common)


def is_copyable(f: PartialKernel) -> bool:
    """Checks ``f ; copy == copy ; (f ⊗ f)`` exactly."""
    lhs = compose(f, structural(f.target, "copy"))
    rhs = compose(structural(f.source, "copy"), tensor(f, f))
    return dict(lhs.rows) == dict(rhs.rows)


def _graph(p: PartialKernel, f: PartialKernel) -> PartialKernel:
    # p ; copy ; (id ⊗ f)
    ident = structural(f.source, "identity")
    return compose(compose(p, structural(p.target, "copy")), tensor(ident, f))


def almost_surely_equal(p: PartialKernel, f: PartialKernel, g: PartialKernel) -> bool:
    """``f`` and ``g`` are ``p``-almost surely equal."""
    _require_same(p.target, f.source, "almost_surely_equal")
    _require_same(f.source, g.source, "almost_surely_equal")
    _require_same(f.target, g.target, "almost_surely_equal")
    return _graph(p, f) == _graph(p, g)


def check_positivity_instance(f: PartialKernel, g: PartialKernel) -> bool:
    """Positivity for one pair: if ``f ; g`` is copyable then
    ``f ; copy ; (id ⊗ g) == copy ; (f ⊗ (f ; g))``.  Vacuously true otherwise."""
    _require_same(f.target, g.source, "check_positivity_instance")
    fg = compose(f, g)
    if not is_copyable(fg):
        return True
    lhs = compose(compose(f, structural(f.target, "copy")), tensor(structural(f.target, "identity"), g))
    rhs = compose(structural(f.source, "copy"), tensor(f, fg))
    return lhs == rhs


# JSON ------------------------------------------------------------------------


def _space_to_json(s: FiniteSpace) -> dict:
    out = {"label": s.label, "size": s.size}
    if s.names is not None:
        out["names"] = list(s.names)
    return out


def _space_from_json(d: Mapping) -> FiniteSpace:
    try:
        return FiniteSpace(str(d["label"]), int(d["size"]), d.get("names"))
    except KeyError as exc:
        raise ValueError(f"space is missing field {exc.args[0]!r}") from None


def kernel_to_json(f: PartialKernel) -> dict:
    return {
        "source": _space_to_json(f.source),
        "target": _space_to_json(f.target),
        "rows": {f.source.name(x): [f"{p.numerator}/{p.denominator}" for p in row] for x, row in f.rows.items()},
    }


def kernel_from_json(d: Mapping | str) -> PartialKernel:
    """Read the kernel JSON format; elements missing from ``rows`` are undefined."""
    if isinstance(d, str):
        d = json.loads(d)
    source = _space_from_json(d["source"])
    target = _space_from_json(d["target"])
    rows = {source.index(k): tuple(parse_rational(p) for p in v) for k, v in d.get("rows", {}).items()}
    return PartialKernel(source, target, rows)


def all_partial_identities(space: FiniteSpace):
    """Every domain idempotent on ``space`` (``2**size`` of them)."""
    for mask in product((False, True), repeat=space.size):
        yield partial_identity(space, [i for i, keep in enumerate(mask) if keep])
