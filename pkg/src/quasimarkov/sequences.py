"""Finite truncations of sequence spaces ``X^N`` over a finite alphabet.

States on ``X^N`` are handled through their length-``n`` marginals
(:class:`CylinderState`), stored sparsely as ``word -> Fraction``.  Words are
tuples of alphabet indices.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import prod
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .kernel import FiniteSpace, parse_rational

__all__ = [
    "CylinderState",
    "FinitePermutation",
    "MixtureModel",
    "is_exchangeable",
    "iid_truncation",
    "marginal",
    "mixture_state",
    "permute",
    "point_mass",
    "resample_truncated",
    "total_variation",
    "two_stage_resample",
]

Word = tuple


def _alphabet(k: int | FiniteSpace) -> FiniteSpace:
    return k if isinstance(k, FiniteSpace) else FiniteSpace(f"F{k}", k)


def _probability_vector(p: Sequence, what: str) -> tuple[Fraction, ...]:
    vec = tuple(parse_rational(x) for x in p)
    if any(x < 0 for x in vec) or sum(vec) != 1:
        raise ValueError(f"{what} must be a probability vector, got sum {sum(vec)}")
    return vec


@dataclass(frozen=True, eq=False)
class CylinderState:
    """Exact law of the first ``n`` coordinates of a random sequence."""

    alphabet: FiniteSpace
    n: int
    pmf: Mapping[Word, Fraction] = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"word length must be >= 1, got {self.n}")
        clean = {}
        for w, p in dict(self.pmf).items():
            w = tuple(int(a) for a in w)
            p = parse_rational(p)
            if len(w) != self.n or any(not 0 <= a < self.alphabet.size for a in w):
                raise ValueError(f"word {w} is not in alphabet^{self.n}")
            if p < 0:
                raise ValueError(f"negative probability {p} at {w}")
            if p:
                clean[w] = clean.get(w, Fraction(0)) + p
        if sum(clean.values()) != 1:
            raise ValueError(f"pmf sums to {sum(clean.values())}, not 1")
        object.__setattr__(self, "pmf", MappingProxyType(dict(sorted(clean.items()))))

    def __getitem__(self, word) -> Fraction:
        return self.pmf.get(tuple(word), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, CylinderState):
            return NotImplemented
        return self.alphabet.size == other.alphabet.size and self.n == other.n and dict(self.pmf) == dict(other.pmf)

    def __hash__(self):
        return hash((self.alphabet.size, self.n, tuple(self.pmf.items())))

    def to_json(self) -> dict:
        return {
            "alphabet": self.alphabet.size,
            "n": self.n,
            "pmf": {",".join(map(str, w)): f"{p.numerator}/{p.denominator}" for w, p in self.pmf.items()},
        }


def point_mass(alphabet: int | FiniteSpace, word: Sequence[int]) -> CylinderState:
    return CylinderState(_alphabet(alphabet), len(word), {tuple(word): Fraction(1)})


def total_variation(s: CylinderState, t: CylinderState) -> Fraction:
    if s.n != t.n:
        raise ValueError("total variation needs equal word lengths")
    keys = set(s.pmf) | set(t.pmf)
    return sum((abs(s[w] - t[w]) for w in keys), Fraction(0)) / 2


def marginal(s: CylinderState, k: int) -> CylinderState:
    """Law of the first ``k`` coordinates (delete the trailing ones)."""
    if not 1 <= k <= s.n:
        raise ValueError(f"marginal length {k} outside 1..{s.n}")
    out: dict[Word, Fraction] = {}
    for w, p in s.pmf.items():
        out[w[:k]] = out.get(w[:k], Fraction(0)) + p
    return CylinderState(s.alphabet, k, out)


@dataclass(frozen=True)
class FinitePermutation:
    """A bijection of ``{0, ..., n-1}``; ``images[i]`` is the image of ``i``.

    Acting on words, position ``j`` of the output reads position ``images[j]`` of
    the input, i.e. input ``i`` lands at output ``inverse(i)``.  This action is
    contravariant: ``permute(permute(s, tau), sigma) == permute(s, tau.after(sigma))``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"{self.images} is not a permutation")

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "FinitePermutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "FinitePermutation":
        img = list(range(n))
        img[i], img[j] = img[j], img[i]
        return cls(tuple(img))

    def after(self, other: "FinitePermutation") -> "FinitePermutation":
        """Composite ``self ∘ other`` (apply ``other`` first)."""
        if self.n != other.n:
            raise ValueError("permutation sizes differ")
        return FinitePermutation(tuple(self.images[other.images[i]] for i in range(self.n)))

    def inverse(self) -> "FinitePermutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images):
            inv[j] = i
        return FinitePermutation(tuple(inv))

    def act(self, word: Sequence) -> tuple:
        return tuple(word[self.images[j]] for j in range(self.n))


def permute(s: CylinderState, sigma: FinitePermutation) -> CylinderState:
    if sigma.n != s.n:
        raise ValueError(f"permutation of {sigma.n} points applied to words of length {s.n}")
    return CylinderState(s.alphabet, s.n, {sigma.act(w): p for w, p in s.pmf.items()})


def iid_truncation(p: Sequence, n: int, alphabet: FiniteSpace | None = None) -> CylinderState:
    """Product law ``p ⊗ ... ⊗ p`` on words of length ``n``."""
    vec = _probability_vector(p, "iid_truncation")
    alphabet = alphabet or _alphabet(len(vec))
    support = [(a, q) for a, q in enumerate(vec) if q]
    pmf = {}
    for combo in product(support, repeat=n):
        pmf[tuple(a for a, _ in combo)] = prod((q for _, q in combo), start=Fraction(1))
    return CylinderState(alphabet, n, pmf)


@dataclass(frozen=True)
class MixtureModel:
    """Finite mixture of IID laws over an alphabet of size ``alphabet``."""

    alphabet: int
    weights: tuple[Fraction, ...]
    components: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        weights = _probability_vector(self.weights, "mixture weights")
        comps = tuple(_probability_vector(c, f"component {i}") for i, c in enumerate(self.components))
        if len(weights) != len(comps):
            raise ValueError(f"{len(weights)} weights for {len(comps)} components")
        if any(len(c) != self.alphabet for c in comps):
            raise ValueError(f"every component needs {self.alphabet} entries")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", comps)

    @property
    def is_point_mass_mixture(self) -> bool:
        return all(max(c) == 1 for c in self.components)

    @classmethod
    def from_json(cls, d: Mapping | str) -> "MixtureModel":
        if isinstance(d, str):
            d = json.loads(d)
        return cls(int(d["alphabet"]), tuple(d["weights"]), tuple(tuple(c) for c in d["components"]))

    def to_json(self) -> dict:
        fmt = lambda q: f"{q.numerator}/{q.denominator}"  # noqa: E731
        return {
            "alphabet": self.alphabet,
            "weights": [fmt(w) for w in self.weights],
            "components": [[fmt(q) for q in c] for c in self.components],
        }

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """One length-``n`` sequence: pick a component, then draw IID from it."""
        j = rng.choice(len(self.weights), p=[float(w) for w in self.weights])
        probs = np.array([float(q) for q in self.components[j]])
        return rng.choice(self.alphabet, size=n, p=probs / probs.sum())


def mixture_state(m: MixtureModel, n: int) -> CylinderState:
    pmf: dict[Word, Fraction] = {}
    for w, comp in zip(m.weights, m.components):
        if not w:
            continue
        for word, p in iid_truncation(comp, n).pmf.items():
            pmf[word] = pmf.get(word, Fraction(0)) + w * p
    return CylinderState(_alphabet(m.alphabet), n, pmf)


def is_exchangeable(s: CylinderState) -> bool:
    """Invariance under every adjacent transposition, hence under all of ``S_n``."""
    for i in range(s.n - 1):
        tau = FinitePermutation.transposition(s.n, i, i + 1)
        if any(s[tau.act(w)] != p for w, p in s.pmf.items()):
            return False
    return True


def _prefix_counts(x, n: int) -> tuple[int, Counter]:
    values = getattr(x, "values", x)
    if n > len(values):
        raise ValueError(f"horizon {n} exceeds sequence length {len(values)}")
    k = getattr(x, "alphabet_size", None)
    if k is None:
        k = int(max(values[:n])) + 1
    return k, Counter(int(v) for v in values[:n])


def resample_truncated(x, m: int, n: int, *, with_replacement: bool = False) -> CylinderState:
    """Law of ``m`` coordinates after a uniformly random permutation of ``x[:n]``.

    Averaging ``δ(x_σ(1), ..., x_σ(m))`` over all ``n!`` permutations equals drawing
    ``m`` positions without replacement, so only the value counts of the prefix
    matter.  ``with_replacement=True`` gives the average over all ``n**m`` index
    tuples instead, i.e. the product of empirical frequencies.
    """
    if m > n:
        raise ValueError(f"word length {m} exceeds horizon {n}")
    if m < 1:
        raise ValueError("word length must be >= 1")
    k, counts = _prefix_counts(x, n)
    support = sorted(counts)
    pmf = {}
    for word in product(support, repeat=m):
        if with_replacement:
            p = Fraction(prod(counts[a] for a in word), n**m)
        else:
            used: Counter = Counter()
            num = 1
            for a in word:
                num *= counts[a] - used[a]
                used[a] += 1
            p = Fraction(num, prod(range(n - m + 1, n + 1)))
        if p:
            pmf[word] = p
    return CylinderState(_alphabet(k), m, pmf)


def two_stage_resample(x, m: int, n: int, draws: int | None = None) -> CylinderState:
    """Draw ``draws`` symbols IID from the empirical measure of ``x[:n]``, then
    resample ``m`` of them by a random permutation; returns the exact law.

    If ``C`` is the multinomial count vector of the draws, the falling-factorial
    moments ``E[prod_a (C_a)_(r_a)] = (draws)_m prod_a p_a**r_a`` cancel the
    without-replacement denominator, so the result is the product of empirical
    frequencies for every ``draws >= m``.  Tests confirm this against direct
    enumeration over the multinomial.
    """
    draws = n if draws is None else draws
    if draws < m:
        raise ValueError(f"need at least {m} draws, got {draws}")
    return resample_truncated(x, m, n, with_replacement=True)
