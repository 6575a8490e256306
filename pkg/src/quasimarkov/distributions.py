"""Built-in distributions, named deterministic sequences, and sequence ingestion.

Randomness comes from numpy's Philox4x64 counter-based generator.  A stream is
addressed by ``(seed, *keys)`` through :class:`numpy.random.SeedSequence`, so the
stream for trial ``i`` is the same whether trials run serially or in parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .empirical import SequencePrefix

__all__ = [
    "CATALOGUE",
    "Distribution",
    "GeneratorSpec",
    "InputError",
    "NAMED_SEQUENCES",
    "make_distribution",
    "named_sequence",
    "read_csv",
    "rng_for",
]


class InputError(ValueError):
    """Malformed user input (CSV line, JSON document, unknown distribution)."""


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Philox stream for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Distribution:
    """One entry of the catalogue.

    ``kind`` says which sequence space samples live in.  ``mean`` is ``nan`` when
    undefined (Cauchy).  ``bounded01`` marks laws supported in ``[0, 1]``.
    """

    name: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in CATALOGUE:
            raise InputError(f"unknown distribution {self.name!r}; choose from {sorted(CATALOGUE)}")
        try:
            CATALOGUE[self.name].validate(dict(self.params))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad parameters for {self.name}: {exc}") from None

    @property
    def _impl(self):
        return CATALOGUE[self.name]

    @property
    def kind(self) -> str:
        return self._impl.kind

    @property
    def alphabet_size(self) -> int | None:
        return self._impl.alphabet_size(self.params)

    @property
    def mean(self) -> float:
        return self._impl.mean(self.params)

    @property
    def bounded01(self) -> bool:
        return self._impl.bounded01(self.params)

    @property
    def discrete(self) -> bool:
        return hasattr(self._impl, "atoms")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self._impl.sample(self.params, rng, size)

    def cdf(self, t) -> np.ndarray:
        return self._impl.cdf(self.params, np.asarray(t, dtype=np.float64))

    def cdf_left(self, t) -> np.ndarray:
        """``P(X < t)``; equals :meth:`cdf` for continuous laws."""
        t = np.asarray(t, dtype=np.float64)
        if not self.discrete:
            return self.cdf(t)
        return self.cdf(np.nextafter(t, -np.inf))

    def atoms_between(self, lo: float, hi: float) -> np.ndarray:
        """Atom locations in ``[lo, hi]`` for discrete laws (empty otherwise)."""
        if not self.discrete:
            return np.empty(0)
        return self._impl.atoms(self.params, lo, hi)

    def to_json(self) -> dict:
        return {"dist": self.name, "params": dict(self.params)}


def make_distribution(name: str, params: Mapping | None = None) -> Distribution:
    return Distribution(name, dict(params or {}))


class _Constant:
    kind = "real"

    def validate(self, p):
        float(p.get("c", 0.0))

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return float(p.get("c", 0.0))

    def bounded01(self, p):
        return 0.0 <= float(p.get("c", 0.0)) <= 1.0

    def sample(self, p, rng, size):
        return np.full(size, float(p.get("c", 0.0)))

    def cdf(self, p, t):
        return (t >= float(p.get("c", 0.0))).astype(np.float64)

    def atoms(self, p, lo, hi):
        c = float(p.get("c", 0.0))
        return np.array([c]) if lo <= c <= hi else np.empty(0)


class _Bernoulli:
    """Values 0 and 1, P(1) = p, as reals."""

    kind = "real"

    def validate(self, p):
        q = float(p.get("p", 0.5))
        if not 0.0 <= q <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return float(p.get("p", 0.5))

    def bounded01(self, p):
        return True

    def sample(self, p, rng, size):
        return (rng.random(size) < float(p.get("p", 0.5))).astype(np.float64)

    def cdf(self, p, t):
        q = float(p.get("p", 0.5))
        return np.where(t < 0, 0.0, np.where(t < 1, 1.0 - q, 1.0))

    def atoms(self, p, lo, hi):
        return np.array([a for a in (0.0, 1.0) if lo <= a <= hi])


class _Uniform01:
    kind = "real"

    def validate(self, p):
        pass

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return 0.5

    def bounded01(self, p):
        return True

    def sample(self, p, rng, size):
        return rng.random(size)

    def cdf(self, p, t):
        return np.clip(t, 0.0, 1.0)


class _Geometric:
    """Number of trials to the first success: support {1, 2, ...}."""

    kind = "nat"

    def validate(self, p):
        q = float(p.get("p", 0.5))
        if not 0.0 < q <= 1.0:
            raise ValueError("p must lie in (0, 1]")

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return 1.0 / float(p.get("p", 0.5))

    def bounded01(self, p):
        return False

    def sample(self, p, rng, size):
        return rng.geometric(float(p.get("p", 0.5)), size)

    def cdf(self, p, t):
        q = float(p.get("p", 0.5))
        k = np.floor(t)
        return np.where(t < 1, 0.0, 1.0 - (1.0 - q) ** np.maximum(k, 0))

    def atoms(self, p, lo, hi):
        return np.arange(max(1, math.ceil(lo)), math.floor(hi) + 1, dtype=np.float64)


class _Exponential:
    kind = "real"

    def validate(self, p):
        if not float(p.get("rate", 1.0)) > 0:
            raise ValueError("rate must be positive")

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return 1.0 / float(p.get("rate", 1.0))

    def bounded01(self, p):
        return False

    def sample(self, p, rng, size):
        return rng.exponential(1.0 / float(p.get("rate", 1.0)), size)

    def cdf(self, p, t):
        return np.where(t < 0, 0.0, -np.expm1(-float(p.get("rate", 1.0)) * np.maximum(t, 0.0)))


class _Normal:
    kind = "real"

    def validate(self, p):
        if not float(p.get("sigma", 1.0)) > 0:
            raise ValueError("sigma must be positive")
        float(p.get("mu", 0.0))

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return float(p.get("mu", 0.0))

    def bounded01(self, p):
        return False

    def sample(self, p, rng, size):
        return rng.normal(float(p.get("mu", 0.0)), float(p.get("sigma", 1.0)), size)

    def cdf(self, p, t):
        z = (t - float(p.get("mu", 0.0))) / (float(p.get("sigma", 1.0)) * math.sqrt(2.0))
        return 0.5 * (1.0 + np.vectorize(math.erf, otypes=[np.float64])(z))


class _Cauchy:
    kind = "real"

    def validate(self, p):
        if not float(p.get("gamma", 1.0)) > 0:
            raise ValueError("gamma must be positive")
        float(p.get("x0", 0.0))

    def alphabet_size(self, p):
        return None

    def mean(self, p):
        return math.nan

    def bounded01(self, p):
        return False

    def sample(self, p, rng, size):
        return float(p.get("x0", 0.0)) + float(p.get("gamma", 1.0)) * rng.standard_cauchy(size)

    def cdf(self, p, t):
        return 0.5 + np.arctan((t - float(p.get("x0", 0.0))) / float(p.get("gamma", 1.0))) / math.pi


class _FinitePmf:
    """Alphabet indices 0..k-1 with probabilities ``probs`` (rationals or floats)."""

    kind = "finite"

    def _probs(self, p):
        probs = np.array([float(Fraction(str(q))) for q in p["probs"]])
        return probs / probs.sum()

    def validate(self, p):
        probs = [Fraction(str(q)) for q in p["probs"]]
        if not probs or any(q < 0 for q in probs) or sum(probs) == 0:
            raise ValueError("probs must be a nonnegative, nonzero vector")

    def alphabet_size(self, p):
        return len(p["probs"])

    def mean(self, p):
        probs = self._probs(p)
        return float(np.dot(np.arange(probs.size), probs))

    def bounded01(self, p):
        return len(p["probs"]) <= 2

    def sample(self, p, rng, size):
        probs = self._probs(p)
        return rng.choice(probs.size, size=size, p=probs)

    def cdf(self, p, t):
        cum = np.cumsum(self._probs(p))
        idx = np.floor(t).astype(np.int64)
        return np.where(t < 0, 0.0, cum[np.clip(idx, 0, cum.size - 1)])

    def atoms(self, p, lo, hi):
        k = len(p["probs"])
        return np.arange(max(0, math.ceil(lo)), min(k - 1, math.floor(hi)) + 1, dtype=np.float64)


CATALOGUE = {
    "constant": _Constant(),
    "bernoulli": _Bernoulli(),
    "uniform01": _Uniform01(),
    "geometric": _Geometric(),
    "exponential": _Exponential(),
    "normal": _Normal(),
    "cauchy": _Cauchy(),
    "finite": _FinitePmf(),
}


# deterministic sequences ---------------------------------------------------------


def _indices(n: int) -> np.ndarray:
    return np.arange(1, n + 1, dtype=np.int64)


def _ceil_log2(i: np.ndarray) -> np.ndarray:
    # exact ⌈log2 i⌉ for positive integers: bit length of i - 1
    out = np.zeros_like(i)
    v = i - 1
    while np.any(v > 0):
        out += v > 0
        v >>= 1
    return out


def _dyadic_oscillation(n):
    return SequencePrefix("finite", (_ceil_log2(_indices(n)) % 2).astype(np.int64), 2, f"dyadic_oscillation(n={n})")


def _naturals(n):
    return SequencePrefix("nat", _indices(n), provenance=f"naturals(n={n})")


def _harmonic(n):
    return SequencePrefix("real", 1.0 / _indices(n), provenance=f"harmonic(n={n})")


def _neg_harmonic(n):
    return SequencePrefix("real", -1.0 / _indices(n), provenance=f"neg_harmonic(n={n})")


def _escaping(n):
    i = _indices(n)
    power = (i & (i - 1)) == 0
    return SequencePrefix("nat", np.where(power, i + 1, 1), provenance=f"escaping(n={n})")


def _alternating(n):
    return SequencePrefix("finite", (_indices(n) - 1) % 2, 2, f"alternating(n={n})")


NAMED_SEQUENCES = {
    "dyadic_oscillation": _dyadic_oscillation,
    "naturals": _naturals,
    "harmonic": _harmonic,
    "neg_harmonic": _neg_harmonic,
    "escaping": _escaping,
    "alternating": _alternating,
}


def named_sequence(name: str, n: int) -> SequencePrefix:
    """Deterministic sequences used as worked examples.

    ``dyadic_oscillation``: 0 iff ⌈log2 i⌉ is even.  ``naturals``: 1, 2, 3, ...
    ``harmonic``: 1/i.  ``neg_harmonic``: -1/i.  ``escaping``: i + 1 when i is a
    power of two, else 1.  ``alternating``: 0, 1, 0, 1, ...
    """
    try:
        return NAMED_SEQUENCES[name](n)
    except KeyError:
        raise InputError(f"unknown sequence {name!r}") from None


# ingestion ------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """``{"dist": ..., "params": {...}, "seed": uint64, "n": N}``.

    ``dist`` is a catalogue entry or a named deterministic sequence (seed unused).
    """

    dist: str
    params: Mapping
    seed: int
    n: int

    @classmethod
    def from_json(cls, text: str | Mapping) -> "GeneratorSpec":
        if isinstance(text, str):
            try:
                d = json.loads(text)
            except json.JSONDecodeError as exc:
                raise InputError(f"generator spec, line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        else:
            d = text
        if not isinstance(d, Mapping) or "dist" not in d or "n" not in d:
            raise InputError('generator spec needs at least "dist" and "n"')
        seed = int(d.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise InputError("seed must be a uint64")
        n = int(d["n"])
        if n < 1:
            raise InputError("n must be >= 1")
        return cls(str(d["dist"]), dict(d.get("params", {})), seed, n)

    def canonical(self) -> str:
        return json.dumps({"dist": self.dist, "params": dict(self.params), "seed": self.seed, "n": self.n},
                          sort_keys=True)

    def generate(self, kind: str | None = None) -> SequencePrefix:
        if self.dist in NAMED_SEQUENCES:
            return named_sequence(self.dist, self.n)
        d = make_distribution(self.dist, self.params)
        vals = d.sample(rng_for(self.seed), self.n)
        kind = kind or d.kind
        if kind == "finite":
            k = d.alphabet_size or int(np.max(vals)) + 1
            return SequencePrefix("finite", vals.astype(np.int64), k, self.canonical())
        if kind == "nat":
            return SequencePrefix("nat", vals.astype(np.int64), provenance=self.canonical())
        return SequencePrefix("real", vals.astype(np.float64), provenance=self.canonical())


def read_csv(lines, kind: str, alphabet_size: int | None = None, source: str = "<csv>") -> SequencePrefix:
    """One value per line; blank lines and ``#`` comments are skipped."""
    vals = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip().rstrip(",")
        if not text:
            continue
        try:
            v = float(text) if kind == "real" else int(text)
        except ValueError:
            raise InputError(f"{source}, line {lineno}: cannot read {text!r} as a {kind} value") from None
        if kind == "nat" and v < 1:
            raise InputError(f"{source}, line {lineno}: natural numbers start at 1, got {v}")
        if kind == "finite" and (v < 0 or (alphabet_size is not None and v >= alphabet_size)):
            raise InputError(f"{source}, line {lineno}: symbol {v} outside the alphabet")
        if kind == "real" and not math.isfinite(v):
            raise InputError(f"{source}, line {lineno}: value must be finite")
        vals.append(v)
    if not vals:
        raise InputError(f"{source}: no values")
    return SequencePrefix(kind, np.asarray(vals), alphabet_size, source)
