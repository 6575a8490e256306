"""Empirical sampling on finite alphabets, the naturals, and the reals.

A sequence has an empirical measure only when its relative frequencies converge
in the appropriate (sometimes uniform) sense.  A finite prefix cannot prove or
refute a limit, so each classifier runs a Cauchy-style surrogate over a
:class:`HorizonSchedule` and returns one of three statuses:

* ``in-domain``: every checkpoint pair agrees to within ``eps``;
* ``out-of-domain``: two checkpoints at or beyond the schedule's guard differ by
  more than ``2 * eps`` (a witness is recorded);
* ``inconclusive``: anything else.

Counts are exact integers; divisions happen only when a frequency is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Cofinite",
    "EmpiricalMeasure",
    "EmpiricalVerdict",
    "HorizonSchedule",
    "IN_DOMAIN",
    "INCONCLUSIVE",
    "Interval",
    "OUT_OF_DOMAIN",
    "PiecewiseFunction",
    "SequencePrefix",
    "average_criterion",
    "classify",
    "classify_countable",
    "classify_finite",
    "classify_real",
    "classify_real_avg",
    "empirical_cdf",
    "empirical_expectation",
    "empirical_measure",
    "positive_part",
    "relative_frequency",
]

IN_DOMAIN = "in-domain"
OUT_OF_DOMAIN = "out-of-domain"
INCONCLUSIVE = "inconclusive"

KINDS = ("finite", "nat", "real")


@dataclass(frozen=True, eq=False)
class SequencePrefix:
    """The first ``N`` terms of a sequence together with where they came from.

    ``kind`` is ``"finite"`` (alphabet indices ``0..alphabet_size-1``), ``"nat"``
    (integers ``>= 1``) or ``"real"`` (binary64).
    """

    kind: str
    values: np.ndarray
    alphabet_size: int | None = None
    provenance: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        vals = np.asarray(self.values, dtype=np.float64 if self.kind == "real" else np.int64)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("a sequence prefix needs at least one value")
        if self.kind == "finite":
            k = self.alphabet_size if self.alphabet_size is not None else int(vals.max()) + 1
            if vals.min() < 0 or vals.max() >= k:
                raise ValueError(f"finite-alphabet values must lie in 0..{k - 1}")
            object.__setattr__(self, "alphabet_size", k)
        elif self.kind == "nat":
            if vals.min() < 1:
                raise ValueError("natural-number values must be >= 1")
        elif not np.all(np.isfinite(vals)):
            raise ValueError("real values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return int(self.values.size)

    def as_real(self) -> "SequencePrefix":
        return SequencePrefix("real", self.values.astype(np.float64), provenance=self.provenance)

    def permuted_prefix(self, order: Sequence[int]) -> "SequencePrefix":
        """Reorder the first ``len(order)`` terms; the tail is untouched."""
        k = len(order)
        vals = np.concatenate([self.values[:k][np.asarray(order)], self.values[k:]])
        return SequencePrefix(self.kind, vals, self.alphabet_size, self.provenance)


@dataclass(frozen=True)
class HorizonSchedule:
    """Checkpoints at which limits are probed, the tolerance, and the guard.

    Only checkpoints ``>= guard`` may witness an out-of-domain verdict.
    """

    checkpoints: tuple[int, ...]
    eps: float
    guard: int | None = None

    def __post_init__(self):
        cps = tuple(int(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", cps)
        if len(cps) < 2:
            raise ValueError("a horizon schedule needs at least two checkpoints")
        if cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError(f"checkpoints must be positive and strictly increasing: {cps}")
        if not self.eps > 0:
            raise ValueError(f"tolerance must be positive, got {self.eps}")
        if self.guard is None:
            object.__setattr__(self, "guard", cps[len(cps) // 2])

    @classmethod
    def default(cls, n: int, eps: float | None = None, points: int = 9) -> "HorizonSchedule":
        """Geometric checkpoints from ``n/8`` to ``n`` with ratio ``8**(1/(points-1))``.

        With 9 points the ratio is ``2**(3/8)``, so the checkpoints fall at eight
        different phases relative to powers of two and cannot alias a sequence whose
        frequencies oscillate on a dyadic clock.
        """
        if eps is None:
            eps = max(0.01, 4 / math.sqrt(n))
        raw = [n * 8.0 ** (j / (points - 1) - 1) for j in range(points)]
        cps = sorted({max(1, int(round(c))) for c in raw[:-1]} | {n})
        return cls(tuple(cps), eps)

    @property
    def late(self) -> tuple[int, ...]:
        return tuple(c for c in self.checkpoints if c >= self.guard)

    def check(self, n: int) -> None:
        if self.checkpoints[-1] > n:
            raise ValueError(f"last checkpoint {self.checkpoints[-1]} exceeds prefix length {n}")

    def to_json(self) -> dict:
        return {"checkpoints": list(self.checkpoints), "eps": self.eps, "guard": self.guard}


@dataclass
class EmpiricalVerdict:
    status: str
    kind: str
    horizon: int
    schedule: HorizonSchedule
    criteria: dict = field(default_factory=dict)
    witness: dict | None = None
    base: "EmpiricalVerdict | None" = None

    @property
    def in_domain(self) -> bool:
        return self.status == IN_DOMAIN

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "kind": self.kind,
            "horizon": self.horizon,
            "schedule": self.schedule.to_json(),
            "criteria": self.criteria,
            "witness": self.witness,
        }
        if self.base is not None:
            out["base"] = self.base.to_json()
        return out


@dataclass(eq=False)
class EmpiricalMeasure:
    """The constructed empirical distribution.

    ``finite``: exact ``pmf`` over alphabet indices.  ``countable``: float ``pmf``
    over observed values up to a cutoff plus ``tail_mass`` beyond it.  ``real``:
    sorted ``points`` with right-continuous ``cdf_values`` (last value exactly 1).
    """

    kind: str
    horizon: int
    pmf: dict | None = None
    tail_mass: float = 0.0
    points: np.ndarray | None = None
    cdf_values: np.ndarray | None = None

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "real":
            idx = np.searchsorted(self.points, t, side="right")
            vals = np.concatenate([[0.0], self.cdf_values])
            return vals[idx]
        keys = np.array(sorted(self.pmf), dtype=np.float64)
        cum = np.cumsum([float(self.pmf[k]) for k in sorted(self.pmf)])
        idx = np.searchsorted(keys, t, side="right")
        return np.concatenate([[0.0], cum])[idx]

    @property
    def atoms(self) -> list[tuple[float, float]]:
        if self.kind == "real":
            masses = np.diff(np.concatenate([[0.0], self.cdf_values]))
            return list(zip(self.points.tolist(), masses.tolist()))
        return [(float(k), float(p)) for k, p in sorted(self.pmf.items())]

    def mean(self, f: Callable[[np.ndarray], np.ndarray] = lambda y: y) -> float:
        """Integral of ``f`` over the (non-tail) atoms."""
        pts, w = zip(*self.atoms)
        return math.fsum(np.asarray(f(np.asarray(pts)), dtype=np.float64) * np.asarray(w))

    def is_point_mass(self, at: float, tol: float = 0.0) -> bool:
        heavy = [(v, p) for v, p in self.atoms if p > tol]
        return len(heavy) == 1 and heavy[0][0] == at and 1.0 - heavy[0][1] <= tol

    def pushforward_monotone(self, f: Callable[[np.ndarray], np.ndarray]) -> "EmpiricalMeasure":
        """Image measure under a nondecreasing map (real kind only)."""
        if self.kind != "real":
            raise ValueError("pushforward is implemented for real measures")
        img = np.asarray(f(self.points), dtype=np.float64)
        if np.any(np.diff(img) < 0):
            raise ValueError("map is not nondecreasing on the support")
        keep = np.concatenate([img[1:] != img[:-1], [True]])
        return EmpiricalMeasure("real", self.horizon, points=img[keep], cdf_values=self.cdf_values[keep])

    def to_json(self) -> dict:
        out = {"kind": self.kind, "horizon": self.horizon}
        if self.kind == "finite":
            out["pmf"] = {str(k): f"{p.numerator}/{p.denominator}" for k, p in sorted(self.pmf.items())}
        elif self.kind == "countable":
            out["pmf"] = {str(k): p for k, p in sorted(self.pmf.items())}
            out["tail_mass"] = self.tail_mass
        else:
            out["points"] = self.points.tolist()
            out["cdf"] = self.cdf_values.tolist()
        return out


# set specs for relative_frequency ----------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    closed_lo: bool = True
    closed_hi: bool = True

    def contains(self, v: np.ndarray) -> np.ndarray:
        left = v >= self.lo if self.closed_lo else v > self.lo
        right = v <= self.hi if self.closed_hi else v < self.hi
        return left & right


@dataclass(frozen=True)
class Cofinite:
    """All naturals except ``excluded``."""

    excluded: frozenset = frozenset()


def relative_frequency(x: SequencePrefix, T, n: int) -> float:
    """``|{i <= n : x_i in T}| / n``.

    ``T`` is a set of values (finite alphabet or finite subset of N), a
    :class:`Cofinite` subset of N, or an :class:`Interval` of R.
    """
    _check_horizon(x, n)
    v = x.values[:n]
    if isinstance(T, Interval):
        hits = int(np.count_nonzero(T.contains(v.astype(np.float64))))
    elif isinstance(T, Cofinite):
        if x.kind != "nat":
            raise TypeError("cofinite sets are subsets of the naturals")
        hits = n - int(np.count_nonzero(np.isin(v, list(T.excluded))))
    elif isinstance(T, (set, frozenset, range, list, tuple)):
        if x.kind == "real":
            raise TypeError("use an Interval for real sequences")
        hits = int(np.count_nonzero(np.isin(v, list(T))))
    else:
        raise TypeError(f"unsupported set spec {T!r}")
    return hits / n


def _check_horizon(x: SequencePrefix, n: int) -> None:
    if not 1 <= n <= len(x):
        raise ValueError(f"horizon {n} outside 1..{len(x)}")


# CDF machinery ------------------------------------------------------------------


def empirical_cdf(x: SequencePrefix, n: int) -> EmpiricalMeasure:
    """Step CDF of the first ``n`` terms, jumps exactly at the sorted sample values."""
    _check_horizon(x, n)
    pts, counts = np.unique(x.values[:n].astype(np.float64), return_counts=True)
    cum = np.cumsum(counts)
    return EmpiricalMeasure("real", n, points=pts, cdf_values=cum / n)


def _cdf_table(values: np.ndarray, checkpoints: Sequence[int], grid: Iterable = ()) -> tuple[np.ndarray, np.ndarray]:
    """Exact counts ``|{i <= n : x_i <= t}|`` for every checkpoint and evaluation point.

    Evaluation points are the distinct sample values up to the last checkpoint plus
    ``grid``; between sample points every empirical CDF is constant, so these points
    already realise the supremum over all of Q.
    """
    vals = values[: checkpoints[-1]].astype(np.float64)
    pts = np.unique(np.concatenate([vals, np.asarray([float(g) for g in grid], dtype=np.float64)]))
    table = np.empty((len(checkpoints), pts.size), dtype=np.int64)
    for r, n in enumerate(checkpoints):
        table[r] = np.searchsorted(np.sort(vals[:n]), pts, side="right")
    return pts, table


def _pairwise_sup(freqs: np.ndarray, checkpoints: Sequence[int], rows: Sequence[int] | None = None):
    """Largest sup-norm gap between rows of ``freqs`` and the pair achieving it."""
    rows = range(len(checkpoints)) if rows is None else rows
    best, arg = 0.0, None
    for a, b in combinations(rows, 2):
        gap = np.abs(freqs[a] - freqs[b])
        j = int(np.argmax(gap)) if gap.size else 0
        if gap.size and gap[j] > best:
            best, arg = float(gap[j]), (checkpoints[a], checkpoints[b], j)
    return best, arg


def _late_rows(schedule: HorizonSchedule) -> list[int]:
    return [i for i, c in enumerate(schedule.checkpoints) if c >= schedule.guard]


def _status(passed: bool, certified: bool) -> str:
    if passed:
        return IN_DOMAIN
    return OUT_OF_DOMAIN if certified else INCONCLUSIVE


def _schedule_for(x: SequencePrefix, h: HorizonSchedule | None) -> HorizonSchedule:
    h = h or HorizonSchedule.default(len(x))
    h.check(len(x))
    return h


# classifiers ---------------------------------------------------------------------


def classify_finite(x: SequencePrefix, h: HorizonSchedule | None = None) -> EmpiricalVerdict:
    """Do the singleton frequencies of a finite-alphabet sequence converge?"""
    if x.kind != "finite":
        raise TypeError("classify_finite needs a finite-alphabet prefix")
    h = _schedule_for(x, h)
    k = x.alphabet_size
    counts = np.stack([np.bincount(x.values[:n], minlength=k) for n in h.checkpoints])
    freqs = counts / np.asarray(h.checkpoints, dtype=np.float64)[:, None]
    worst, arg = _pairwise_sup(freqs, h.checkpoints)
    late, late_arg = _pairwise_sup(freqs, h.checkpoints, _late_rows(h))
    passed, certified = worst < h.eps, late > 2 * h.eps
    witness = None
    if not passed and certified:
        a, b, sym = late_arg
        witness = {
            "symbol": sym,
            "checkpoints": [a, b],
            "frequencies": [float(freqs[h.checkpoints.index(a), sym]), float(freqs[h.checkpoints.index(b), sym])],
        }
    crit = {
        "singleton_frequencies": {
            "passed": bool(passed),
            "max_discrepancy": worst,
            "late_discrepancy": late,
            "final_frequencies": freqs[-1].tolist(),
        }
    }
    return EmpiricalVerdict(_status(passed, certified), "finite", h.checkpoints[-1], h, crit, witness)


def _uniform_cdf_criterion(x: SequencePrefix, h: HorizonSchedule, grid: Iterable = ()) -> dict:
    pts, table = _cdf_table(x.values, h.checkpoints, grid)
    freqs = table / np.asarray(h.checkpoints, dtype=np.float64)[:, None]
    worst, arg = _pairwise_sup(freqs, h.checkpoints)
    late, late_arg = _pairwise_sup(freqs, h.checkpoints, _late_rows(h))
    out = {
        "passed": bool(worst < h.eps),
        "certified_failure": bool(late > 2 * h.eps),
        "max_discrepancy": worst,
        "late_discrepancy": late,
    }
    if late_arg is not None and out["certified_failure"]:
        a, b, j = late_arg
        out["witness"] = {"t": float(pts[j]), "checkpoints": [a, b]}
    return out


def _tightness_criterion(x: SequencePrefix, h: HorizonSchedule) -> dict:
    # cutoff: smallest observed t leaving at most eps/2 of the first prefix above it
    first = np.sort(x.values[: h.checkpoints[0]])
    n1 = first.size
    allowed = int(math.floor(h.eps / 2 * n1))
    cutoff = int(first[n1 - 1 - allowed])
    tails = [int(np.count_nonzero(x.values[:n] > cutoff)) / n for n in h.checkpoints]
    late = [tails[i] for i in _late_rows(h)]
    return {
        "passed": bool(max(tails) < h.eps),
        "certified_failure": bool(max(late) > 2 * h.eps),
        "cutoff": cutoff,
        "tail_masses": tails,
    }


def _normalization_criterion(x: SequencePrefix, h: HorizonSchedule) -> dict:
    # singletons seen by the first checkpoint must carry (almost) all later mass
    early = np.unique(x.values[: h.checkpoints[0]])
    deficits = [1.0 - int(np.count_nonzero(np.isin(x.values[:n], early))) / n for n in h.checkpoints]
    late = [deficits[i] for i in _late_rows(h)]
    return {
        "passed": bool(max(deficits) < h.eps),
        "certified_failure": bool(max(late) > 2 * h.eps),
        "early_support_size": int(early.size),
        "mass_deficits": deficits,
    }


def classify_countable(x: SequencePrefix, h: HorizonSchedule | None = None) -> EmpiricalVerdict:
    """Classify an N-valued prefix through tightness, uniform CDF limits and
    normalisation of singleton limits.

    The three are equivalent in the limit.  All must pass for ``in-domain``; all
    must fail, with at least one certified failure, for ``out-of-domain``.  Any
    disagreement is reported as ``inconclusive``.
    """
    if x.kind != "nat":
        raise TypeError("classify_countable needs an N-valued prefix")
    h = _schedule_for(x, h)
    crit = {
        "tightness": _tightness_criterion(x, h),
        "uniform_limits": _uniform_cdf_criterion(x, h),
        "normalization": _normalization_criterion(x, h),
    }
    passes = [c["passed"] for c in crit.values()]
    agree = all(passes) or not any(passes)
    crit["agreement"] = bool(agree)
    witness = None
    if all(passes):
        status = IN_DOMAIN
    elif not any(passes) and any(c["certified_failure"] for c in crit.values() if isinstance(c, dict)):
        status = OUT_OF_DOMAIN
        witness = {name: c.get("witness") or c.get("tail_masses") or c.get("mass_deficits")
                   for name, c in crit.items() if isinstance(c, dict) and c["certified_failure"]}
    else:
        status = INCONCLUSIVE
    return EmpiricalVerdict(status, "nat", h.checkpoints[-1], h, crit, witness)


def classify_real(x: SequencePrefix, h: HorizonSchedule | None = None, grid: Iterable = ()) -> EmpiricalVerdict:
    """Do the empirical CDFs converge uniformly in ``t``?"""
    if x.kind == "finite":
        raise TypeError("classify_real needs a real or N-valued prefix")
    h = _schedule_for(x, h)
    c = _uniform_cdf_criterion(x, h, grid)
    status = _status(c["passed"], c["certified_failure"])
    return EmpiricalVerdict(status, "real", h.checkpoints[-1], h, {"uniform_cdf": c}, c.get("witness"))


def _oscillation(values: Sequence[float], eps: float) -> bool:
    # a rise and a fall, each larger than 2 eps, among the late averages
    diffs = np.diff(np.asarray(values))
    return bool(diffs.size and diffs.max() > 2 * eps and diffs.min() < -2 * eps)


def _prefix_fsums(w: np.ndarray, checkpoints: Sequence[int]) -> list[float]:
    """Sums of ``w[:n]`` for each checkpoint.

    Each block between consecutive checkpoints is summed once with
    :func:`math.fsum` (correctly rounded, hence order-free inside the block) and
    the prefix sums combine the block sums, again with ``fsum``.
    """
    blocks, out, start = [], [], 0
    for n in checkpoints:
        blocks.append(math.fsum(w[start:n].tolist()))
        out.append(math.fsum(blocks))
        start = n
    return out


def average_criterion(x: SequencePrefix, h: HorizonSchedule, signed: bool = False) -> dict:
    """Running averages of ``|x_i|`` (or ``x_i``) at the checkpoints.

    Averages use :func:`math.fsum` per block, so permuting terms below the first
    checkpoint leaves them bit-identical.
    They must be Cauchy across checkpoints and agree with the moment of the
    empirical measure truncated to the range seen at the first checkpoint; a
    mismatch means mass escaping to infinity still moves the average.
    """
    v = x.values.astype(np.float64)
    w = v if signed else np.abs(v)
    avgs = [s / n for s, n in zip(_prefix_fsums(w, h.checkpoints), h.checkpoints)]
    cut = float(np.max(np.abs(v[: h.checkpoints[0]])))
    n = h.checkpoints[-1]
    inside = np.abs(v[:n]) <= cut
    truncated = math.fsum(w[:n][inside].tolist()) / n
    spread = max(avgs) - min(avgs)
    late = [avgs[i] for i in _late_rows(h)]
    cauchy = spread < h.eps
    matches = abs(avgs[-1] - truncated) < h.eps
    return {
        "passed": bool(cauchy and matches),
        "cauchy": bool(cauchy),
        "moment_matches": bool(matches),
        "certified_failure": _oscillation(late, h.eps),
        "averages": avgs,
        "truncated_moment": truncated,
        "spread": spread,
    }


def classify_real_avg(x: SequencePrefix, h: HorizonSchedule | None = None, grid: Iterable = ()) -> EmpiricalVerdict:
    """Restriction of :func:`classify_real` to sequences whose empirical average
    equals the mean of their empirical measure.

    Averages diverging to infinity are allowed in the limit but cannot be
    certified at a finite horizon; they yield ``inconclusive``.
    """
    h = _schedule_for(x, h)
    base = classify_real(x, h, grid)
    crit = {"absolute_average": average_criterion(x, h)}
    if crit["absolute_average"]["passed"]:
        crit["signed_average"] = average_criterion(x, h, signed=True)
    avg_ok = all(c["passed"] for c in crit.values())
    avg_bad = any(c["certified_failure"] for c in crit.values())
    if base.status == OUT_OF_DOMAIN or (avg_bad and not avg_ok):
        status = OUT_OF_DOMAIN
    elif base.in_domain and avg_ok:
        status = IN_DOMAIN
    else:
        status = INCONCLUSIVE
    witness = base.witness
    if status == OUT_OF_DOMAIN and witness is None:
        witness = {"averages": crit["absolute_average"]["averages"]}
    if "signed_average" in crit:
        crit["mean"] = crit["signed_average"]["averages"][-1]
    return EmpiricalVerdict(status, "real-avg", h.checkpoints[-1], h, crit, witness, base)


def classify(x: SequencePrefix, h: HorizonSchedule | None = None, grid: Iterable = (), averaged: bool = False):
    """Dispatch on ``x.kind``."""
    if x.kind == "finite":
        return classify_finite(x, h)
    if x.kind == "nat" and not averaged:
        return classify_countable(x, h)
    return (classify_real_avg if averaged else classify_real)(x.as_real() if x.kind == "nat" else x, h, grid)


def empirical_measure(x: SequencePrefix, v: EmpiricalVerdict) -> EmpiricalMeasure:
    """Package the frequencies at the verdict's horizon.  Refuses unless in-domain."""
    if not v.in_domain:
        raise ValueError(f"no empirical measure: sequence is {v.status}")
    n = v.horizon
    _check_horizon(x, n)
    if v.kind == "finite":
        counts = np.bincount(x.values[:n], minlength=x.alphabet_size)
        return EmpiricalMeasure("finite", n, pmf={a: Fraction(int(c), n) for a, c in enumerate(counts) if c})
    if v.kind == "nat":
        cutoff = v.criteria["tightness"]["cutoff"]
        vals, counts = np.unique(x.values[:n], return_counts=True)
        inside = vals <= cutoff
        pmf = {int(a): int(c) / n for a, c in zip(vals[inside], counts[inside])}
        tail = int(counts[~inside].sum()) / n
        return EmpiricalMeasure("countable", n, pmf=pmf, tail_mass=tail)
    return empirical_cdf(x, n)


# expectations ---------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseFunction:
    """A regulated function given by breakpoints and one piece per interval.

    With breakpoints ``b_1 < ... < b_k`` the pieces cover ``(-inf, b_1)``,
    ``[b_1, b_2)``, ..., ``[b_k, inf)``.  A piece is a constant or a callable that
    is continuous on its interval.  Callable outer pieces need finite limits at
    ``+-inf`` declared in ``limits``; without them the function counts as unbounded.
    """

    breakpoints: tuple[float, ...]
    pieces: tuple
    limits: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more piece than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        outer_callable = callable(self.pieces[0]) or callable(self.pieces[-1])
        if outer_callable and (self.limits is None or not all(map(math.isfinite, self.limits))):
            raise ValueError("unbounded function: outer pieces need finite limits at +-inf")

    @classmethod
    def indicator_le(cls, t: float) -> "PiecewiseFunction":
        # 1 on (-inf, t]; the breakpoint sits just above t so t itself is included
        return cls((np.nextafter(t, math.inf),), (1.0, 0.0))

    @classmethod
    def constant(cls, c: float) -> "PiecewiseFunction":
        return cls((), (float(c),))

    @classmethod
    def clamp(cls, lo: float = 0.0, hi: float = 1.0) -> "PiecewiseFunction":
        return cls((lo, hi), (float(lo), lambda y: y, float(hi)))

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        which = np.searchsorted(np.asarray(self.breakpoints), y, side="right")
        out = np.empty_like(y)
        for i, piece in enumerate(self.pieces):
            mask = which == i
            if np.any(mask):
                out[mask] = piece(y[mask]) if callable(piece) else piece
        return out


def empirical_expectation(x: SequencePrefix, f: PiecewiseFunction, n: int) -> tuple[float, float]:
    """``(∫ f d(empirical CDF at n), (1/n) Σ f(x_i))``.

    The first value is a Stieltjes sum over the jumps of the step CDF, the second
    a direct average; the caller decides how close they must be.
    """
    if not isinstance(f, PiecewiseFunction):
        raise TypeError("f must be a PiecewiseFunction; unbounded functions are not accepted here")
    _check_horizon(x, n)
    m = empirical_cdf(x, n)
    jumps = np.diff(np.concatenate([[0.0], m.cdf_values]))
    integral = math.fsum(f(m.points) * jumps)
    average = math.fsum(f(x.values[:n].astype(np.float64))) / n
    return integral, average


def positive_part(x: SequencePrefix) -> SequencePrefix:
    vals = np.maximum(x.values.astype(np.float64), 0.0)
    return SequencePrefix("real", vals, provenance=f"positive_part({x.provenance})")
