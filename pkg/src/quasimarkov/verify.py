"""Monte Carlo and exact verification of the limit theorems and bounds.

Each ``verify_*`` function returns a :class:`VerificationReport`.  Every case in
a report carries its estimate, standard error and bound, so a pass can be
audited.  Trial ``i`` always draws from the Philox stream ``(plan.seed, i)``;
serial and threaded runs therefore produce identical reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .cumulants import EnumerationTooLarge, sixth_moment_oracle, universal_sixth_moment_constant
from .distributions import Distribution, GeneratorSpec, make_distribution, rng_for
from .empirical import (
    HorizonSchedule,
    SequencePrefix,
    average_criterion,
    classify_countable,
    classify_finite,
    classify_real_avg,
    empirical_measure,
)
from .sequences import (
    MixtureModel,
    mixture_state,
    resample_truncated,
    total_variation,
    two_stage_resample,
)

__all__ = [
    "CaseResult",
    "TrialPlan",
    "VerificationReport",
    "check_sixth_moment",
    "ks_distance",
    "verify_concentration",
    "verify_ecdf_concentration",
    "verify_empirical_adequacy",
    "verify_glivenko_cantelli",
    "verify_maximal_ergodic",
    "verify_permutation_invariance",
    "verify_resampling_idempotence",
    "verify_slln",
]

SCHEMA = "quasimarkov.report/1"


@dataclass(frozen=True)
class TrialPlan:
    trials: int
    seed: int = 0
    N: int = 10_000
    m: int = 2
    eps: tuple[float, ...] = (0.1,)
    slack: float = 4.0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.N < 1 or self.m < 1:
            raise ValueError("trials, N and m must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a uint64")
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))

    def require_probabilistic(self) -> None:
        if self.trials < 100:
            raise ValueError(f"probabilistic checks need at least 100 trials, got {self.trials}")

    def rng(self, trial: int) -> np.random.Generator:
        return rng_for(self.seed, trial)

    def map_trials(self, fn: Callable[[int, np.random.Generator], object]) -> list:
        """``[fn(i, rng_i) for i in range(trials)]``, optionally threaded."""
        if self.workers <= 1:
            return [fn(i, self.rng(i)) for i in range(self.trials)]
        with ThreadPoolExecutor(self.workers) as pool:
            return list(pool.map(lambda i: fn(i, self.rng(i)), range(self.trials)))


@dataclass
class CaseResult:
    label: str
    estimate: float
    bound: float | None
    passed: bool
    stderr: float = 0.0
    mode: str = "one-sided"  # one-sided | two-sided | exact | property
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    check: str
    seed: int
    parameters: dict
    cases: list[CaseResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    raw: dict[str, list] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.cases) and all(c.passed for c in self.cases)

    def add(self, *args, **kwargs) -> CaseResult:
        case = CaseResult(*args, **kwargs)
        case.passed = bool(case.passed)
        self.cases.append(case)
        return case

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "check": self.check,
            "seed": self.seed,
            "parameters": self.parameters,
            "passed": self.passed,
            "cases": [asdict(c) for c in self.cases],
            "notes": self.notes,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2, default=_json_default)

    def to_table(self) -> str:
        lines = [f"{self.check}  seed={self.seed}  {'PASS' if self.passed else 'FAIL'}"]
        lines.append(f"  {'case':<44} {'estimate':>12} {'stderr':>10} {'bound':>12}  result")
        for c in self.cases:
            bound = "-" if c.bound is None else f"{c.bound:.6g}"
            lines.append(
                f"  {c.label:<44} {c.estimate:>12.6g} {c.stderr:>10.3g} {bound:>12}  {'pass' if c.passed else 'FAIL'}"
            )
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)

    def to_csv(self) -> str:
        """Per-trial raw statistics, one column per recorded series."""
        buf = io.StringIO()
        names = list(self.raw)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", *names])
        for i in range(max((len(self.raw[k]) for k in names), default=0)):
            w.writerow([i, *(self.raw[k][i] if i < len(self.raw[k]) else "" for k in names)])
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _proportion(hits: int, trials: int) -> tuple[float, float]:
    p = hits / trials
    return p, math.sqrt(p * (1 - p) / trials)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def _as_distribution(p) -> Distribution:
    if isinstance(p, Distribution):
        return p
    if isinstance(p, str):
        return make_distribution(p)
    return make_distribution(p["dist"], p.get("params"))


def rational_law(d: Distribution) -> dict[Fraction, Fraction] | None:
    """Exact finite law for discrete catalogue entries, else ``None``."""
    if d.name == "constant":
        return {Fraction(str(d.params.get("c", 0.0))): Fraction(1)}
    if d.name == "bernoulli":
        q = Fraction(str(d.params.get("p", 0.5)))
        return {Fraction(0): 1 - q, Fraction(1): q}
    if d.name == "finite":
        probs = [Fraction(str(q)) for q in d.params["probs"]]
        total = sum(probs)
        return {Fraction(i): q / total for i, q in enumerate(probs)}
    return None


# permutation invariance ------------------------------------------------------------


def _sampler(source, symbols: bool = False) -> tuple[Callable[[np.random.Generator, int], SequencePrefix], str]:
    """Sequence sampler plus its kind; ``symbols=True`` reads bernoulli and integer
    constant draws as alphabet symbols."""
    if isinstance(source, MixtureModel):
        k = source.alphabet
        return (lambda rng, n: SequencePrefix("finite", source.sample(rng, n), k, "mixture")), "finite"
    if isinstance(source, GeneratorSpec):
        source = make_distribution(source.dist, source.params)
    d = _as_distribution(source)
    finite_only = symbols and d.name in ("bernoulli", "constant")
    if finite_only:
        c = float(d.params.get("c", 0.0))
        if d.name == "constant" and (c < 0 or c != int(c)):
            raise ValueError("a constant symbol sequence needs a nonnegative integer c")
        symbols_k = 2 if d.name == "bernoulli" else int(c) + 1

    def draw(rng, n):
        vals = d.sample(rng, n)
        if d.kind == "finite":
            return SequencePrefix("finite", vals, d.alphabet_size, d.name)
        if finite_only:
            return SequencePrefix("finite", vals.astype(np.int64), symbols_k, d.name)
        return SequencePrefix(d.kind, vals, provenance=d.name)

    return draw, "finite" if finite_only else d.kind


def _classifier(kind: str):
    return {"finite": classify_finite, "nat": classify_countable, "real": classify_real_avg}[kind]


def _verdict_and_measure(x: SequencePrefix, classify) -> str:
    v = classify(x)
    out = {"verdict": v.to_json()}
    if v.in_domain:
        out["measure"] = empirical_measure(x, v if v.kind != "real-avg" else v.base).to_json()
    return json.dumps(out, sort_keys=True, default=_json_default)


def verify_permutation_invariance(source, plan: TrialPlan, k: int = 100) -> VerificationReport:
    """Permuting the first ``k`` terms must leave verdicts and measures bit-identical."""
    draw, kind = _sampler(source)
    schedule = HorizonSchedule.default(plan.N)
    if k > schedule.checkpoints[0]:
        raise ValueError(f"k={k} exceeds the first checkpoint {schedule.checkpoints[0]}")
    classify = _classifier(kind)

    def trial(i, rng):
        x = draw(rng, plan.N)
        order = rng.permutation(k)
        same = _verdict_and_measure(x, classify) == _verdict_and_measure(x.permuted_prefix(order), classify)
        return same

    same = plan.map_trials(trial)
    report = VerificationReport("permutation_invariance", plan.seed, {"N": plan.N, "k": k, "kind": kind,
                                                                      "trials": plan.trials})
    frac = sum(same) / plan.trials
    report.add("identical verdicts and measures", frac, 1.0, frac == 1.0, mode="exact",
               detail={"identical": int(sum(same)), "trials": plan.trials})
    report.raw["identical"] = [int(s) for s in same]
    return report


# empirical adequacy --------------------------------------------------------------


def _words(alphabet: int, m: int):
    from itertools import product

    return list(product(range(alphabet), repeat=m))


def verify_empirical_adequacy(model: MixtureModel, m: int, plan: TrialPlan) -> VerificationReport:
    """Resampling from empirical measures must reproduce the exchangeable law.

    For every word of length ``m`` the permutation-average estimate (unbiased for
    exchangeable laws) and the product-of-frequencies estimate (bias ``O(1/N)``)
    are averaged over trials and compared with the exact ``mixture_state``.
    """
    exact = mixture_state(model, m)
    report = VerificationReport("empirical_adequacy", plan.seed,
                                {"m": m, "N": plan.N, "trials": plan.trials, "model": model.to_json()})

    if model.is_point_mass_mixture:
        # each component produces a constant sequence almost surely: integrate exactly
        pmf: dict = {}
        for w, comp in zip(model.weights, model.components):
            c = comp.index(Fraction(1))
            for word, p in resample_truncated([c] * plan.N, m, plan.N).pmf.items():
                pmf[word] = pmf.get(word, Fraction(0)) + w * p
        got = {k: v for k, v in pmf.items() if v}
        equal = got == dict(exact.pmf)
        report.add("point-mass mixture: exact equality", float(total_variation(exact, exact) if equal else 1),
                   0.0, equal, mode="exact", detail={"resampled": got, "expected": dict(exact.pmf)})
        report.notes.append("point-mass components give a.s. constant sequences; the mixture integral is exact")
        return report

    plan.require_probabilistic()
    words = _words(model.alphabet, m)

    def trial(i, rng):
        x = SequencePrefix("finite", model.sample(rng, plan.N), model.alphabet)
        perm = resample_truncated(x, m, plan.N)
        prod_ = resample_truncated(x, m, plan.N, with_replacement=True)
        return [float(perm[w]) for w in words], [float(prod_[w]) for w in words]

    rows = plan.map_trials(trial)
    perm = np.array([r[0] for r in rows])
    prod_ = np.array([r[1] for r in rows])
    # sampling with instead of without replacement moves each word by at most m(m-1)/(2N)
    bias = m * (m - 1) / (2 * plan.N)
    for j, w in enumerate(words):
        target = float(exact[w])
        for name, est, allowance in (("permutation", perm[:, j], 0.0), ("product", prod_[:, j], bias)):
            mean, se = _mean_se(est)
            ok = abs(mean - target) <= plan.slack * se + allowance + 1e-15
            report.add(f"{name} P{w}", mean, target, ok, stderr=se, mode="two-sided",
                       detail={"exact": exact[w], "bias_allowance": allowance})
    report.notes.append(f"two-sided: |estimate - exact| <= {plan.slack} * stderr over {plan.trials} trials")
    report.notes.append(f"product estimator: plus its deterministic bias bound m(m-1)/(2N) = {bias:.3g}")
    return report


# sixth moment -----------------------------------------------------------------------


def check_sixth_moment(configs: Iterable[tuple]) -> VerificationReport:
    """Exact equality of brute-force and cumulant values of ``E[D^6]``."""
    report = VerificationReport("sixth_moment", 0, {})
    for law, n, m in configs:
        try:
            brute, formula = sixth_moment_oracle(law, n, m)
        except EnumerationTooLarge as exc:
            report.add(f"n={n} m={m}", math.nan, None, False, mode="exact", detail={"error": str(exc)})
            continue
        report.add(f"|support|={len(law)} n={n} m={m}", float(brute), float(formula), brute == formula,
                   mode="exact", detail={"brute_force": brute, "cumulant_formula": formula})
    report.notes.append("kappa_j(D) = ((m-n)^j n + (-n)^j (m-n)) kappa_j(Z) by block additivity")
    return report


# concentration -------------------------------------------------------------------------


def _sum_moments(law: dict[Fraction, Fraction], count: int, order: int) -> list[Fraction]:
    """Exact raw moments of a sum of ``count`` IID copies, by convolving the law."""
    dist = {Fraction(0): Fraction(1)}
    for _ in range(count):
        nxt: dict = {}
        for s, p in dist.items():
            for v, q in law.items():
                nxt[s + v] = nxt.get(s + v, Fraction(0)) + p * q
        dist = nxt
    return [sum((p * s**k for s, p in dist.items()), Fraction(0)) for k in range(order + 1)]


def exact_sixth_moment(law: dict[Fraction, Fraction], n: int, m: int) -> Fraction:
    """``E[D^6]`` from the exact laws of the two independent block sums."""
    a = _sum_moments(law, n, 6)
    b = _sum_moments(law, m - n, 6)
    return sum(math.comb(6, k) * (m - n) ** k * a[k] * (-n) ** (6 - k) * b[6 - k] for k in range(7))


DEFAULT_CONCENTRATION_GRID = {
    "bernoulli": ((10, 20), (20, 40), (40, 80)),
    "uniform01": ((25, 50), (50, 100), (100, 200)),
}


def verify_concentration(p, plan: TrialPlan, grid: Sequence[tuple[int, int]] | None = None) -> VerificationReport:
    """Sixth-moment and tail checks for averages of ``[0, 1]``-valued IID draws.

    (a) ``E[D^6] / (n^3 m^6) <= C`` with ``C`` from :func:`universal_sixth_moment_constant`
    (exact for finite rational laws, Monte Carlo otherwise).
    (b) ``P(|S_n/n - S_m/m| > eps) <= C / (eps^6 n^3)`` by Markov's inequality applied to ``D^6``.
    """
    d = _as_distribution(p)
    if not d.bounded01:
        raise ValueError(f"{d.name} is not supported in [0, 1]")
    plan.require_probabilistic()
    grid = tuple(grid or DEFAULT_CONCENTRATION_GRID.get(d.name, ((10, 20), (20, 40), (40, 80))))
    if any(not 1 <= n <= m for n, m in grid):
        raise ValueError("every grid point needs 1 <= n <= m")
    C = universal_sixth_moment_constant()
    report = VerificationReport("concentration", plan.seed,
                                {"dist": d.to_json(), "grid": [list(g) for g in grid], "eps": list(plan.eps),
                                 "trials": plan.trials, "constant": C})
    report.notes.append(
        f"C = {C} = K6 + 15 K4 K2 + 10 K3^2 + 15 K2^3 with |kappa_j(Z)| <= K_j for [0,1] laws "
        "(K2 = K3 = 1/4, K4 = 7/16, K6 = 73/32) and |kappa_j(D)| <= K_j n m^j for m >= n"
    )
    law = rational_law(d)
    m_max = max(m for _, m in grid)

    def trial(i, rng):
        return d.sample(rng, m_max)

    draws = np.stack(plan.map_trials(trial))
    for n, m in grid:
        scale = float(n) ** 3 * float(m) ** 6
        s_n = draws[:, :n].sum(axis=1)
        s_m = draws[:, :m].sum(axis=1)
        if law is not None:
            e6 = exact_sixth_moment(law, n, m)
            ratio = float(e6 / (n**3 * m**6))
            report.add(f"E[D^6]/(n^3 m^6) n={n} m={m} exact", ratio, float(C), ratio <= C, mode="exact",
                       detail={"E[D^6]": e6})
        else:
            dvals = (m - n) * s_n - n * (s_m - s_n)
            mean, se = _mean_se(dvals**6 / scale)
            report.add(f"E[D^6]/(n^3 m^6) n={n} m={m} MC", mean, float(C), mean <= float(C) + plan.slack * se,
                       stderr=se)
        gap = np.abs(s_n / n - s_m / m)
        for eps in plan.eps:
            est, se = _proportion(int(np.count_nonzero(gap > eps)), plan.trials)
            bound = float(C) / (eps**6 * n**3)
            report.add(f"P(|S_n/n-S_m/m|>{eps}) n={n} m={m}", est, bound, est <= bound + plan.slack * se,
                       stderr=se, detail={"bound_over_estimate": bound / est if est else math.inf})
    return report


def _sup_gap_nested(values: np.ndarray, n: int, m: int) -> float:
    """``sup_t |F_n(t) - F_m(t)|`` for the prefixes of length ``n`` and ``m``."""
    pts = np.unique(values[:m])
    fn = np.searchsorted(np.sort(values[:n]), pts, side="right") / n
    fm = np.searchsorted(np.sort(values[:m]), pts, side="right") / m
    return float(np.max(np.abs(fn - fm)))


def verify_ecdf_concentration(p, plan: TrialPlan, ns: Sequence[int] = (100, 1000),
                              ratio: int = 2) -> VerificationReport:
    """Exceedance probability of ``sup_t |F_n - F_m|`` with ``m = ratio * n``.

    The envelope is ``C' / (eps^6 n^2)``: the sup is attained at one of ``2n`` points,
    each exceeding with probability at most ``C / ((eps - 1/n)^6 n^3)``.  The report
    asserts that ``estimate * eps^6 * n^2`` does not increase along ``ns``.
    """
    d = _as_distribution(p)
    plan.require_probabilistic()
    ns = tuple(sorted(ns))
    C = float(universal_sixth_moment_constant())
    report = VerificationReport("ecdf_concentration", plan.seed,
                                {"dist": d.to_json(), "ns": list(ns), "ratio": ratio, "eps": list(plan.eps),
                                 "trials": plan.trials})

    def trial(i, rng):
        x = d.sample(rng, ratio * ns[-1])
        return [_sup_gap_nested(x, n, ratio * n) for n in ns]

    gaps = np.array(plan.map_trials(trial))
    report.raw.update({f"sup_gap_n{n}": gaps[:, j].tolist() for j, n in enumerate(ns)})
    for eps in plan.eps:
        scaled = []
        for j, n in enumerate(ns):
            est, se = _proportion(int(np.count_nonzero(gaps[:, j] > eps)), plan.trials)
            envelope = 2 * C / ((eps - 1 / n) ** 6 * n**2) if eps > 1 / n else math.inf
            report.add(f"P(sup|F_n-F_m|>{eps}) n={n}", est, envelope, est <= envelope + plan.slack * se,
                       stderr=se)
            scaled.append((est * eps**6 * n**2, se * eps**6 * n**2))
        for (a, sa), (b, sb), n0, n1 in zip(scaled, scaled[1:], ns, ns[1:]):
            tol = plan.slack * math.hypot(sa, sb)
            report.add(f"eps^6 n^2 P non-increasing {n0}->{n1} eps={eps}", b - a, tol, b <= a + tol,
                       stderr=math.hypot(sa, sb), detail={"scaled": [a, b]})
    return report


# maximal ergodic -------------------------------------------------------------------------


def verify_maximal_ergodic(p, r: float, n_max: int, plan: TrialPlan) -> VerificationReport:
    """``P(max_{n <= n_max} mean_n > r) <= E[Y_1] / r``.

    Truncating the supremum at ``n_max`` can only lower the left side, so a pass
    at finite ``n_max`` is sound evidence for the untruncated bound.
    """
    d = _as_distribution(p)
    if not r > 0:
        raise ValueError("r must be positive")
    plan.require_probabilistic()
    mean = d.mean
    if not math.isfinite(mean) or mean < 0:
        raise ValueError(f"{d.name} needs a finite nonnegative mean")
    steps = np.arange(1, n_max + 1, dtype=np.float64)

    def trial(i, rng):
        y = d.sample(rng, n_max)
        if np.any(y < 0):
            raise ValueError("maximal ergodic check needs nonnegative draws")
        return float(np.max(np.cumsum(y) / steps))

    sups = np.array(plan.map_trials(trial))
    est, se = _proportion(int(np.count_nonzero(sups > r)), plan.trials)
    bound = mean / r
    report = VerificationReport("maximal_ergodic", plan.seed,
                                {"dist": d.to_json(), "r": r, "n_max": n_max, "trials": plan.trials})
    report.add(f"P(sup running mean > {r})", est, bound, est <= bound + plan.slack * se, stderr=se)
    report.notes.append("sup truncated at n_max underestimates the full sup, so the one-sided check stays sound")
    report.raw["max_running_mean"] = sups.tolist()
    return report


# Glivenko-Cantelli ------------------------------------------------------------------------


def ks_distance(values: np.ndarray, d: Distribution) -> float:
    """``sup_t |F_n(t) - F(t)|`` against the analytic CDF of ``d``.

    Both CDFs are checked at every sample point from the right and from the left,
    plus at the atoms of ``d`` inside the sample range.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.size
    pts = np.unique(np.concatenate([v, d.atoms_between(v[0], v[-1])]))
    right = np.searchsorted(v, pts, side="right") / n
    left = np.searchsorted(v, pts, side="left") / n
    gap_r = np.abs(right - d.cdf(pts))
    gap_l = np.abs(left - d.cdf_left(pts))
    out = float(max(gap_r.max(), gap_l.max()))
    # between the last sample point and the first atom beyond it
    return max(out, float(abs(1.0 - d.cdf(v[-1]))) if d.discrete else 0.0, float(d.cdf_left(v[0])) if d.discrete else 0.0)


def verify_glivenko_cantelli(p, plan: TrialPlan, tol: float = 0.01,
                             checkpoints: Sequence[int] | None = None) -> VerificationReport:
    """Uniform distance between empirical and true CDF at each checkpoint.

    Passes when the distance at ``N`` is below ``tol`` in every trial and the median
    distance decreases strictly along the checkpoints (ties at 0 allowed).
    """
    d = _as_distribution(p)
    plan.require_probabilistic()
    cps = tuple(checkpoints or [c for c in (10**3, 10**4, 10**5, 10**6) if c < plan.N] + [plan.N])

    def trial(i, rng):
        x = d.sample(rng, cps[-1])
        return [ks_distance(x[:n], d) for n in cps]

    sups = np.array(plan.map_trials(trial))
    report = VerificationReport("glivenko_cantelli", plan.seed,
                                {"dist": d.to_json(), "checkpoints": list(cps), "tol": tol, "trials": plan.trials})
    worst = float(sups[:, -1].max())
    report.add(f"max over trials of sup|F_N - F| (N={cps[-1]})", worst, tol, worst < tol, mode="property",
               detail={"trials_below_tol": int(np.count_nonzero(sups[:, -1] < tol))})
    medians = np.median(sups, axis=0)
    for a, b, n0, n1 in zip(medians, medians[1:], cps, cps[1:]):
        ok = b < a or (a == 0 and b == 0)
        report.add(f"median sup decreases {n0}->{n1}", float(b), float(a), ok, mode="property")
    report.raw.update({f"sup_n{n}": sups[:, j].tolist() for j, n in enumerate(cps)})
    return report


# strong law -----------------------------------------------------------------------------


def verify_slln(p, plan: TrialPlan, tol: float = 0.01, min_fraction: float = 0.99,
                counter_fraction: float = 0.9) -> VerificationReport:
    """Running means at ``N`` hit the analytic mean; without a mean they must not settle.

    For laws with a finite mean, at least ``min_fraction`` of trials must satisfy
    ``|mean_N - E X| < tol``.  For laws without one (Cauchy), at least
    ``counter_fraction`` of trials must fail the averaged-domain Cauchy surrogate,
    so that the averaged classifier never certifies a stable mean there.
    """
    d = _as_distribution(p)
    plan.require_probabilistic()
    mu = d.mean
    report = VerificationReport("slln", plan.seed, {"dist": d.to_json(), "N": plan.N, "tol": tol,
                                                    "trials": plan.trials})
    if math.isfinite(mu):
        def trial(i, rng):
            return math.fsum(d.sample(rng, plan.N).tolist()) / plan.N

        means = np.array(plan.map_trials(trial))
        within = int(np.count_nonzero(np.abs(means - mu) < tol))
        frac = within / plan.trials
        report.add(f"fraction |mean_N - {mu:g}| < {tol}", frac, min_fraction, frac >= min_fraction,
                   mode="property", detail={"within": within, "worst_error": float(np.abs(means - mu).max())})
        report.raw["mean_N"] = means.tolist()
        return report

    schedule = HorizonSchedule.default(plan.N)

    def trial(i, rng):
        x = SequencePrefix("real", d.sample(rng, plan.N))
        crit = average_criterion(x, schedule)
        return crit["cauchy"], crit["spread"]

    rows = plan.map_trials(trial)
    failing = sum(1 for settled, _ in rows if not settled)
    frac = failing / plan.trials
    report.add("fraction of trials whose averages fail the Cauchy surrogate", frac, counter_fraction,
               frac >= counter_fraction, mode="property", detail={"failing": failing, "eps": schedule.eps})
    report.notes.append("no finite mean: the averaged classifier must not certify a stable empirical mean")
    report.raw["average_spread"] = [s for _, s in rows]
    return report


# resampling idempotence ---------------------------------------------------------------


def verify_resampling_idempotence(source, plan: TrialPlan, m: int = 2,
                                  horizons: Sequence[int] = (100, 1000, 10000),
                                  mc_draws: int = 200) -> VerificationReport:
    """Total variation between resampling once and resampling twice.

    Once: ``m`` symbols from a uniformly random permutation of ``x[:n]``.  Twice:
    draw ``n`` symbols IID from the empirical measure of ``x[:n]``, then permute
    and take ``m``.  Both laws are exact; the distance must decrease strictly along
    ``horizons`` (or vanish throughout).  A Monte Carlo replay of the second stage
    is reported as a cross-check of the exact two-stage law.
    """
    horizons = tuple(sorted(horizons))
    report = VerificationReport("resampling_idempotence", plan.seed,
                                {"m": m, "horizons": list(horizons), "trials": plan.trials})
    if isinstance(source, MixtureModel) and source.is_point_mass_mixture:
        ok = True
        for comp in source.components:
            x = [comp.index(Fraction(1))] * horizons[-1]
            for n in horizons:
                ok &= resample_truncated(x, m, n) == two_stage_resample(x, m, n)
        report.add("point-mass mixture: once == twice", 0.0 if ok else 1.0, 0.0, ok, mode="exact")
        return report

    draw, kind = _sampler(source, symbols=True)
    if kind != "finite":
        raise ValueError("resampling idempotence needs a finite alphabet")

    def trial(i, rng):
        x = draw(rng, horizons[-1])
        tvs = [total_variation(resample_truncated(x, m, n), two_stage_resample(x, m, n)) for n in horizons]
        mc = None
        if i == 0 and mc_draws:
            mc = _mc_two_stage_gap(x, m, horizons[0], mc_draws, rng)
        return tvs, mc

    rows = plan.map_trials(trial)
    strict = 0
    for tvs, _ in rows:
        strict += all(b < a for a, b in zip(tvs, tvs[1:])) or all(t == 0 for t in tvs)
    tv = np.array([[float(t) for t in tvs] for tvs, _ in rows])
    frac = strict / plan.trials
    report.add("trials with strictly decreasing TV", frac, 1.0, frac == 1.0, mode="property")
    for j, n in enumerate(horizons):
        report.add(f"mean TV(once, twice) n={n}", float(tv[:, j].mean()), None, True, mode="property",
                   stderr=float(tv[:, j].std(ddof=1) / math.sqrt(tv.shape[0])) if tv.shape[0] > 1 else 0.0)
    mc = rows[0][1]
    if mc is not None:
        gap, se = mc
        report.add(f"MC two-stage vs exact, n={horizons[0]}", gap, 0.0, gap <= plan.slack * se + 1e-12,
                   stderr=se, mode="two-sided")
    report.raw.update({f"tv_n{n}": tv[:, j].tolist() for j, n in enumerate(horizons)})
    report.notes.append("both laws are exact at every horizon; only the set of horizons is finite, "
                        "so no inequality is weakened by truncation")
    return report


def _mc_two_stage_gap(x: SequencePrefix, m: int, n: int, draws: int, rng: np.random.Generator):
    """Largest standardised gap between a Monte Carlo two-stage law and the exact one."""
    exact = two_stage_resample(x, m, n)
    counts = np.bincount(x.values[:n], minlength=x.alphabet_size)
    probs = counts / n
    words = list(exact.pmf) or [tuple([0] * m)]
    samples = np.empty((draws, len(words)))
    for r in range(draws):
        y = rng.choice(x.alphabet_size, size=n, p=probs)
        law = resample_truncated(SequencePrefix("finite", y, x.alphabet_size), m, n)
        samples[r] = [float(law[w]) for w in words]
    means = samples.mean(axis=0)
    ses = samples.std(axis=0, ddof=1) / math.sqrt(draws)
    target = np.array([float(exact[w]) for w in words])
    j = int(np.argmax(np.abs(means - target) - 4 * ses))
    return float(abs(means[j] - target[j])), float(ses[j])
