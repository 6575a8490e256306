import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import stats

from quasimarkov.distributions import make_distribution, rng_for
from quasimarkov.sequences import MixtureModel
from quasimarkov.verify import (
    TrialPlan,
    check_sixth_moment,
    ks_distance,
    verify_concentration,
    verify_ecdf_concentration,
    verify_empirical_adequacy,
    verify_glivenko_cantelli,
    verify_maximal_ergodic,
    verify_permutation_invariance,
    verify_resampling_idempotence,
    verify_slln,
)

HALF = F(1, 2)
md = make_distribution


def plan(**kw):
    return TrialPlan(**{"trials": 100, **kw})


def test_plan_validation():
    with pytest.raises(ValueError):
        TrialPlan(trials=0)
    with pytest.raises(ValueError):
        TrialPlan(trials=10, seed=-1)
    with pytest.raises(ValueError):
        verify_slln(md("exponential"), TrialPlan(trials=50))


def test_threads_do_not_change_reports():
    a = verify_maximal_ergodic(md("exponential"), 2.0, 500, plan(workers=1))
    b = verify_maximal_ergodic(md("exponential"), 2.0, 500, plan(workers=4))
    assert a.dumps() == b.dumps()


def test_report_is_deterministic_and_auditable():
    r1 = verify_concentration(md("bernoulli", {"p": 0.5}), plan(eps=(0.2,)))
    r2 = verify_concentration(md("bernoulli", {"p": 0.5}), plan(eps=(0.2,)))
    assert r1.dumps() == r2.dumps()
    doc = json.loads(r1.dumps())
    assert doc["schema"].startswith("quasimarkov.report/")
    for case in doc["cases"]:
        assert {"estimate", "stderr", "bound", "passed"} <= set(case)
    assert "153/32" in r1.notes[0]


# KS distance oracle ------------------------------------------------------------------


@pytest.mark.parametrize("name,ref", [("uniform01", stats.uniform()), ("normal", stats.norm())])
def test_ks_matches_scipy(name, ref):
    x = md(name).sample(rng_for(1), 500)
    assert ks_distance(x, md(name)) == pytest.approx(stats.kstest(x, ref.cdf).statistic, abs=1e-12)


def test_ks_discrete_brute_force():
    d = md("geometric", {"p": 0.4})
    x = d.sample(rng_for(2), 300)
    grid = np.arange(0, x.max() + 3, 0.5)
    brute = max(abs(np.mean(x <= t) - d.cdf(t)) for t in grid)
    assert ks_distance(x, d) == pytest.approx(brute, abs=1e-12)


def test_ks_point_mass_zero():
    assert ks_distance(np.full(100, 3.0), md("constant", {"c": 3.0})) == 0.0


# suites --------------------------------------------------------------------------------


def test_gc_examples():
    assert verify_glivenko_cantelli(md("uniform01"), plan(N=100_000, seed=1)).passed
    r = verify_glivenko_cantelli(md("constant", {"c": 2.0}), plan(N=10_000))
    assert r.passed and max(r.raw["sup_n10000"]) == 0


def test_slln_examples():
    r = verify_slln(md("constant", {"c": 1.5}), plan(N=1000))
    assert r.passed and set(r.raw["mean_N"]) == {1.5}
    assert verify_slln(md("cauchy"), plan(N=20_000)).passed


def test_maximal_ergodic_examples():
    assert verify_maximal_ergodic(md("exponential"), 2.0, 2000, plan()).passed
    huge = verify_maximal_ergodic(md("exponential"), 1e6, 100, plan())
    assert huge.cases[0].estimate == 0
    c = verify_maximal_ergodic(md("constant", {"c": 3.0}), 2.0, 100, plan())
    assert c.cases[0].estimate == 1 and c.cases[0].bound == 1.5 and c.passed


def test_concentration_examples():
    r = verify_concentration(md("bernoulli", {"p": 0.5}), plan(eps=(0.2,)))
    assert r.passed
    assert [c.label for c in r.cases if "exact" in c.label]
    const = verify_concentration(md("constant", {"c": 0.3}), plan(eps=(0.1,)))
    assert const.passed and all(c.estimate == 0 for c in const.cases)
    u = verify_concentration(md("uniform01"), plan(eps=(0.1,)), grid=[(100, 200)])
    tail = [c for c in u.cases if c.label.startswith("P(")][0]
    assert tail.estimate < 0.01 * tail.bound


def test_concentration_rejects_unbounded_laws():
    with pytest.raises(ValueError):
        verify_concentration(md("exponential"), plan())


def test_ecdf_concentration_examples():
    assert verify_ecdf_concentration(md("uniform01"), plan()).passed
    r = verify_ecdf_concentration(md("constant", {"c": 1.0}), plan())
    assert r.passed and max(r.raw["sup_gap_n100"]) == 0
    # two-point law: the ECDF gap is the frequency gap at the lower atom (eps avoids k/20 ties)
    b = verify_ecdf_concentration(md("bernoulli", {"p": 0.5}), plan(eps=(0.22,)), ns=(10, 20))
    c = verify_concentration(md("bernoulli", {"p": 0.5}), plan(eps=(0.22,)), grid=[(10, 20), (20, 40)])
    ecdf = [x.estimate for x in b.cases if x.label.startswith("P(")]
    tail = [x.estimate for x in c.cases if x.label.startswith("P(")]
    assert ecdf == tail


def test_empirical_adequacy_examples():
    dirac = MixtureModel(2, (HALF, HALF), ((1, 0), (0, 1)))
    r = verify_empirical_adequacy(dirac, 2, plan(trials=1))
    assert r.passed and r.cases[0].mode == "exact"
    iid = MixtureModel(2, (1,), ((F(1, 3), F(2, 3)),))
    r = verify_empirical_adequacy(iid, 1, plan(N=1000))
    assert r.passed
    for case in r.cases:
        assert abs(case.estimate - case.bound) <= 4 / math.sqrt(100 * 1000) + 4 * case.stderr
    weighted = MixtureModel(2, (1, 0), ((F(1, 3), F(2, 3)), (HALF, HALF)))
    assert verify_empirical_adequacy(weighted, 2, plan(N=1000)).passed


def test_sixth_moment_report():
    r = check_sixth_moment([({0: HALF, 1: HALF}, 1, 2), ({0: F(1, 3), 1: F(2, 3)}, 2, 4)])
    assert r.passed and r.cases[0].estimate == 0.5


def test_permutation_invariance_examples():
    assert verify_permutation_invariance(md("constant", {"c": 1.0}), plan(N=2000)).passed
    fair = MixtureModel(2, (1,), ((HALF, HALF),))
    assert verify_permutation_invariance(fair, plan(N=2000)).passed
    with pytest.raises(ValueError):
        verify_permutation_invariance(fair, plan(N=400), k=100)


def test_resampling_idempotence_examples():
    r = verify_resampling_idempotence(md("constant", {"c": 0}), plan(), mc_draws=0)
    assert r.passed and all(max(v) == 0 for v in r.raw.values())
    assert verify_resampling_idempotence(md("bernoulli", {"p": 0.5}), plan(), mc_draws=30).passed
    dirac = MixtureModel(2, (HALF, HALF), ((1, 0), (0, 1)))
    assert verify_resampling_idempotence(dirac, plan()).cases[0].mode == "exact"


def test_csv_export():
    r = verify_maximal_ergodic(md("exponential"), 2.0, 100, plan())
    lines = r.to_csv().splitlines()
    assert lines[0] == "trial,max_running_mean" and len(lines) == 101
