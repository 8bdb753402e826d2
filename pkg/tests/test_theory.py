import itertools
import math

import numpy as np
import pytest

from rejectlab import (
    FiniteDistribution,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    ValidationError,
    abstaining_learner,
    almost_erm_set,
    bernstein_estimate,
    excess_loss_deviation_check,
    identity_check_rp_lq,
    make_wellspecified_massart,
    population_minimizer,
    ratio_bound_check,
    sample,
    target_membership_check,
)
from rejectlab._parallel import stream
from rejectlab.reject import AbstainerModel
from rejectlab.theory import binary_excess_deviation

from conftest import random_class, random_dist

H = Hypothesis.from_string


def test_ratio_singleton_is_zero():
    cls = HypothesisClass.from_strings(["0101"])
    stat = ratio_bound_check(cls, FiniteDistribution.uniform([0.5] * 4), 50, 0.1, 20, 0)
    assert stat.trials == 20 and np.all(stat.values == 0.0)


def test_ratio_quantiles_are_order_statistics(massart4):
    stat = ratio_bound_check(massart4.cls, massart4.dist, 100, 0.05, 101, 3)
    srt = np.sort(stat.values)
    assert list(stat.quantiles) == sorted(stat.quantiles)
    for lv, q in zip(stat.levels, stat.quantiles):
        assert q in srt
        assert q == srt[max(math.ceil(lv * 101) - 1, 0)]


def test_ratio_deterministic_given_seed(massart4):
    a = ratio_bound_check(massart4.cls, massart4.dist, 80, 0.05, 30, 9)
    b = ratio_bound_check(massart4.cls, massart4.dist, 80, 0.05, 30, 9, workers=2)
    assert np.array_equal(a.values, b.values)


def test_ratio_small_at_large_n(massart4):
    stat = ratio_bound_check(massart4.cls, massart4.dist, 100_000, 0.05, 400, 0)
    assert stat.estimate < 0.5


def test_ratio_stable_across_seeds(massart4):
    ests = [ratio_bound_check(massart4.cls, massart4.dist, 200, 0.05, 1000, s).estimate
            for s in range(5)]
    mid = float(np.mean(ests))
    assert all(abs(e - mid) <= 0.2 * mid for e in ests)


def test_ratio_report_shape(massart4):
    rep = ratio_bound_check(massart4.cls, massart4.dist, 50, 0.1, 10, 0).to_report("ratio")
    assert set(rep) == {"check", "params", "trials", "quantiles", "pass_criteria_if_any"}
    assert "0.9" in rep["quantiles"]


def test_excess_loss_fstar_term_zero():
    cls = HypothesisClass.from_strings(["0110"])
    stat = excess_loss_deviation_check(cls, FiniteDistribution.uniform([0.3] * 4), 40, 0.1, 2.0,
                                       10, 0)
    assert np.all(stat.values == 0.0)


def test_excess_loss_q1_matches_indicator_sums(massart4):
    fstar, _, _ = population_minimizer(massart4.cls, massart4.dist)
    stat = excess_loss_deviation_check(massart4.cls, massart4.dist, 60, 0.1, 1.0, 25, 4)
    direct = [binary_excess_deviation(massart4.cls, massart4.dist,
                                      sample(massart4.dist, 60, stream(4, t)), fstar, 0.1)
              for t in range(25)]
    assert np.allclose(stat.values, direct, rtol=0, atol=1e-12)


def test_excess_loss_does_not_explode(massart4):
    for n in (100, 200, 400):
        a = excess_loss_deviation_check(massart4.cls, massart4.dist, n, 0.05, 1.5, 1000, 1).estimate
        b = excess_loss_deviation_check(massart4.cls, massart4.dist, 2 * n, 0.05, 1.5, 1000, 1).estimate
        assert math.isfinite(a) and b / a <= 1.5


def test_membership_singleton():
    cls = HypothesisClass.from_strings(["01"])
    assert target_membership_check(cls, FiniteDistribution.uniform([0.2, 0.9]), 10, 0.1, 1.0,
                                   20, 0) == 1.0


def exact_membership_probability(cls, dist, n, delta, c):
    fstar, _, _ = population_minimizer(cls, dist)
    total = 0.0
    outcomes = [(x, y) for x in range(dist.m) for y in (0, 1)]
    probs = {(x, y): dist.weights[x] * (dist.eta1[x] if y else 1 - dist.eta1[x]) for x, y in outcomes}
    for seq in itertools.product(outcomes, repeat=n):
        pr = math.prod(probs[o] for o in seq)
        if pr == 0:
            continue
        s = LabeledSample.from_pairs(seq, dist.m)
        total += pr * (fstar in almost_erm_set(cls, s, delta, c))
    return total


def test_membership_c_zero_small_n():
    cls = HypothesisClass.from_strings(["000", "011", "110"])
    dist = FiniteDistribution([0.5, 0.3, 0.2], [0.2, 0.7, 0.9])
    exact = exact_membership_probability(cls, dist, 3, 0.1, 0.0)
    assert exact < 1.0
    freq = target_membership_check(cls, dist, 3, 0.1, 0.0, 4000, 5)
    assert freq < 1.0
    assert abs(freq - exact) <= 4 * math.sqrt(exact * (1 - exact) / 4000)


def test_bernstein_well_specified_is_inverse_margin():
    rng = np.random.default_rng(0)
    for h in (1.0, 0.5, 0.25):
        cls = random_class(rng, 6, 8)
        w = rng.dirichlet(np.ones(6))
        con = make_wellspecified_massart(cls, 0, h, w)
        assert bernstein_estimate(con.cls, con.dist, 1.0) == pytest.approx(1 / h, rel=1e-12)


def test_bernstein_half_margin_fixture(massart4):
    assert bernstein_estimate(massart4.cls, massart4.dist, 1.0) == 2.0


def test_bernstein_zero_excess_is_infinite():
    cls = HypothesisClass.from_strings(["00", "01"])
    dist = FiniteDistribution([0.5, 0.5], [0.2, 0.5])
    assert math.isinf(bernstein_estimate(cls, dist, 1.0))


def test_bernstein_singleton_and_validation():
    cls = HypothesisClass.from_strings(["01"])
    dist = FiniteDistribution.uniform([0.2, 0.8])
    assert bernstein_estimate(cls, dist, 0.5) == 0.0
    with pytest.raises(ValidationError):
        bernstein_estimate(cls, dist, 1.5)


@pytest.mark.parametrize("seed", range(10))
def test_bernstein_nondecreasing_in_beta(seed):
    # excess <= 1, so excess**beta shrinks as beta grows and B can only grow
    rng = np.random.default_rng(seed)
    cls = random_class(rng, 5, 6)
    dist = random_dist(rng, 5)
    vals = [bernstein_estimate(cls, dist, b) for b in np.linspace(0, 1, 11)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_identity_examples(uniform4):
    f = H("1110")
    model = AbstainerModel(0, 0, f, f, 0.1)
    assert identity_check_rp_lq(model, uniform4, 0.0, 0.1) == 0.0
    allstar = AbstainerModel(0, 1, H("0000"), H("1111"), 0.25)
    assert identity_check_rp_lq(allstar, uniform4, 0.25, 0.25) == 0.0
    with pytest.raises(ValidationError):
        identity_check_rp_lq(model, uniform4, 0.0, 0.3)


def test_identity_random_fixtures():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(300):
        m = int(rng.integers(1, 9))
        cls = random_class(rng, m, int(rng.integers(1, 21)))
        dist = random_dist(rng, m)
        p = float(rng.choice([0.0, 0.1, 0.25]))
        model = abstaining_learner(cls, sample(dist, 2 * int(rng.integers(1, 20)), rng), 0.1, p)
        _, fr, _ = population_minimizer(cls, dist)
        worst = max(worst, identity_check_rp_lq(model, dist, fr, p))
    assert worst <= 1e-12
