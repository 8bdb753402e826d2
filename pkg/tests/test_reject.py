
import numpy as np
import pytest

from rejectlab import (
    STAR,
    AbstainingHypothesis,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    ValidationError,
    abstaining_learner,
    aggregate_lq,
    midpoint,
    q_from_p,
    reject_excess_risk,
    sample,
)
from rejectlab.reject import AbstainerModel, empirical_lq_risk

from conftest import random_class, random_dist
from oracles import oracle_abstainer

H = Hypothesis.from_string


def test_q_from_p():
    assert q_from_p(0.0) == 1.0
    assert q_from_p(0.25) == 2.0
    assert q_from_p(0.1) == pytest.approx(1.321928, abs=1e-6)
    with pytest.raises(ValidationError):
        q_from_p(0.3)


def test_midpoint_examples():
    assert str(midpoint(H("0110"), H("0110"))) == "0110"
    assert str(midpoint(H("0000"), H("1111"))) == "****"
    assert str(midpoint(H("1111"), H("1110"))) == "111*"
    with pytest.raises(ValidationError):
        midpoint(H("01"), H("011"))


def test_singleton_class_never_abstains():
    cls = HypothesisClass.from_strings(["0110"])
    s = LabeledSample.from_pairs([(0, 1), (1, 0), (2, 1), (3, 1)], m=4)
    for p in (0.0, 0.25, 0.5):
        model = abstaining_learner(cls, s, 0.1, p)
        assert model.abstain_atoms == [] and model.values == H("0110")
    assert aggregate_lq(cls, s, 0.1, 2.0).values == H("0110")


def test_sample_size_checks(antipodal4):
    with pytest.raises(ValidationError):
        abstaining_learner(antipodal4, LabeledSample.from_pairs([(0, 1)] * 3, m=4), 0.1, 0.1)
    with pytest.raises(ValidationError):
        abstaining_learner(antipodal4, LabeledSample.from_pairs([(0, 1)] * 4, m=4), 0.1, 0.7)
    with pytest.raises(ValidationError):
        aggregate_lq(antipodal4, LabeledSample.from_pairs([(0, 1)] * 4, m=4), 0.1, 1.0)


def test_p_above_quarter_is_clamped():
    rng = np.random.default_rng(0)
    for _ in range(50):
        cls = random_class(rng, 5, 6)
        s = sample(random_dist(rng, 5), 2 * int(rng.integers(1, 10)), rng)
        a = abstaining_learner(cls, s, 0.1, 0.3)
        b = abstaining_learner(cls, s, 0.1, 0.25)
        assert a == b and a.to_json() == b.to_json()
        assert a.p == 0.25 and a.provenance["requested_p"] == 0.3


def test_abstention_set_is_disagreement_set():
    rng = np.random.default_rng(1)
    for _ in range(100):
        cls = random_class(rng, 6, 8)
        s = sample(random_dist(rng, 6), 20, rng)
        model = abstaining_learner(cls, s, 0.1, 0.1)
        dis = np.flatnonzero(model.base.labels != model.partner.labels).tolist()
        assert model.values.abstain_atoms == dis == model.abstain_atoms
        assert len(dis) <= cls.diameter
        assert cls.index_of(model.base) == model.base_index
        assert cls.index_of(model.partner) == model.partner_index


def test_lq_learner_equals_reject_learner_under_calibration():
    rng = np.random.default_rng(2)
    for _ in range(200):
        cls = random_class(rng, 5, 7)
        s = sample(random_dist(rng, 5), 2 * int(rng.integers(1, 8)), rng)
        p = float(rng.choice([0.0, 0.05, 0.1, 0.2, 0.25, 0.4]))
        q = q_from_p(min(p, 0.25))
        if q <= 1.0:
            continue  # l_q learner requires q > 1
        a = abstaining_learner(cls, s, 0.1, p)
        b = aggregate_lq(cls, s, 0.1, q)
        assert (a.base_index, a.partner_index) == (b.base_index, b.partner_index)


def test_empirical_lq_risk_hand_sum():
    g = AbstainingHypothesis.from_string("1*0*")
    s = LabeledSample.from_pairs([(0, 1), (1, 1), (2, 1), (3, 0), (1, 0), (0, 0)], m=4)
    q = 1.5
    hand = (0 + 0.5 ** q + 1 + 0.5 ** q + 0.5 ** q + 1) / 6
    assert empirical_lq_risk(g, s, q) == pytest.approx(hand, abs=1e-12)


def test_reject_excess_examples(uniform4, antipodal4):
    fstar = H("1111")
    model = AbstainerModel(1, 1, fstar, fstar, 0.25)
    assert reject_excess_risk(model, uniform4, 0.25, 0.25) == 0.0
    # base 1111, partner 1110: abstains on atom 3 and predicts 1 elsewhere
    model = AbstainerModel(1, 0, H("1111"), H("1110"), 0.25)
    assert str(model.values) == "111*"
    assert reject_excess_risk(model, uniform4, 0.25, 0.25) == pytest.approx(-0.1875, abs=1e-15)


def test_reject_excess_resummation():
    rng = np.random.default_rng(9)
    for _ in range(100):
        cls = random_class(rng, 6, 5)
        dist = random_dist(rng, 6)
        s = sample(dist, 16, rng)
        p = float(rng.choice([0.0, 0.1, 0.25]))
        model = abstaining_learner(cls, s, 0.1, p)
        fr = float(rng.random())
        total = 0.0
        for x in range(6):
            v = model.values.values[x]
            if v == STAR:
                total += dist.weights[x] * (0.5 - p)
            else:
                total += dist.weights[x] * (dist.eta1[x] if v == 0 else 1 - dist.eta1[x])
        assert reject_excess_risk(model, dist, p, fr) == pytest.approx(total - fr, abs=1e-12)


# ---------------------------------------------------------------- brute force oracle


@pytest.mark.parametrize("seed", range(60))
def test_abstainer_matches_brute_force(seed):
    rng = np.random.default_rng(1000 + seed)
    m = int(rng.integers(1, 6))
    cls = random_class(rng, m, int(rng.integers(1, 7)))
    s = sample(random_dist(rng, m), 2 * int(rng.integers(1, 7)), rng)
    p = float(rng.choice([0.0, 0.1, 0.25, 0.4]))
    c = float(rng.choice([0.0, 0.5, 1.0]))
    model = abstaining_learner(cls, s, 0.2, p, c)
    assert (model.base_index, model.partner_index) == oracle_abstainer(cls, s, 0.2, p, c)


def test_tie_prefers_fewest_abstentions_then_lowest_index():
    # second half empty of information on atoms 2, 3: every candidate ties on risk
    cls = HypothesisClass.from_strings(["0000", "0001", "0011"])
    s = LabeledSample.from_pairs([(0, 0), (1, 0), (0, 0), (1, 0)], m=4)
    model = abstaining_learner(cls, s, 0.1, 0.25)
    assert model.partner_index == model.base_index == 0
