"""Abstaining aggregation over almost-ERMs and its l_q formulation.

Both learners share one pipeline: ERM and the almost-ERM set on the first
half of the sample, midpoints between the ERM and each almost-ERM, then a
minimization on the second half.  The abstaining learner charges
``1/2 - p`` per abstention; the l_q learner charges ``2**-q`` (the loss of
predicting 1/2).  With ``1/2 - p = 2**-q`` the two objectives coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    STAR,
    AbstainingHypothesis,
    FiniteDistribution,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    lq_risk,
    population_reject_risk,
)
from .erm import almost_erm_set
from .errors import ValidationError

P_CLAMP = 0.25

# Objective values closer than this are ties (they are rationals with small
# denominators, so genuine differences are far larger).
TIE_TOL = 1e-12


def q_from_p(p: float) -> float:
    """q with 1/2 - p = 2**-q, defined for p in [0, 1/4]."""
    if not (0.0 <= p <= P_CLAMP):
        raise ValidationError(f"q_from_p needs p in [0, 1/4] (clamp first), got {p!r}")
    return math.log2(1.0 / (0.5 - p))


def midpoint(f: Hypothesis, g: Hypothesis) -> AbstainingHypothesis:
    """(f + g)/2 with the value 1/2 replaced by ``*``."""
    a, b = f.labels, g.labels
    if a.size != b.size:
        raise ValidationError(f"domain size mismatch: {a.size} vs {b.size}")
    return AbstainingHypothesis(np.where(a == b, a, STAR))


@dataclass(frozen=True, eq=False)
class AbstainerModel:
    base_index: int
    partner_index: int
    base: Hypothesis
    partner: Hypothesis
    p: float
    provenance: dict = field(default_factory=dict)

    @property
    def values(self) -> AbstainingHypothesis:
        return midpoint(self.partner, self.base)

    @property
    def abstain_atoms(self) -> list[int]:
        return np.flatnonzero(self.base.labels != self.partner.labels).tolist()

    @property
    def m(self) -> int:
        return self.base.m

    def to_json(self) -> dict:
        return {"base": self.base_index, "partner": self.partner_index,
                "p": self.p, "abstain_atoms": self.abstain_atoms}

    def __eq__(self, other):
        if not isinstance(other, AbstainerModel):
            return NotImplemented
        return self.to_json() == other.to_json() and self.base == other.base \
            and self.partner == other.partner


def _check_split(cls: HypothesisClass, s: LabeledSample) -> tuple[LabeledSample, LabeledSample]:
    if len(cls) == 0:
        raise ValidationError("class must be nonempty")
    if len(s) < 2 or len(s) % 2:
        raise ValidationError(f"sample size must be even and >= 2, got {len(s)}")
    if s.m != cls.m:
        raise ValidationError(f"domain size mismatch: class m={cls.m}, sample m={s.m}")
    first, second = s.split(2)
    return first, second


def _select(cls: HypothesisClass, first: LabeledSample, second: LabeledSample,
            delta: float, c: float, star_cost: float) -> tuple[int, int, tuple[int, ...]]:
    fhat = almost_erm_set(cls, first, delta, c)
    g = fhat.erm_index
    cand = np.asarray(fhat.members, dtype=np.int64)
    base = cls.members[g]
    dis = (cls.members[cand] != base).astype(np.int64)        # (K', m)
    ones, zeros = second.label_counts()
    base_err = np.where(base == 1, zeros, ones)                # per-atom mistakes of g
    counts = ones + zeros
    committed = (1 - dis) @ base_err
    abstained = dis @ counts
    obj = (committed + star_cost * abstained) / len(second)
    n_star = dis.sum(axis=1)
    tied = np.flatnonzero(obj <= obj.min() + TIE_TOL)
    # fewest abstaining atoms, then lowest partner index
    pick = tied[np.lexsort((cand[tied], n_star[tied]))[0]]
    return g, int(cand[pick]), fhat.members


def abstaining_learner(cls: HypothesisClass, s: LabeledSample, delta: float, p: float,
                       c: float = 1.0) -> AbstainerModel:
    """Abstaining learner on a sample of size 2n.

    ``p`` above 1/4 is clamped to 1/4 before the second-half minimization.
    """
    if not (0.0 <= p <= 0.5):
        raise ValidationError(f"p must lie in [0, 1/2], got {p!r}")
    first, second = _check_split(cls, s)
    p_eff = min(p, P_CLAMP)
    g, partner, fhat = _select(cls, first, second, delta, c, 0.5 - p_eff)
    return AbstainerModel(g, partner, cls[g], cls[partner], p_eff, {
        "c": c, "delta": delta, "requested_p": p, "split": "first half / second half",
        "almost_erm_size": len(fhat),
    })


def aggregate_lq(cls: HypothesisClass, s: LabeledSample, delta: float, q: float,
                 c: float = 1.0) -> AbstainerModel:
    """Same pipeline, minimizing the empirical l_q risk (``*`` read as 1/2)."""
    if not (1.0 < q <= 2.0):
        raise ValidationError(f"q must lie in (1, 2], got {q!r}")
    first, second = _check_split(cls, s)
    star_cost = 2.0 ** (-q)
    g, partner, fhat = _select(cls, first, second, delta, c, star_cost)
    return AbstainerModel(g, partner, cls[g], cls[partner], 0.5 - star_cost, {
        "c": c, "delta": delta, "q": q, "split": "first half / second half",
        "almost_erm_size": len(fhat),
    })


def empirical_lq_risk(g: AbstainingHypothesis, s: LabeledSample, q: float) -> float:
    if len(s) == 0:
        raise ValidationError("empirical risk of an empty sample is undefined")
    real = g.as_real()[s.xs]
    return float(np.mean(np.abs(real - s.ys) ** q))


def reject_excess_risk(model: AbstainerModel, dist: FiniteDistribution, p: float,
                       fstar_risk: float) -> float:
    """R^p(model) - R(f*); negative values are legitimate."""
    return population_reject_risk(model.values, dist, p) - fstar_risk


def lq_excess_risk(model: AbstainerModel, dist: FiniteDistribution, q: float,
                   fstar_risk: float) -> float:
    return lq_risk(model.values, dist, q) - fstar_risk
