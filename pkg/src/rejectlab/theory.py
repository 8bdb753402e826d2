"""Empirical checks of the deviation bounds, target membership, Bernstein
constants and the R^p / l_q identity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map, stream
from .core import (
    FiniteDistribution,
    HypothesisClass,
    class_risks,
    lq_risk,
    population_minimizer,
    population_reject_risk,
    sample,
)
from .erm import alpha, almost_erm_set, member_errors
from .errors import ValidationError
from .reject import AbstainerModel, q_from_p

DEFAULT_LEVELS = (0.5, 0.9, 0.95, 0.99)


@dataclass(frozen=True, eq=False)
class DeviationStatistic:
    """Per-trial worst-case normalized deviations and their order statistics."""

    values: np.ndarray
    levels: tuple[float, ...]
    quantiles: tuple[float, ...]
    target_level: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.size < 1:
            raise ValidationError("a deviation statistic needs at least one trial")

    @property
    def trials(self) -> int:
        return int(self.values.size)

    @property
    def estimate(self) -> float:
        """Quantile at the target level 1 - delta."""
        return self.quantile(self.target_level)

    def quantile(self, level: float) -> float:
        return float(np.quantile(self.values, level, method="inverted_cdf"))

    def to_report(self, check: str, pass_criteria=None) -> dict:
        return {
            "check": check,
            "params": self.params,
            "trials": self.trials,
            "quantiles": {f"{lv:g}": q for lv, q in zip(self.levels, self.quantiles)},
            "pass_criteria_if_any": pass_criteria,
        }


def _statistic(values, delta, params, levels=DEFAULT_LEVELS) -> DeviationStatistic:
    vals = np.asarray(values, dtype=float)
    lv = tuple(sorted(set(levels) | {1.0 - delta}))
    qs = tuple(float(np.quantile(vals, x, method="inverted_cdf")) for x in lv)
    return DeviationStatistic(vals, lv, qs, 1.0 - delta, params)


def _validate(cls: HypothesisClass, dist: FiniteDistribution, n: int, delta: float,
              trials: int) -> None:
    if cls.m != dist.m:
        raise ValidationError(f"domain size mismatch: class m={cls.m}, dist m={dist.m}")
    if n < 1 or trials < 1:
        raise ValidationError(f"need n >= 1 and trials >= 1 (got n={n}, trials={trials})")
    if not (0.0 < delta < 1.0):
        raise ValidationError(f"delta must lie in (0, 1), got {delta!r}")


def _pair_patterns(cls: HypothesisClass) -> np.ndarray:
    """Distinct disagreement patterns over all member pairs, as 0/1 rows."""
    mem = cls.members
    K = len(cls)
    if K < 2:
        return np.zeros((0, cls.m), np.int64)
    ia, ib = np.triu_indices(K, 1)
    return np.unique(mem[ia] != mem[ib], axis=0).astype(np.int64)


def ratio_bound_check(cls: HypothesisClass, dist: FiniteDistribution, n: int, delta: float,
                      trials: int, seed: int, workers: int | None = None) -> DeviationStatistic:
    """Per trial, max over pairs of |P_n|f-g| - P|f-g|| / (alpha sqrt(P_n|f-g|) + alpha^2)."""
    _validate(cls, dist, n, delta, trials)
    a = alpha(n, max(cls.vc_dim, 1), delta)
    pats = _pair_patterns(cls)
    pop = pats @ dist.weights

    def one(t):
        if pats.shape[0] == 0:
            return 0.0
        s = sample(dist, n, stream(seed, t))
        emp = pats @ s.atom_counts() / n
        return float(np.max(np.abs(emp - pop) / (a * np.sqrt(emp) + a * a)))

    vals = parallel_map(one, range(trials), workers)
    return _statistic(vals, delta, {"n": n, "delta": delta, "alpha": a, "seed": seed,
                                    "trials": trials})


def _excess_losses(cls, fstar, xs, ys, q):
    real = cls.members[:, xs].astype(float)
    y = ys.astype(float)
    loss = np.abs(real - y) ** q
    return loss - loss[fstar]


def excess_loss_deviation_check(cls: HypothesisClass, dist: FiniteDistribution, n: int,
                                delta: float, q: float, trials: int, seed: int,
                                workers: int | None = None) -> DeviationStatistic:
    """Per trial, max over f of |P h_f - P_n h_f| / (alpha sqrt(P_n|f-f*|) + alpha^2)
    with h_f = |f-Y|^q - |f*-Y|^q."""
    _validate(cls, dist, n, delta, trials)
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q!r}")
    a = alpha(n, max(cls.vc_dim, 1), delta)
    fstar, _, tied = population_minimizer(cls, dist)
    mem = cls.members.astype(float)
    # exact P h_f: per-atom expected loss of each member
    eta = dist.eta1
    per_atom = eta * np.abs(mem - 1.0) ** q + (1.0 - eta) * np.abs(mem) ** q
    pop = (per_atom - per_atom[fstar]) @ dist.weights
    dis = (cls.members != cls.members[fstar]).astype(np.int64)

    def one(t):
        s = sample(dist, n, stream(seed, t))
        emp = _excess_losses(cls, fstar, s.xs, s.ys, q).mean(axis=1)
        pn_dist = dis @ s.atom_counts() / n
        return float(np.max(np.abs(pop - emp) / (a * np.sqrt(pn_dist) + a * a)))

    vals = parallel_map(one, range(trials), workers)
    return _statistic(vals, delta, {"n": n, "delta": delta, "q": q, "alpha": a, "seed": seed,
                                    "trials": trials, "fstar": fstar, "fstar_ties": tied})


def binary_excess_deviation(cls: HypothesisClass, dist: FiniteDistribution, s, fstar: int,
                            delta: float) -> float:
    """The q = 1 statistic for one sample, from mistake counts only."""
    n = len(s)
    a = alpha(n, max(cls.vc_dim, 1), delta)
    risks = class_risks(cls, dist)
    errs = member_errors(cls, s)
    emp = (errs - errs[fstar]) / n
    pop = risks - risks[fstar]
    pn_dist = (cls.members != cls.members[fstar]).astype(np.int64) @ s.atom_counts() / n
    return float(np.max(np.abs(pop - emp) / (a * np.sqrt(pn_dist) + a * a)))


def target_membership_check(cls: HypothesisClass, dist: FiniteDistribution, n: int,
                            delta: float, c: float, trials: int, seed: int,
                            workers: int | None = None) -> float:
    """Fraction of trials in which f* lands in the almost-ERM set."""
    _validate(cls, dist, n, delta, trials)
    fstar, _, _ = population_minimizer(cls, dist)

    def one(t):
        s = sample(dist, n, stream(seed, t))
        return fstar in almost_erm_set(cls, s, delta, c)

    hits = parallel_map(one, range(trials), workers)
    return float(np.mean(hits))


def bernstein_estimate(cls: HypothesisClass, dist: FiniteDistribution, beta: float) -> float:
    """Smallest B with Pr(f != f*) <= B (R(f) - R(f*))^beta over the class.

    The excess is summed over the disagreement set directly rather than as a
    difference of risks, which keeps exact cancellations exact.
    """
    if not (0.0 <= beta <= 1.0):
        raise ValidationError(f"beta must lie in [0, 1], got {beta!r}")
    if cls.m != dist.m:
        raise ValidationError(f"domain size mismatch: class m={cls.m}, dist m={dist.m}")
    fstar, _, _ = population_minimizer(cls, dist)
    w, eta = dist.weights, dist.eta1
    base = cls.members[fstar]
    best = 0.0
    for f in cls.members:
        dis = (f != base) & (w > 0)
        if not dis.any():
            continue
        d = float(w[dis].sum())
        gain = np.where(f[dis] == 1, 1.0 - 2.0 * eta[dis], 2.0 * eta[dis] - 1.0)
        excess = float(np.dot(w[dis], gain))
        if excess <= 1e-15:
            return math.inf
        best = max(best, d / excess ** beta)
    return best


def identity_check_rp_lq(model: AbstainerModel, dist: FiniteDistribution, fstar_risk: float,
                         p: float) -> float:
    """|(R^p(model) - R(f*)) - (l_q(model) - l_q(f*))| with 1/2 - p = 2^-q.

    For binary f* the l_q risk equals the misclassification risk, so both
    sides are anchored at ``fstar_risk``.
    """
    q = q_from_p(p)
    lhs = population_reject_risk(model.values, dist, p) - fstar_risk
    rhs = lq_risk(model.values, dist, q) - fstar_risk
    return abs(lhs - rhs)
