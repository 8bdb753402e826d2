"""Empirical risk minimization and the almost-ERM set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HypothesisClass, Hypothesis, LabeledSample
from .errors import ValidationError

# Inequalities on empirical quantities are evaluated with this slack so that
# float round-off never drops a member sitting exactly on the boundary.
FILTER_TOL = 1e-12


def clamped_log(x: float) -> float:
    """max(log x, 1), the logarithm convention used by every rate bound here."""
    if x <= 0:
        return 1.0
    return max(math.log(x), 1.0)


def alpha(n: int, d: int, delta: float) -> float:
    """sqrt((d log(n/d) + log(1/delta)) / n) with clamped logarithms."""
    if not (0.0 < delta < 1.0):
        raise ValidationError(f"delta must lie in (0, 1), got {delta!r}")
    if n < 1 or d < 1:
        raise ValidationError(f"alpha needs n >= 1 and d >= 1 (got n={n}, d={d})")
    return math.sqrt((d * clamped_log(n / d) + clamped_log(1.0 / delta)) / n)


def member_errors(cls: HypothesisClass, s: LabeledSample) -> np.ndarray:
    """Number of sample mistakes of every member (length-K int vector)."""
    ones, zeros = s.label_counts()
    # a member labelling atom x with 1 errs on the zeros there, and vice versa
    return cls.members.astype(np.int64) @ (zeros - ones) + int(ones.sum())


def erm_index(cls: HypothesisClass, s: LabeledSample) -> int:
    if len(s) == 0:
        raise ValidationError("ERM needs a nonempty sample")
    if s.m != cls.m:
        raise ValidationError(f"domain size mismatch: class m={cls.m}, sample m={s.m}")
    return int(np.argmin(member_errors(cls, s)))


def erm(cls: HypothesisClass, s: LabeledSample) -> Hypothesis:
    """Member with the fewest sample mistakes; ties go to the lowest index."""
    return cls[erm_index(cls, s)]


@dataclass(frozen=True)
class AlmostErmSet:
    members: tuple[int, ...]
    erm_index: int
    alpha: float
    c: float
    d: int
    delta: float

    def __contains__(self, idx: int) -> bool:
        return idx in self.members

    def __len__(self):
        return len(self.members)

    def to_json(self) -> dict:
        return {"erm": self.erm_index, "members": list(self.members),
                "alpha": self.alpha, "c": self.c}


def almost_erm_set(cls: HypothesisClass, s: LabeledSample, delta: float, c: float = 1.0,
                   d: int | None = None) -> AlmostErmSet:
    """Members f with R_n(f) - R_n(g) <= c (alpha^2 + alpha sqrt(P_n|g - f|)), g = ERM.

    ``d`` defaults to the exact VC dimension of ``cls``; a VC dimension of 0
    (singleton class) is treated as 1 so that ``alpha`` stays defined.
    """
    if c < 0:
        raise ValidationError(f"c must be nonnegative, got {c!r}")
    n = len(s)
    g = erm_index(cls, s)
    d_eff = max(cls.vc_dim if d is None else int(d), 1)
    a = alpha(n, d_eff, delta)
    errs = member_errors(cls, s)
    excess = (errs - errs[g]) / n
    counts = s.atom_counts()
    dis = (cls.members != cls.members[g]).astype(np.int64) @ counts / n
    slack = c * (a * a + a * np.sqrt(dis))
    keep = excess <= slack + FILTER_TOL
    keep[g] = True
    return AlmostErmSet(tuple(np.flatnonzero(keep).tolist()), g, a, float(c), d_eff, float(delta))
