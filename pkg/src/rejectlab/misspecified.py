"""From abstaining models to binary classifiers on misspecified problems.

Three conversions live here: majority-vote patching of the abstention
region (known margin ``h``), net-ERM over an L1(P_X) cover of the
abstention cube (deterministic labels, known marginal), and the memorizing
learner with its exact leave-one-out error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .core import (
    FiniteDistribution,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
)
from .erm import clamped_log, member_errors
from .errors import BudgetExceededError, NoiseDetectedError, ValidationError
from .reject import AbstainerModel, abstaining_learner

COVER_BUDGET = 20
EXACT_COVER_LIMIT = 4
GREEDY_COVER_LIMIT = 12

DEFAULT_C1 = 1.0 / 128
DEFAULT_C2 = 128.0


# --------------------------------------------------------------------------
# majority vote


@dataclass(frozen=True, eq=False)
class MajorityTable:
    ones: np.ndarray
    zeros: np.ndarray

    @property
    def votes(self) -> np.ndarray:
        """1 where ones strictly outnumber zeros; ties and unseen atoms give 0."""
        return (self.ones > self.zeros).astype(np.uint8)

    def vote(self, x: int) -> int:
        return int(self.ones[x] > self.zeros[x])


def majority_vote(s: LabeledSample) -> MajorityTable:
    ones, zeros = s.label_counts()
    return MajorityTable(ones, zeros)


@dataclass(frozen=True, eq=False)
class FiniteDiameterFit:
    hypothesis: Hypothesis
    stage: AbstainerModel
    patched_atoms: list[int]


def finite_diameter_fit(cls: HypothesisClass, s: LabeledSample, delta: float, h: float,
                        c: float = 1.0) -> FiniteDiameterFit:
    if not (0.0 < h <= 1.0):
        raise ValidationError(f"margin h must lie in (0, 1], got {h!r}")
    if len(s) == 0 or len(s) % 3:
        raise ValidationError(f"sample size must be a positive multiple of 3, got {len(s)}")
    n = len(s) // 3
    stage = abstaining_learner(cls, s[:2 * n], delta, h / 2.0, c)
    votes = majority_vote(s[2 * n:]).votes
    out = stage.base.labels.copy()
    star = stage.base.labels != stage.partner.labels
    out[star] = votes[star]
    return FiniteDiameterFit(Hypothesis(out), stage, np.flatnonzero(star).tolist())


def finite_diameter_learner(cls: HypothesisClass, s: LabeledSample, delta: float, h: float,
                            c: float = 1.0) -> Hypothesis:
    """Abstain with p = h/2 on the first 2n points, then patch every ``*``
    atom with the majority label of the last n points."""
    return finite_diameter_fit(cls, s, delta, h, c).hypothesis


# --------------------------------------------------------------------------
# covers of the Boolean cube on a support set


@dataclass(frozen=True, eq=False)
class CoverSpec:
    support: tuple[int, ...]
    radius: float
    center_codes: np.ndarray
    m: int
    exact: bool
    method: str

    def __len__(self):
        return self.center_codes.size

    def center_labels(self, code: int) -> np.ndarray:
        out = np.zeros(self.m, np.uint8)
        for j, atom in enumerate(self.support):
            if (int(code) >> j) & 1:
                out[atom] = 1
        return out

    @property
    def centers(self) -> list[Hypothesis]:
        return [Hypothesis(self.center_labels(c)) for c in self.center_codes]

    def to_json(self) -> dict:
        return {"support": list(self.support), "radius": self.radius, "size": len(self),
                "centers": [str(h) for h in self.centers], "exact": self.exact,
                "method": self.method}


def _as_weights(marginal) -> np.ndarray:
    if isinstance(marginal, FiniteDistribution):
        return marginal.weights
    return np.asarray(marginal, dtype=float)


def xor_weights(support_weights: np.ndarray) -> np.ndarray:
    """L1 mass of every difference pattern over the support (index = bit code)."""
    k = support_weights.size
    codes = np.arange(1 << k)
    bits = (codes[:, None] >> np.arange(k)[None, :]) & 1
    return bits @ support_weights


def _heavy_cube_codes(ws: np.ndarray, radius: float) -> np.ndarray:
    # zero out the lightest atoms while their total mass fits in the radius;
    # the cube on the remaining atoms is then a valid cover
    order = np.argsort(ws, kind="stable")
    cum = np.cumsum(ws[order])
    n_drop = int(np.searchsorted(cum, radius + _kernels.COVER_TOL, side="right"))
    keep = np.sort(order[n_drop:])
    if keep.size > COVER_BUDGET:
        raise BudgetExceededError("cover too large to materialize")
    sub = np.arange(1 << keep.size)
    codes = np.zeros(sub.size, np.int64)
    for j, pos in enumerate(keep):
        codes |= ((sub >> j) & 1) << int(pos)
    return codes


@lru_cache(maxsize=4096)
def _cover_codes(ws_key: tuple[float, ...], radius: float) -> tuple[np.ndarray, bool, str]:
    ws = np.asarray(ws_key, dtype=float)
    k = ws.size
    if k == 0:
        return np.zeros(1, np.int64), True, "trivial"
    xw = xor_weights(ws)
    if k <= EXACT_COVER_LIMIT:
        return np.asarray(_kernels.exact_cube_cover(xw, radius), np.int64), True, "exact"
    if k <= GREEDY_COVER_LIMIT:
        return np.asarray(_kernels.greedy_cube_cover(xw, radius), np.int64), False, "greedy"
    return _heavy_cube_codes(ws, radius), False, "heavy-atom cube"


def l1_cover(support, marginal, radius: float, budget: int = COVER_BUDGET) -> CoverSpec:
    """A radius-cover of all 0/1 labelings of ``support`` in L1(P_X).

    Minimal for supports of at most 4 atoms (exhaustive set cover); greedy
    max-coverage up to 12 atoms; beyond that the cube on the atoms that do
    not fit in the radius.  Only the first case sets ``exact``.
    """
    w = _as_weights(marginal)
    supp = tuple(sorted({int(x) for x in support}))
    if radius < 0:
        raise ValidationError(f"radius must be nonnegative, got {radius!r}")
    if supp and (supp[0] < 0 or supp[-1] >= w.size):
        raise ValidationError("support atoms out of range")
    if len(supp) > budget:
        raise BudgetExceededError(
            f"too large for exact computation: support of {len(supp)} atoms exceeds "
            f"the cover budget {budget}"
        )
    codes, exact, method = _cover_codes(tuple(w[list(supp)].tolist()), float(radius))
    return CoverSpec(supp, float(radius), codes, w.size, exact, method)


def cover_is_valid(cover: CoverSpec, marginal) -> bool:
    """Exhaustive check that every cube element lies within the radius of a center."""
    w = _as_weights(marginal)
    xw = xor_weights(w[list(cover.support)])
    codes = np.arange(1 << len(cover.support))
    d = xw[codes[:, None] ^ cover.center_codes[None, :]]
    return bool((d.min(axis=1) <= cover.radius + _kernels.COVER_TOL).all())


# --------------------------------------------------------------------------
# distribution-dependent diameter


@dataclass(frozen=True)
class DiameterReport:
    value: float
    exact: bool
    gamma: float
    pair: tuple[int, int] | None
    n: int
    c1: float

    def to_json(self) -> dict:
        return {"D_PX": self.value, "exact": self.exact, "gamma": self.gamma,
                "pair": list(self.pair) if self.pair else None, "n": self.n, "c1": self.c1}


def _max_feasible_gamma(ws: np.ndarray, n: int, c1: float) -> tuple[float, bool]:
    """Largest grid gamma with c1 n gamma <= log2 N(gamma)."""
    k = ws.size
    if k == 0:
        return 0.0, True
    grid = np.unique(np.round(xor_weights(ws), 12))
    cap = k / (c1 * n)  # log2 N never exceeds k
    exact = True
    for gamma in grid[::-1]:
        if gamma > cap + 1e-12:
            continue
        if gamma == 0.0:
            return 0.0, exact
        codes, ex, _ = _cover_codes(tuple(ws.tolist()), float(gamma))
        exact = exact and ex
        if c1 * n * gamma <= math.log2(codes.size) + 1e-12:
            return float(gamma), exact
    return 0.0, exact


def dpx_diameter(cls: HypothesisClass, marginal, n: int, c1: float = DEFAULT_C1,
                 budget: int = COVER_BUDGET) -> DiameterReport:
    """n * max over member pairs of the largest grid gamma with
    c1 n gamma <= log2 N(C_{f,g}, gamma, L1).

    The gamma grid is every achievable L1 distance on the pair's cube plus 0.
    When some cover is not provably minimal the value is an upper bound and
    ``exact`` is False.
    """
    if n < 1 or c1 <= 0:
        raise ValidationError("dpx_diameter needs n >= 1 and c1 > 0")
    w = _as_weights(marginal)
    if w.size != cls.m:
        raise ValidationError(f"domain size mismatch: class m={cls.m}, marginal m={w.size}")
    members = cls.members
    best, best_pair, exact = 0.0, None, True
    seen: dict[tuple[float, ...], tuple[float, bool]] = {}
    for a in range(len(cls)):
        for b in range(a + 1, len(cls)):
            supp = np.flatnonzero(members[a] != members[b])
            if supp.size > budget:
                raise BudgetExceededError(
                    f"too large for exact computation: pair ({a}, {b}) disagrees on "
                    f"{supp.size} atoms, over the cover budget {budget}"
                )
            key = tuple(sorted(w[supp].tolist()))
            if key not in seen:
                seen[key] = _max_feasible_gamma(np.asarray(key), n, c1)
            gamma, ex = seen[key]
            exact = exact and ex
            if gamma > best:
                best, best_pair = gamma, (a, b)
    return DiameterReport(n * best, exact, best, best_pair, n, c1)


# --------------------------------------------------------------------------
# net-ERM on the abstention region


@dataclass(frozen=True, eq=False)
class NetFit:
    hypothesis: Hypothesis
    stage: AbstainerModel
    radius: float
    degenerate: bool
    cover: CoverSpec | None
    dpx: float
    chosen_center: int | None = None
    notes: list[str] = field(default_factory=list)


def distribution_dependent_fit(cls: HypothesisClass, s: LabeledSample, delta: float, marginal,
                               c1: float = DEFAULT_C1, c2: float = DEFAULT_C2, c: float = 1.0,
                               *, dpx: float | None = None,
                               radius: float | None = None) -> NetFit:
    if len(s) == 0 or len(s) % 3:
        raise ValidationError(f"sample size must be a positive multiple of 3, got {len(s)}")
    w = _as_weights(marginal)
    n = len(s) // 3
    stage = abstaining_learner(cls, s[:2 * n], delta, 0.5, c)
    support = stage.abstain_atoms
    if dpx is None:
        dpx = dpx_diameter(cls, w, n, c1).value
    r = c2 * (dpx + clamped_log(1.0 / delta)) / n if radius is None else float(radius)
    if not support:
        return NetFit(stage.base, stage, r, False, None, dpx)
    third = s[2 * n:]
    notes = []
    if r > 1.0:
        cover = CoverSpec(tuple(support), r, np.zeros(1, np.int64), cls.m, True, "degenerate")
        notes.append(f"radius {r:.6g} > 1: using the all-zero center")
        degenerate = True
    else:
        cover = l1_cover(support, w, r)
        degenerate = False
    ones, zeros = third.label_counts()
    supp = np.asarray(cover.support)
    bits = (cover.center_codes[:, None] >> np.arange(supp.size)[None, :]) & 1
    # restricted errors: mistakes on third-part points inside the abstention region
    errs = bits @ zeros[supp] + (1 - bits) @ ones[supp]
    pick = int(np.argmin(errs))
    out = stage.base.labels.copy()
    out[supp] = bits[pick]
    return NetFit(Hypothesis(out), stage, r, degenerate, cover, dpx, pick, notes)


def distribution_dependent_learner(cls: HypothesisClass, s: LabeledSample, delta: float,
                                   marginal, c1: float = DEFAULT_C1, c2: float = DEFAULT_C2,
                                   c: float = 1.0, **kw) -> Hypothesis:
    return distribution_dependent_fit(cls, s, delta, marginal, c1, c2, c, **kw).hypothesis


# --------------------------------------------------------------------------
# memorization and leave-one-out


def _conflict_free_counts(s: LabeledSample) -> tuple[np.ndarray, np.ndarray]:
    ones, zeros = s.label_counts()
    clash = np.flatnonzero((ones > 0) & (zeros > 0))
    if clash.size:
        raise NoiseDetectedError(
            f"noise detected: atom {int(clash[0])} carries both labels in the sample"
        )
    return ones, zeros


def memorizing_learner(s: LabeledSample, baseline: Hypothesis) -> Hypothesis:
    """Memorized label on sampled atoms, ``baseline`` elsewhere."""
    if baseline.m != s.m:
        raise ValidationError(f"domain size mismatch: baseline m={baseline.m}, sample m={s.m}")
    ones, zeros = _conflict_free_counts(s)
    out = baseline.labels.copy()
    seen = (ones + zeros) > 0
    out[seen] = (ones[seen] > 0).astype(np.uint8)
    return Hypothesis(out)


def loo_error(s: LabeledSample, baseline: Hypothesis) -> float:
    """Exact leave-one-out error of :func:`memorizing_learner`.

    Hiding one copy of a repeated atom still leaves its label memorized, so
    only atoms drawn exactly once can be mispredicted (by the baseline).
    """
    if len(s) == 0:
        raise ValidationError("leave-one-out needs at least one point")
    if baseline.m != s.m:
        raise ValidationError(f"domain size mismatch: baseline m={baseline.m}, sample m={s.m}")
    ones, zeros = _conflict_free_counts(s)
    counts = ones + zeros
    single = counts[s.xs] == 1
    wrong = baseline.labels[s.xs] != s.ys
    return float(np.count_nonzero(single & wrong)) / len(s)


def min_sample_errors(cls: HypothesisClass, s: LabeledSample) -> int:
    return int(member_errors(cls, s).min())
