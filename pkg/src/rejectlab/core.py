"""Finite-domain distributions, hypotheses and exact risk functionals.

The instance space is ``{0, ..., m-1}``.  Every population quantity is a
finite weighted sum, so risks are computed exactly rather than estimated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from . import _kernels
from .errors import BudgetExceededError, ValidationError

STAR = 2
"""Code used for the abstention symbol inside ``AbstainingHypothesis.values``."""

WEIGHT_TOL = 1e-12

# Exhaustive searches refuse to start when (members x column subsets x width)
# exceeds this many elementary operations.
DEFAULT_WORK_BUDGET = 2_000_000_000

RngLike = Union[None, int, Sequence[int], np.random.SeedSequence, np.random.Generator]


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# --------------------------------------------------------------------------
# hypotheses


@dataclass(frozen=True, eq=False)
class Hypothesis:
    """A {0,1}-valued predictor on a finite domain."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 1:
            raise ValidationError("hypothesis labels must be one-dimensional")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValidationError("hypothesis labels must be 0/1")
        object.__setattr__(self, "labels", _readonly(arr.astype(np.uint8)))

    @classmethod
    def from_string(cls, bits: str) -> "Hypothesis":
        if set(bits) - {"0", "1"}:
            raise ValidationError(f"not a 0/1 string: {bits!r}")
        return cls(np.frombuffer(bits.encode(), np.uint8) - ord("0"))

    @classmethod
    def zeros(cls, m: int) -> "Hypothesis":
        return cls(np.zeros(m, np.uint8))

    @property
    def m(self) -> int:
        return self.labels.size

    def __len__(self):
        return self.labels.size

    def __str__(self):
        return "".join("01"[v] for v in self.labels)

    def __repr__(self):
        return f"Hypothesis('{self}')"

    def __eq__(self, other):
        if isinstance(other, AbstainingHypothesis):
            return other == self
        if not isinstance(other, Hypothesis):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())


@dataclass(frozen=True, eq=False)
class AbstainingHypothesis:
    """A {0,1,*}-valued predictor; ``*`` is stored as :data:`STAR`."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 1:
            raise ValidationError("values must be one-dimensional")
        if arr.size and not np.isin(arr, (0, 1, STAR)).all():
            raise ValidationError("values must be 0, 1 or STAR")
        object.__setattr__(self, "values", _readonly(arr.astype(np.uint8)))

    @classmethod
    def from_string(cls, text: str) -> "AbstainingHypothesis":
        table = {"0": 0, "1": 1, "*": STAR}
        try:
            return cls(np.array([table[ch] for ch in text], np.uint8))
        except KeyError as exc:
            raise ValidationError(f"not a 0/1/* string: {text!r}") from exc

    @classmethod
    def from_hypothesis(cls, f: Hypothesis) -> "AbstainingHypothesis":
        return cls(f.labels)

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def abstain_mask(self) -> np.ndarray:
        return self.values == STAR

    @property
    def abstain_atoms(self) -> list[int]:
        return np.flatnonzero(self.abstain_mask).tolist()

    def as_real(self) -> np.ndarray:
        """Values as floats with ``*`` read as 1/2."""
        out = self.values.astype(float)
        out[self.abstain_mask] = 0.5
        return out

    def is_binary(self) -> bool:
        return not self.abstain_mask.any()

    def to_hypothesis(self) -> Hypothesis:
        if not self.is_binary():
            raise ValidationError("abstaining hypothesis has * values")
        return Hypothesis(self.values)

    def __len__(self):
        return self.values.size

    def __str__(self):
        return "".join("01*"[v] for v in self.values)

    def __repr__(self):
        return f"AbstainingHypothesis('{self}')"

    def __eq__(self, other):
        if isinstance(other, Hypothesis):
            return np.array_equal(self.values, other.labels)
        if not isinstance(other, AbstainingHypothesis):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


AnyHypothesis = Union[Hypothesis, AbstainingHypothesis]


def _values(f: AnyHypothesis) -> np.ndarray:
    if isinstance(f, Hypothesis):
        return f.labels
    if isinstance(f, AbstainingHypothesis):
        return f.values
    raise TypeError(f"expected a hypothesis, got {type(f).__name__}")


def _labels(f: Hypothesis) -> np.ndarray:
    if isinstance(f, Hypothesis):
        return f.labels
    if isinstance(f, AbstainingHypothesis):
        return f.to_hypothesis().labels
    raise TypeError(f"expected a hypothesis, got {type(f).__name__}")


def _check_m(m_expected: int, *items) -> None:
    for item in items:
        if len(item) != m_expected:
            raise ValidationError(
                f"domain size mismatch: expected {m_expected}, got {len(item)}"
            )


# --------------------------------------------------------------------------
# hypothesis classes


class HypothesisClass:
    """Finite, duplicate-free, lexicographically ordered list of hypotheses.

    Members are held as a read-only ``(K, m)`` uint8 matrix.  ``vc_dim`` and
    ``diameter`` are computed on first access unless supplied.
    """

    def __init__(self, members, *, vc_dim: int | None = None, diameter: int | None = None):
        rows = self._as_matrix(members)
        if rows.shape[0] == 0:
            raise ValidationError("hypothesis class must be nonempty")
        # np.unique on rows sorts lexicographically with column 0 most significant
        rows = np.unique(rows, axis=0)
        self.members = _readonly(rows)
        if vc_dim is not None:
            self.__dict__["vc_dim"] = int(vc_dim)
        if diameter is not None:
            self.__dict__["diameter"] = int(diameter)

    @staticmethod
    def _as_matrix(members) -> np.ndarray:
        if isinstance(members, np.ndarray):
            arr = members
        else:
            items = list(members)
            if not items:
                return np.zeros((0, 0), np.uint8)
            conv = []
            for it in items:
                if isinstance(it, str):
                    it = Hypothesis.from_string(it)
                conv.append(_labels(it) if isinstance(it, (Hypothesis, AbstainingHypothesis)) else np.asarray(it))
            lengths = {len(c) for c in conv}
            if len(lengths) != 1:
                raise ValidationError("class members must share the domain size")
            arr = np.vstack(conv)
        if arr.ndim != 2:
            raise ValidationError("class must be a 2-D array of labels")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValidationError("class members must be 0/1")
        return arr.astype(np.uint8)

    @classmethod
    def from_strings(cls, bits: Iterable[str], **kw) -> "HypothesisClass":
        return cls([Hypothesis.from_string(b) for b in bits], **kw)

    @property
    def m(self) -> int:
        return self.members.shape[1]

    def __len__(self):
        return self.members.shape[0]

    def __getitem__(self, idx: int) -> Hypothesis:
        return Hypothesis(self.members[idx])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def index_of(self, f: Hypothesis) -> int:
        hits = np.flatnonzero((self.members == _labels(f)).all(axis=1))
        if hits.size == 0:
            raise ValidationError(f"{f} is not a member of the class")
        return int(hits[0])

    def strings(self) -> list[str]:
        return [str(h) for h in self]

    @cached_property
    def vc_dim(self) -> int:
        return vc_dimension(self)

    @cached_property
    def diameter(self) -> int:
        return combinatorial_diameter(self)

    def check_cached(self) -> None:
        """Recompute supplied ``vc_dim`` / ``diameter`` hints and reject wrong ones."""
        for name, fn in (("vc_dim", vc_dimension), ("diameter", combinatorial_diameter)):
            if name in self.__dict__ and self.__dict__[name] != fn(self):
                raise ValidationError(f"cached {name}={self.__dict__[name]} disagrees with recomputation")

    def __repr__(self):
        return f"HypothesisClass(K={len(self)}, m={self.m})"


# --------------------------------------------------------------------------
# distributions and samples


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Marginal weights over atoms plus Pr(Y=1 | x) per atom.

    Weights whose sum is within ``WEIGHT_TOL`` of one are renormalized and the
    absolute correction is kept in ``correction``; anything further off is
    rejected.
    """

    weights: np.ndarray
    eta1: np.ndarray
    correction: float = field(default=0.0)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        eta = np.asarray(self.eta1, dtype=float)
        if w.ndim != 1 or eta.shape != w.shape:
            raise ValidationError("weights and eta1 must be 1-D arrays of equal length")
        if w.size == 0:
            raise ValidationError("distribution needs at least one atom")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ValidationError("weights must be finite and nonnegative")
        if not np.isfinite(eta).all() or (eta < 0).any() or (eta > 1).any():
            raise ValidationError("eta1 values must lie in [0, 1]")
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(
                f"weights must sum to 1 within {WEIGHT_TOL:g} (got sum {total!r})"
            )
        # deviations at summation round-off level are left alone so that
        # normalizing is idempotent and serialized weights round-trip exactly
        if abs(total - 1.0) > 4 * w.size * np.finfo(float).eps:
            w = w / total
            object.__setattr__(self, "correction", abs(total - 1.0))
        object.__setattr__(self, "weights", _readonly(w))
        object.__setattr__(self, "eta1", _readonly(eta))

    @classmethod
    def uniform(cls, eta1: Sequence[float]) -> "FiniteDistribution":
        eta = np.asarray(eta1, dtype=float)
        return cls(np.full(eta.size, 1.0 / eta.size), eta)

    @property
    def m(self) -> int:
        return self.weights.size

    @cached_property
    def _cumulative(self) -> np.ndarray:
        cum = np.cumsum(self.weights)
        return cum / cum[-1]


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """An ordered sample of (atom, label) pairs over a domain of size ``m``."""

    xs: np.ndarray
    ys: np.ndarray
    m: int

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int64).reshape(-1)
        ys = np.asarray(self.ys, dtype=np.uint8).reshape(-1)
        if xs.shape != ys.shape:
            raise ValidationError("xs and ys must have equal length")
        if xs.size and (xs.min() < 0 or xs.max() >= self.m):
            raise ValidationError(f"sample atoms must lie in [0, {self.m})")
        if ys.size and ys.max() > 1:
            raise ValidationError("labels must be 0/1")
        object.__setattr__(self, "xs", _readonly(xs))
        object.__setattr__(self, "ys", _readonly(ys))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], m: int) -> "LabeledSample":
        pairs = list(pairs)
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        return cls(np.array(xs, np.int64), np.array(ys, np.uint8), m)

    def __len__(self):
        return self.xs.size

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.xs.tolist(), self.ys.tolist()))

    def __getitem__(self, sl: slice) -> "LabeledSample":
        if not isinstance(sl, slice):
            raise TypeError("samples support slicing only")
        return LabeledSample(self.xs[sl], self.ys[sl], self.m)

    def split(self, parts: int) -> list["LabeledSample"]:
        """Consecutive equal parts; the length must be divisible by ``parts``."""
        if len(self) % parts:
            raise ValidationError(f"sample size {len(self)} is not divisible by {parts}")
        k = len(self) // parts
        return [self[i * k:(i + 1) * k] for i in range(parts)]

    def label_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-atom counts ``(ones, zeros)``."""
        ones = np.bincount(self.xs, weights=self.ys, minlength=self.m).astype(np.int64)
        total = np.bincount(self.xs, minlength=self.m).astype(np.int64)
        return ones, total - ones

    def atom_counts(self) -> np.ndarray:
        return np.bincount(self.xs, minlength=self.m).astype(np.int64)


def sample(dist: FiniteDistribution, n: int, rng: RngLike = None) -> LabeledSample:
    """Draw ``n`` i.i.d. labeled points from ``dist``."""
    if n < 0:
        raise ValidationError("sample size must be nonnegative")
    if not isinstance(dist, FiniteDistribution):
        raise ValidationError("expected a FiniteDistribution")
    gen = as_rng(rng)
    u = gen.random(n)
    xs = np.searchsorted(dist._cumulative, u, side="right")
    # guards the u ~ 1 edge when the last atoms carry zero weight
    last = int(np.flatnonzero(dist.weights > 0)[-1])
    np.minimum(xs, last, out=xs)
    ys = (gen.random(n) < dist.eta1[xs]).astype(np.uint8)
    return LabeledSample(xs, ys, dist.m)


# --------------------------------------------------------------------------
# risks


def _check_p(p: float) -> None:
    if not (0.0 <= p <= 0.5):
        raise ValidationError(f"p must lie in [0, 1/2], got {p!r}")


def population_risk(f: Hypothesis, dist: FiniteDistribution) -> float:
    lab = _labels(f)
    _check_m(dist.m, lab)
    return float(np.dot(dist.weights, np.where(lab == 1, 1.0 - dist.eta1, dist.eta1)))


def empirical_risk(f: Hypothesis, s: LabeledSample) -> float:
    if len(s) == 0:
        raise ValidationError("empirical risk of an empty sample is undefined")
    lab = _labels(f)
    _check_m(s.m, lab)
    return float(np.mean(lab[s.xs] != s.ys))


def _reject_parts(vals: np.ndarray, dist: FiniteDistribution) -> tuple[float, float]:
    star = vals == STAR
    wrong = np.where(vals == 1, 1.0 - dist.eta1, dist.eta1)
    mis = float(np.dot(dist.weights, np.where(star, 0.0, wrong)))
    abst = float(np.dot(dist.weights, star))
    return mis, abst


def population_reject_risk(f: AnyHypothesis, dist: FiniteDistribution, p: float) -> float:
    """Chow's risk: misclassification on committed atoms + (1/2 - p) * abstained mass."""
    _check_p(p)
    vals = _values(f)
    _check_m(dist.m, vals)
    mis, abst = _reject_parts(vals, dist)
    return mis + (0.5 - p) * abst


def empirical_reject_risk(f: AnyHypothesis, s: LabeledSample, p: float) -> float:
    _check_p(p)
    if len(s) == 0:
        raise ValidationError("empirical risk of an empty sample is undefined")
    vals = _values(f)
    _check_m(s.m, vals)
    v = vals[s.xs]
    star = v == STAR
    mis = int(np.count_nonzero(~star & (v != s.ys)))
    abst = int(np.count_nonzero(star))
    return (mis + (0.5 - p) * abst) / len(s)


def abstention_mass(f: AnyHypothesis, dist: FiniteDistribution) -> float:
    vals = _values(f)
    _check_m(dist.m, vals)
    return float(np.dot(dist.weights, vals == STAR))


def lq_risk(g: AnyHypothesis, dist: FiniteDistribution, q: float) -> float:
    """E|g(X) - Y|^q with ``*`` read as 1/2."""
    if not q >= 1:
        raise ValidationError(f"q must be >= 1, got {q!r}")
    vals = _values(g)
    _check_m(dist.m, vals)
    real = AbstainingHypothesis(vals).as_real()
    per_atom = dist.eta1 * np.abs(real - 1.0) ** q + (1.0 - dist.eta1) * np.abs(real) ** q
    return float(np.dot(dist.weights, per_atom))


def population_l1_distance(f: Hypothesis, g: Hypothesis, dist: FiniteDistribution) -> float:
    a, b = _labels(f), _labels(g)
    _check_m(dist.m, a, b)
    return float(np.dot(dist.weights, a != b))


def empirical_l1_distance(f: Hypothesis, g: Hypothesis, s: LabeledSample) -> float:
    if len(s) == 0:
        raise ValidationError("empirical distance on an empty sample is undefined")
    a, b = _labels(f), _labels(g)
    _check_m(s.m, a, b)
    return float(np.mean(a[s.xs] != b[s.xs]))


def bayes_classifier(dist: FiniteDistribution) -> Hypothesis:
    """1[eta1 >= 1/2]; the tie at exactly 1/2 goes to label 1."""
    return Hypothesis((dist.eta1 >= 0.5).astype(np.uint8))


def bayes_risk(dist: FiniteDistribution) -> float:
    return float(np.dot(dist.weights, np.minimum(dist.eta1, 1.0 - dist.eta1)))


def margin_parameter(dist: FiniteDistribution) -> float:
    """Smallest |2 eta1 - 1| over atoms of positive weight."""
    live = dist.weights > 0
    return float(np.min(np.abs(2.0 * dist.eta1[live] - 1.0)))


def class_risks(cls: HypothesisClass, dist: FiniteDistribution) -> np.ndarray:
    """Population risk of every member, as a length-K vector."""
    _check_m(dist.m, cls.members[0])
    per_atom_if_one = dist.weights * (1.0 - dist.eta1)
    per_atom_if_zero = dist.weights * dist.eta1
    return cls.members @ (per_atom_if_one - per_atom_if_zero) + per_atom_if_zero.sum()


def population_minimizer(cls: HypothesisClass, dist: FiniteDistribution,
                         tol: float = 1e-12) -> tuple[int, float, list[int]]:
    """Index of f* (lowest index among near-ties), its risk, and all tied indices."""
    risks = class_risks(cls, dist)
    best = float(risks.min())
    tied = np.flatnonzero(risks <= best + tol)
    idx = int(tied[0])
    return idx, float(population_risk(cls[idx], dist)), tied.tolist()


# --------------------------------------------------------------------------
# combinatorics


def _check_work(n_rows: int, n_combos: int, width: int, budget: int) -> None:
    work = n_rows * n_combos * max(width, 1)
    if work > budget:
        raise BudgetExceededError(
            f"too large for exact computation: {n_combos} subsets x {n_rows} members "
            f"x width {width} exceeds the work budget {budget}"
        )


def _combos(m: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), np.int64)
    return np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(m), k)),
                       dtype=np.int64).reshape(-1, k)


def is_shattered(cls: HypothesisClass, points: Sequence[int]) -> bool:
    pts = list(points)
    proj = {tuple(row) for row in cls.members[:, pts].tolist()}
    return len(proj) == 2 ** len(pts)


def vc_dimension(cls: HypothesisClass, budget: int = DEFAULT_WORK_BUDGET) -> int:
    """Exact VC dimension by exhaustive shattering search.

    Set sizes are tried upward; shattering is hereditary, so the search stops
    at the first size with no shattered set.
    """
    members = cls.members
    n_rows, m = members.shape
    d = 0
    for k in range(1, m + 1):
        if n_rows < 2 ** k:
            break
        n_combos = math.comb(m, k)
        _check_work(n_rows, n_combos, k, budget)
        if _kernels.first_shattered(members, _combos(m, k)) < 0:
            break
        d = k
    return d


def combinatorial_diameter(cls: HypothesisClass, budget: int = DEFAULT_WORK_BUDGET) -> int:
    """Largest Hamming distance between two members (0 for a singleton)."""
    n_rows, m = cls.members.shape
    _check_work(n_rows, n_rows, m, 2 * budget)
    return int(_kernels.max_pairwise_hamming(cls.members))


def growth_function(cls: HypothesisClass, n: int, budget: int = DEFAULT_WORK_BUDGET) -> int:
    """Maximum number of distinct projections of the class on ``n`` points.

    Repeated points add nothing, so the maximum is over subsets of size
    ``min(n, m)``.
    """
    if n < 0:
        raise ValidationError("n must be nonnegative")
    members = cls.members
    n_rows, m = members.shape
    k = min(n, m)
    if k == 0:
        return 1
    if k == m:
        return n_rows
    n_combos = math.comb(m, k)
    _check_work(n_rows, n_combos, k, budget)
    return int(_kernels.max_projections(members, _combos(m, k)))
