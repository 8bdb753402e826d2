"""Synthetic constructions and the Monte Carlo learning-curve engine."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._parallel import parallel_map, stream
from .core import (
    FiniteDistribution,
    Hypothesis,
    HypothesisClass,
    abstention_mass,
    bayes_risk,
    margin_parameter,
    population_minimizer,
    population_reject_risk,
    population_risk,
    sample,
)
from .erm import clamped_log, erm
from .errors import BudgetExceededError, ValidationError
from .misspecified import (
    DEFAULT_C1,
    DEFAULT_C2,
    distribution_dependent_learner,
    dpx_diameter,
    finite_diameter_learner,
    memorizing_learner,
)
from .reject import AbstainerModel, abstaining_learner, aggregate_lq

ENUM_BUDGET = 1_000_000
CONSISTENCY_TOL = 1e-12


# --------------------------------------------------------------------------
# constructions


@dataclass(frozen=True, eq=False)
class Construction:
    cls: HypothesisClass
    dist: FiniteDistribution
    metadata: dict

    def __post_init__(self):
        md = self.metadata
        fstar, risk, tied = population_minimizer(self.cls, self.dist)
        approx = risk - bayes_risk(self.dist)
        expected = {
            "h": margin_parameter(self.dist),
            "D": self.cls.diameter,
            "d": self.cls.vc_dim,
            "fstar_index": fstar,
        }
        for key, val in expected.items():
            if key in md and md[key] != val:
                raise ValidationError(f"construction metadata {key}={md[key]!r} != recomputed {val!r}")
        for key, val in (("fstar_risk", risk), ("approx_error", approx)):
            if key in md and abs(md[key] - val) > CONSISTENCY_TOL:
                raise ValidationError(f"construction metadata {key}={md[key]!r} != recomputed {val!r}")
        if approx < -CONSISTENCY_TOL:
            raise ValidationError(f"approximation error must be nonnegative, got {approx!r}")
        full = {**expected, "fstar_risk": risk, "approx_error": max(approx, 0.0),
                "fstar_ties": tied, "family": md.get("family", "custom"),
                "params": md.get("params", {})}
        object.__setattr__(self, "metadata", full)

    @property
    def fstar(self) -> Hypothesis:
        return self.cls[self.metadata["fstar_index"]]

    @property
    def fstar_risk(self) -> float:
        return self.metadata["fstar_risk"]


def make_sparse_class(d: int, m: int, budget: int = ENUM_BUDGET) -> HypothesisClass:
    """All labelings with at most d ones on m atoms."""
    if d < 0 or m < 2 * d or m < 1:
        raise ValidationError(f"sparse class needs 0 <= d and m >= 2d (got d={d}, m={m})")
    size = sum(math.comb(m, k) for k in range(d + 1))
    if size > budget:
        raise BudgetExceededError(f"sparse class has {size} members, over the budget {budget}")
    rows = np.zeros((size, m), np.uint8)
    i = 0
    for k in range(d + 1):
        for ones in itertools.combinations(range(m), k):
            rows[i, list(ones)] = 1
            i += 1
    return HypothesisClass(rows)


def make_two_function_construction(tau: float, eps: float, atoms_b: int, atoms_c: int,
                                   m: int, h: float) -> Construction:
    """Class {f1, f2} over atoms ordered A | B | C.

    A (mass 1 - 2 tau - eps): both functions predict the Bayes label 0.
    B (mass tau + eps): Bayes label 1, only f2 is right.
    C (mass tau): Bayes label 1, only f1 is right.
    Labels agree with the Bayes label with probability (1 + h)/2.
    f1 has index 0; f* = f2 whenever eps > 0.
    """
    if not (0.0 < h <= 1.0):
        raise ValidationError(f"margin h must lie in (0, 1], got {h!r}")
    if tau < 0 or eps < 0 or 2 * tau + eps > 1 + CONSISTENCY_TOL:
        raise ValidationError(
            f"infeasible masses: need tau, eps >= 0 and 2 tau + eps <= 1 (tau={tau}, eps={eps})"
        )
    n_a = m - atoms_b - atoms_c
    mass_a = max(1.0 - 2 * tau - eps, 0.0)
    if atoms_b < 1 or atoms_c < 1 or n_a < 0 or (n_a == 0 and mass_a > 0):
        raise ValidationError(
            f"infeasible atom counts: atoms_b={atoms_b}, atoms_c={atoms_c}, m={m}"
        )
    w = np.concatenate([
        np.full(n_a, mass_a / n_a if n_a else 0.0),
        np.full(atoms_b, (tau + eps) / atoms_b),
        np.full(atoms_c, tau / atoms_c),
    ])
    hi, lo = (1.0 + h) / 2.0, (1.0 - h) / 2.0
    eta = np.concatenate([np.full(n_a, lo), np.full(atoms_b + atoms_c, hi)])
    f1 = np.zeros(m, np.uint8)
    f1[n_a + atoms_b:] = 1
    f2 = np.zeros(m, np.uint8)
    f2[n_a:n_a + atoms_b] = 1
    # fold round-off of the three masses into the largest atom
    w[np.argmax(w)] += 1.0 - w.sum()
    params = {"tau": tau, "eps": eps, "atoms_b": atoms_b, "atoms_c": atoms_c, "m": m, "h": h}
    return Construction(HypothesisClass([f1, f2]), FiniteDistribution(w, eta),
                        {"family": "two_function", "params": params})


def make_wellspecified_massart(cls: HypothesisClass, fstar_index: int, h: float,
                               marginal) -> Construction:
    """Labels follow member ``fstar_index`` with probability (1 + h)/2."""
    if not (0.0 < h <= 1.0):
        raise ValidationError(f"margin h must lie in (0, 1], got {h!r}")
    if not (0 <= fstar_index < len(cls)):
        raise ValidationError(f"fstar_index {fstar_index} out of range for {len(cls)} members")
    w = marginal.weights if isinstance(marginal, FiniteDistribution) else np.asarray(marginal, float)
    f = cls.members[fstar_index]
    eta = np.where(f == 1, (1.0 + h) / 2.0, (1.0 - h) / 2.0)
    params = {"chosen_index": fstar_index, "h": h}
    return Construction(cls, FiniteDistribution(w, eta), {"family": "massart", "params": params})


def threshold_class(m: int) -> HypothesisClass:
    """1[x >= t] for t = 0..m: m + 1 members, VC dimension 1."""
    rows = (np.arange(m)[None, :] >= np.arange(m + 1)[:, None]).astype(np.uint8)
    return HypothesisClass(rows)


@dataclass(frozen=True)
class FixedFamily:
    construction: Construction

    def at(self, n: int) -> Construction:
        return self.construction

    def describe(self) -> dict:
        md = self.construction.metadata
        return {"family": md["family"], "params": md["params"]}


@dataclass(frozen=True)
class TwoFunctionFamily:
    """tau_n = tau_coef n^-tau_exp, eps_n = eps_coef n^-eps_exp."""

    tau_coef: float
    eps_coef: float
    atoms_b: int
    atoms_c: int
    m: int
    h: float
    tau_exp: float = 0.0
    eps_exp: float = 0.5

    def params_at(self, n: int) -> tuple[float, float]:
        return self.tau_coef * n ** -self.tau_exp, self.eps_coef * n ** -self.eps_exp

    def at(self, n: int) -> Construction:
        return _two_function_cached(*self.params_at(n), self.atoms_b, self.atoms_c, self.m, self.h)

    def describe(self) -> dict:
        return {"family": "two_function_sequence", "params": self.__dict__.copy()}


@lru_cache(maxsize=256)
def _two_function_cached(tau, eps, atoms_b, atoms_c, m, h):
    return make_two_function_construction(tau, eps, atoms_b, atoms_c, m, h)


# --------------------------------------------------------------------------
# learners


LEARNER_TAGS = ("erm", "abstain", "lq", "finite_diameter", "dist_dependent", "memorize", "oracle")


@dataclass(frozen=True)
class LearnerSpec:
    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in LEARNER_TAGS:
            raise ValidationError(f"unknown learner {self.tag!r}; expected one of {LEARNER_TAGS}")

    @property
    def delta(self) -> float:
        return float(self.params.get("delta", 0.05))

    @property
    def c(self) -> float:
        return float(self.params.get("c", 1.0))


def _trim(s, k):
    return s[: (len(s) // k) * k]


def _dpx_for(con: Construction, n: int, c1: float) -> float:
    cache = con.__dict__.setdefault("_dpx_cache", {})
    if (n, c1) not in cache:
        cache[(n, c1)] = dpx_diameter(con.cls, con.dist, n, c1).value
    return cache[(n, c1)]


def fit_learner(spec: LearnerSpec, con: Construction, s):
    """Train ``spec`` on ``s``; returns a Hypothesis or an AbstainerModel."""
    tag, pr = spec.tag, spec.params
    if tag == "oracle":
        return con.fstar
    if tag == "erm":
        return erm(con.cls, s)
    if tag == "abstain":
        return abstaining_learner(con.cls, _trim(s, 2), spec.delta, float(pr["p"]), spec.c)
    if tag == "lq":
        return aggregate_lq(con.cls, _trim(s, 2), spec.delta, float(pr["q"]), spec.c)
    if tag == "finite_diameter":
        h = float(pr.get("h", con.metadata["h"]))
        return finite_diameter_learner(con.cls, _trim(s, 3), spec.delta, h, spec.c)
    if tag == "dist_dependent":
        c1 = float(pr.get("c1", DEFAULT_C1))
        c2 = float(pr.get("c2", DEFAULT_C2))
        s3 = _trim(s, 3)
        kw = {"radius": pr["radius"]} if "radius" in pr else {"dpx": _dpx_for(con, len(s3) // 3, c1)}
        return distribution_dependent_learner(con.cls, s3, spec.delta, con.dist.weights,
                                              c1, c2, spec.c, **kw)
    if tag == "memorize":
        if con.metadata["h"] < 1.0:
            raise ValidationError("memorize needs deterministic labels (h = 1)")
        base = pr.get("baseline")
        baseline = Hypothesis.zeros(con.cls.m) if base is None else Hypothesis.from_string(base)
        return memorizing_learner(s, baseline)
    raise ValidationError(f"unknown learner {tag!r}")  # pragma: no cover


RISK_TAGS = ("R", "Rp", "R0")


def evaluate(output, con: Construction, risk: str, p: float | None = None) -> tuple[float, float]:
    """(excess risk against f*, abstention mass), both exact."""
    if risk not in RISK_TAGS:
        raise ValidationError(f"unknown risk {risk!r}; expected one of {RISK_TAGS}")
    if isinstance(output, AbstainerModel):
        vals = output.values
        if risk == "R":
            raise ValidationError("risk R is undefined for abstaining outputs; use Rp or R0")
        pp = 0.0 if risk == "R0" else (output.p if p is None else p)
        return population_reject_risk(vals, con.dist, pp) - con.fstar_risk, abstention_mass(vals, con.dist)
    return population_risk(output, con.dist) - con.fstar_risk, 0.0


# --------------------------------------------------------------------------
# learning curves


@dataclass(frozen=True)
class CurveRow:
    n: int
    mean_excess: float
    stderr: float
    abstain_mass: float
    reps: int


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(eq=False)
class LearningCurve:
    rows: list[CurveRow]
    learner: LearnerSpec
    risk: str
    provenance: dict = field(default_factory=dict)
    per_rep: dict = field(default_factory=dict, repr=False)

    CSV_HEADER = "n,mean_excess,stderr,abstain_mass,reps"

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValidationError("curve grid must be strictly increasing")
        if any(r.stderr < 0 or r.reps < 1 for r in self.rows):
            raise ValidationError("curve rows need stderr >= 0 and reps >= 1")

    @property
    def n(self) -> np.ndarray:
        return np.array([r.n for r in self.rows], dtype=float)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.n},{_fmt(r.mean_excess)},{_fmt(r.stderr)},{_fmt(r.abstain_mass)},{r.reps}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, learner: LearnerSpec, risk: str) -> "LearningCurve":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0].strip() != cls.CSV_HEADER:
            raise ValidationError(f"curve CSV must start with header {cls.CSV_HEADER!r}")
        rows = []
        for ln in lines[1:]:
            n, mean, se, ab, reps = ln.split(",")
            rows.append(CurveRow(int(n), float(mean), float(se), float(ab), int(reps)))
        return cls(rows, learner, risk)

    def sidecar(self) -> dict:
        return {"learner": {"tag": self.learner.tag, "params": self.learner.params},
                "risk": self.risk, **self.provenance}


def monte_carlo_curve(family, learner: LearnerSpec, n_grid, reps: int, risk: str = "R",
                      seed: int = 0, *, risk_p: float | None = None,
                      workers: int | None = None, keep_reps: bool = False) -> LearningCurve:
    """Mean exact excess risk over ``reps`` fresh samples at every grid size.

    ``family`` is a Construction, or anything with ``at(n)`` returning one.
    Replication r at size n uses the generator stream (seed, n, r).
    """
    if isinstance(family, Construction):
        family = FixedFamily(family)
    if reps < 2:
        raise ValidationError(f"reps must be >= 2, got {reps}")
    if seed < 0:
        raise ValidationError(f"seed must be nonnegative, got {seed}")
    grid = [int(n) for n in n_grid]
    if not grid or any(n < 1 for n in grid):
        raise ValidationError("n_grid must hold positive sizes")
    if risk not in RISK_TAGS:
        raise ValidationError(f"unknown risk {risk!r}; expected one of {RISK_TAGS}")
    rows, per_rep, row_params = [], {}, []
    for n in grid:
        con = family.at(n)

        def one(r, con=con, n=n):
            s = sample(con.dist, n, stream(seed, n, r))
            return evaluate(fit_learner(learner, con, s), con, risk, risk_p)

        res = np.asarray(parallel_map(one, range(reps), workers), dtype=float)
        exc, ab = res[:, 0], res[:, 1]
        rows.append(CurveRow(n, float(exc.mean()), float(exc.std(ddof=1) / math.sqrt(reps)),
                             float(ab.mean()), reps))
        row_params.append({"n": n, **con.metadata["params"], "fstar_risk": con.fstar_risk})
        if keep_reps:
            per_rep[n] = res
    prov = {"family": family.describe(), "rows": row_params, "seed": seed, "reps": reps,
            "n_grid": grid, "risk_p": risk_p}
    return LearningCurve(rows, learner, risk, prov, per_rep)


def fit_rate_slope(curve: LearningCurve, column: str = "mean_excess",
                   weighted: bool = False) -> float:
    """Least-squares slope of log(column) against log(n).

    ``weighted`` uses 1/sigma weights with sigma = stderr / mean, the delta
    method standard error of log(mean); only meaningful for the excess column.
    """
    y = curve.column(column)
    if len(y) < 3:
        raise ValidationError("slope fit needs at least 3 grid points")
    if (y <= 0).any():
        raise ValidationError("rate degenerate (exact zero excess): "
                              f"nonpositive {column} at n={curve.n[y <= 0].astype(int).tolist()}")
    x = np.log(curve.n)
    ly = np.log(y)
    if weighted:
        se = curve.column("stderr")
        w = np.where(se > 0, y / np.maximum(se, 1e-300), 1.0)
        return float(np.polyfit(x, ly, 1, w=w)[0])
    xc = x - x.mean()
    return float(np.dot(xc, ly - ly.mean()) / np.dot(xc, xc))


def scaled_theorem_statistic(curve: LearningCurve, d: int, delta: float, p: float) -> list[float]:
    """n p mean_excess / (d log(n/d) + log(1/delta)) per row, clamped logs."""
    if p <= 0:
        raise ValidationError(f"p must be positive, got {p!r}")
    if d < 1 or not (0 < delta < 1):
        raise ValidationError("need d >= 1 and delta in (0, 1)")
    out = []
    for r in curve.rows:
        bound = d * clamped_log(r.n / d) + clamped_log(1.0 / delta)
        out.append(r.n * p * r.mean_excess / bound)
    return out
