"""Command-line front end: learn, experiment, diameter, verify.

Settings come from an optional JSON config file; flags given on the command
line override it.  Exit status is 0 on success, 2 on invalid input and 3
when a computation exceeds its budget.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from ._parallel import stream
from .core import (
    combinatorial_diameter,
    population_minimizer,
    sample,
    vc_dimension,
)
from .errors import BudgetExceededError, ValidationError
from .experiments import (
    Construction,
    FixedFamily,
    LearnerSpec,
    TwoFunctionFamily,
    fit_learner,
    fit_rate_slope,
    make_two_function_construction,
    make_wellspecified_massart,
    monte_carlo_curve,
    threshold_class,
)
from .misspecified import DEFAULT_C1, DEFAULT_C2, dpx_diameter
from .reject import AbstainerModel, abstaining_learner
from .theory import (
    bernstein_estimate,
    excess_loss_deviation_check,
    identity_check_rp_lq,
    ratio_bound_check,
    target_membership_check,
)

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3
COMMANDS = ("learn", "experiment", "diameter", "verify")
CHECKS = ("identity", "membership", "ratio", "excess_loss", "bernstein")


@dataclass
class RunConfig:
    command: str
    class_path: str | None = None
    dist_path: str | None = None
    learner: str = "abstain"
    p: float = 0.25
    h: float | None = None
    q: float = 2.0
    c: float = 1.0
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    delta: float = 0.05
    n: int = 100
    n_grid: list[int] = field(default_factory=lambda: [64, 128, 256, 512])
    reps: int = 200
    seed: int = 0
    risk: str = "R"
    check: str = "identity"
    trials: int = 200
    beta: float = 1.0
    family: dict | None = None
    output: str = "."
    workers: int | None = None

    def constants(self) -> dict:
        return {"c": self.c, "c1": self.c1, "c2": self.c2, "delta": self.delta}

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not (0.0 < self.delta < 1.0):
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.c < 0 or self.c1 <= 0 or self.c2 <= 0:
            raise ValidationError("constants must satisfy c >= 0, c1 > 0, c2 > 0")
        if self.seed < 0:
            raise ValidationError(f"seed must be nonnegative, got {self.seed}")
        for path in (self.class_path, self.dist_path):
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"file not found: {path}")

    def hashed(self) -> dict:
        d = asdict(self)
        d.pop("output")
        d.pop("workers")
        return d


FLAG_FIELDS = {
    "class_path": str, "dist_path": str, "learner": str, "p": float, "h": float, "q": float,
    "c": float, "c1": float, "c2": float, "delta": float, "n": int, "reps": int, "seed": int,
    "risk": str, "check": str, "trials": int, "beta": float, "output": str, "workers": int,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rejectlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file with RunConfig fields")
        sp.add_argument("--class", dest="class_path", help="class JSON {m, members}")
        sp.add_argument("--dist", dest="dist_path", help="distribution JSON {m, weights, eta1}")
        sp.add_argument("--learner", choices=["erm", "abstain", "lq", "finite_diameter",
                                              "dist_dependent", "memorize", "oracle"])
        for flag in ("p", "h", "q", "c", "c1", "c2", "delta", "beta"):
            sp.add_argument(f"--{flag}", type=float)
        for flag in ("n", "reps", "seed", "trials", "workers"):
            sp.add_argument(f"--{flag}", type=int)
        sp.add_argument("--n-grid", dest="n_grid", help="comma separated sizes")
        sp.add_argument("--risk", choices=["R", "Rp", "R0"])
        sp.add_argument("--check", choices=CHECKS)
        sp.add_argument("--family", help="inline JSON family description")
        sp.add_argument("--out", dest="output", help="output directory")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = io.load_config(args.config) if args.config else {}
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(base) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    base = {k: v for k, v in base.items() if k != "command"}
    for key in FLAG_FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if args.n_grid:
        try:
            base["n_grid"] = [int(x) for x in args.n_grid.split(",") if x.strip()]
        except ValueError:
            raise ValidationError(f"--n-grid must be comma separated integers, got {args.n_grid!r}") from None
    if args.family:
        try:
            base["family"] = json.loads(args.family)
        except json.JSONDecodeError:
            raise ValidationError("--family must be a JSON object") from None
    cfg = RunConfig(command=args.command, **base)
    cfg.validate()
    return cfg


# --------------------------------------------------------------------------
# commands


def _need(cfg: RunConfig, *keys):
    for k in keys:
        if getattr(cfg, k) is None:
            raise ValidationError(f"{cfg.command} needs --{k.replace('_path', '')}")


def _learner_spec(cfg: RunConfig) -> LearnerSpec:
    params = {"delta": cfg.delta, "c": cfg.c}
    if cfg.learner == "abstain":
        params["p"] = cfg.p
    elif cfg.learner == "lq":
        params["q"] = cfg.q
    elif cfg.learner == "finite_diameter" and cfg.h is not None:
        params["h"] = cfg.h
    elif cfg.learner == "dist_dependent":
        params.update(c1=cfg.c1, c2=cfg.c2)
    return LearnerSpec(cfg.learner, params)


def _files_construction(cfg: RunConfig) -> Construction:
    _need(cfg, "class_path", "dist_path")
    cls, dist = io.load_class(cfg.class_path), io.load_distribution(cfg.dist_path)
    if cls.m != dist.m:
        raise ValidationError(f"domain size mismatch: class m={cls.m}, dist m={dist.m}")
    return Construction(cls, dist, {"family": "files", "params": {
        "class": cfg.class_path, "dist": cfg.dist_path}})


def _family(cfg: RunConfig):
    if cfg.family is None:
        return FixedFamily(_files_construction(cfg))
    fam = dict(cfg.family)
    kind = fam.pop("type", None)
    try:
        if kind == "two_function":
            return FixedFamily(make_two_function_construction(**fam))
        if kind == "two_function_sequence":
            return TwoFunctionFamily(**fam)
        if kind == "massart_threshold":
            m = int(fam["m"])
            cls = threshold_class(m)
            return FixedFamily(make_wellspecified_massart(
                cls, int(fam.get("fstar_index", m // 2)), float(fam["h"]), np.full(m, 1.0 / m)))
    except TypeError as exc:
        raise ValidationError(f"bad family parameters for {kind!r}: {exc}") from None
    raise ValidationError(
        f"unknown family type {kind!r}; expected two_function, two_function_sequence "
        "or massart_threshold"
    )


def _stem(cfg: RunConfig) -> Path:
    return Path(cfg.output) / f"{cfg.command}-{io.config_hash(cfg.hashed())}"


def _meta(cfg: RunConfig, **extra) -> dict:
    return {"config": cfg.hashed(), "constants": cfg.constants(),
            "version": io.artifact_version(),
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(), **extra}


def cmd_learn(cfg: RunConfig) -> list[Path]:
    con = _family(cfg).at(cfg.n)
    s = sample(con.dist, cfg.n, stream(cfg.seed, cfg.n, 0))
    out = fit_learner(_learner_spec(cfg), con, s)
    body = {"learner": cfg.learner, "constants": cfg.constants(), "m": con.cls.m}
    if isinstance(out, AbstainerModel):
        body["model"] = out.to_json()
        body["values"] = str(out.values)
    else:
        body["hypothesis"] = str(out)
    stem = _stem(cfg)
    paths = [io.write_json(stem.with_suffix(".json"), body),
             io.write_json(stem.with_suffix(".meta.json"), _meta(cfg))]
    print(json.dumps(body, sort_keys=True))
    return paths


def cmd_experiment(cfg: RunConfig) -> list[Path]:
    fam = _family(cfg)
    curve = monte_carlo_curve(fam, _learner_spec(cfg), cfg.n_grid, cfg.reps, cfg.risk,
                              cfg.seed, workers=cfg.workers)
    try:
        slope = fit_rate_slope(curve)
    except ValidationError as exc:
        slope = str(exc)
    stem = _stem(cfg)
    paths = [io.atomic_write_text(stem.with_suffix(".csv"), curve.to_csv()),
             io.write_json(stem.with_suffix(".json"), _meta(cfg, curve=curve.sidecar(),
                                                           slope=slope))]
    sys.stdout.write(curve.to_csv())
    return paths


def cmd_diameter(cfg: RunConfig) -> list[Path]:
    _need(cfg, "class_path")
    cls = io.load_class(cfg.class_path)
    report = {"d": vc_dimension(cls), "D": combinatorial_diameter(cls)}
    if cfg.dist_path is not None:
        dist = io.load_distribution(cfg.dist_path)
        dr = dpx_diameter(cls, dist, cfg.n, cfg.c1)
        report.update(D_PX=dr.value, D_PX_exact=dr.exact, n=cfg.n, c1=cfg.c1)
    print(json.dumps(report, separators=(",", ":")))
    if cfg.output != ".":
        return [io.write_json(_stem(cfg).with_suffix(".json"),
                              {**report, "constants": cfg.constants()})]
    return []


def cmd_verify(cfg: RunConfig) -> list[Path]:
    con = _files_construction(cfg) if cfg.family is None else _family(cfg).at(cfg.n)
    cls, dist = con.cls, con.dist
    params = {"n": cfg.n, "trials": cfg.trials, "seed": cfg.seed, **cfg.constants()}
    if cfg.check == "identity":
        vals = []
        for t in range(cfg.trials):
            s = sample(dist, 2 * max(cfg.n // 2, 1), stream(cfg.seed, t))
            model = abstaining_learner(cls, s, cfg.delta, cfg.p, cfg.c)
            vals.append(identity_check_rp_lq(model, dist, con.fstar_risk, min(cfg.p, 0.25)))
        worst = max(vals)
        report = {"check": "identity", "params": {**params, "p": cfg.p}, "trials": cfg.trials,
                  "quantiles": {"1": worst}, "pass_criteria_if_any": {"max <= 1e-12": worst <= 1e-12}}
    elif cfg.check == "membership":
        freq = target_membership_check(cls, dist, cfg.n, cfg.delta, cfg.c, cfg.trials, cfg.seed,
                                       cfg.workers)
        _, _, tied = population_minimizer(cls, dist)
        report = {"check": "membership", "params": {**params, "fstar_ties": tied},
                  "trials": cfg.trials, "quantiles": {}, "frequency": freq,
                  "pass_criteria_if_any": None}
    elif cfg.check == "ratio":
        report = ratio_bound_check(cls, dist, cfg.n, cfg.delta, cfg.trials, cfg.seed,
                                   cfg.workers).to_report("ratio")
    elif cfg.check == "excess_loss":
        report = excess_loss_deviation_check(cls, dist, cfg.n, cfg.delta, cfg.q, cfg.trials,
                                             cfg.seed, cfg.workers).to_report("excess_loss")
    else:
        b = bernstein_estimate(cls, dist, cfg.beta)
        report = {"check": "bernstein", "params": {"beta": cfg.beta}, "trials": 0,
                  "quantiles": {}, "B": "inf" if math.isinf(b) else b,
                  "pass_criteria_if_any": None}
    report["constants"] = cfg.constants()
    print(json.dumps(report, sort_keys=True))
    return [io.write_json(_stem(cfg).with_suffix(".json"), report)]


DISPATCH = {"learn": cmd_learn, "experiment": cmd_experiment,
            "diameter": cmd_diameter, "verify": cmd_verify}


def run(cfg: RunConfig) -> int:
    try:
        DISPATCH[cfg.command](cfg)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TypeError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
