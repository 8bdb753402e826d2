"""JSON formats for classes and distributions, and atomic report writing."""

from __future__ import annotations

import hashlib
import json
import os
import subprocess
import tempfile
from pathlib import Path

from . import __version__
from .core import FiniteDistribution, HypothesisClass
from .errors import ValidationError


def _read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"file not found: {p}")
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"{p}: expected a JSON object")
    return obj


def distribution_from_json(obj: dict) -> FiniteDistribution:
    for key in ("m", "weights", "eta1"):
        if key not in obj:
            raise ValidationError(f"distribution JSON missing key {key!r}")
    m = int(obj["m"])
    if len(obj["weights"]) != m or len(obj["eta1"]) != m:
        raise ValidationError(f"distribution JSON: weights and eta1 must have length m={m}")
    return FiniteDistribution(obj["weights"], obj["eta1"])


def distribution_to_json(dist: FiniteDistribution) -> dict:
    return {"m": dist.m, "weights": dist.weights.tolist(), "eta1": dist.eta1.tolist()}


def class_from_json(obj: dict) -> HypothesisClass:
    for key in ("m", "members"):
        if key not in obj:
            raise ValidationError(f"class JSON missing key {key!r}")
    m = int(obj["m"])
    members = list(obj["members"])
    if not members:
        raise ValidationError("class JSON: members must be nonempty")
    bad = [b for b in members if len(b) != m or set(b) - {"0", "1"}]
    if bad:
        raise ValidationError(f"class JSON: member {bad[0]!r} is not a 0/1 string of length m={m}")
    return HypothesisClass.from_strings(members)


def class_to_json(cls: HypothesisClass) -> dict:
    return {"m": cls.m, "members": cls.strings()}


def load_distribution(path) -> FiniteDistribution:
    return distribution_from_json(_read_json(path))


def load_class(path) -> HypothesisClass:
    return class_from_json(_read_json(path))


def load_config(path) -> dict:
    return _read_json(path)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path, text: str) -> Path:
    """Write to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps(obj))


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def artifact_version() -> str:
    """Package version, with the git commit appended when available."""
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__
