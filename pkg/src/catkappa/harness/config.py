"""Batch/scenario configuration: parsing, defaults and validation."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

SUBJECTS = ("isometry", "polytope", "circumcenter", "hemisphere", "gram")
DEFAULT_TOLERANCES = {"verify": 1e-6, "kernel": 1e-9}
_REQUIRED = {
    "isometry": ("space",),
    "polytope": ("polytope",),
    "gram": ("polytope",),
    "circumcenter": ("space",),
    "hemisphere": (),
}


@dataclass
class Scenario:
    id: str
    subject: str
    params: dict
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 0

    def rng(self) -> np.random.Generator:
        """Stream keyed by (batch seed, scenario id): independent of batch composition."""
        digest = int.from_bytes(hashlib.sha256(self.id.encode()).digest()[:8], "little")
        return np.random.default_rng(np.random.SeedSequence([self.seed, digest]))

    def to_dict(self) -> dict:
        d = {"id": self.id, "subject": self.subject, "tolerances": dict(self.tolerances), "seed": self.seed}
        d.update(self.params)
        return d


def _check_u64(seed):
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def _tolerances(obj, base):
    tol = dict(base)
    if obj is None:
        return tol
    if not isinstance(obj, dict):
        raise ConfigError("tolerances must be an object")
    for k, v in obj.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError("unknown tolerance %r" % k)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError("tolerance %r must be a positive number" % k)
        tol[k] = float(v)
    return tol


def parse_scenario(obj, defaults: dict | None = None) -> Scenario:
    defaults = defaults or {}
    if not isinstance(obj, dict):
        raise ConfigError("a scenario must be an object")
    obj = copy.deepcopy(obj)
    sid = obj.pop("id", None)
    if not isinstance(sid, str) or not sid:
        raise ConfigError("scenario needs a non-empty string 'id'")
    subject = obj.pop("subject", None)
    if subject not in SUBJECTS:
        raise ConfigError("scenario %s: subject must be one of %s" % (sid, ", ".join(SUBJECTS)))
    for key in _REQUIRED[subject]:
        if key not in obj:
            raise ConfigError("scenario %s: %s scenarios need %r" % (sid, subject, key))
    base_tol = _tolerances(defaults.get("tolerances"), DEFAULT_TOLERANCES)
    tol = _tolerances(obj.pop("tolerances", None), base_tol)
    seed = _check_u64(obj.pop("seed", defaults.get("seed", 0)))
    return Scenario(sid, subject, obj, tol, seed)


@dataclass
class Batch:
    scenarios: list
    defaults: dict
    errors: list = field(default_factory=list)


def parse_batch(obj, seed: int | None = None, tol: float | None = None, strict: bool = False) -> Batch:
    """Parse a batch object.  Malformed scenarios become (id, message) errors
    unless ``strict``; a malformed top level always raises."""
    if not isinstance(obj, dict):
        raise ConfigError("batch file must hold a JSON object")
    unknown = set(obj) - {"scenarios", "defaults"}
    if unknown:
        raise ConfigError("unknown top-level keys: %s" % ", ".join(sorted(unknown)))
    scen = obj.get("scenarios", [])
    if not isinstance(scen, list):
        raise ConfigError("'scenarios' must be a list")
    defaults = obj.get("defaults", {}) or {}
    if not isinstance(defaults, dict):
        raise ConfigError("'defaults' must be an object")
    defaults = dict(defaults)
    if seed is not None:
        defaults["seed"] = _check_u64(seed)
    else:
        defaults["seed"] = _check_u64(defaults.get("seed", 0))
    defaults["tolerances"] = _tolerances(defaults.get("tolerances"), DEFAULT_TOLERANCES)
    if tol is not None:
        defaults["tolerances"]["verify"] = _tolerances({"verify": tol}, DEFAULT_TOLERANCES)["verify"]
    out, errors, seen = [], [], set()
    for i, s in enumerate(scen):
        sid = s.get("id") if isinstance(s, dict) and isinstance(s.get("id"), str) else "#%d" % i
        try:
            if sid in seen:
                raise ConfigError("duplicate scenario id %r" % sid)
            sc = parse_scenario(s, defaults)
            if tol is not None:
                sc.tolerances["verify"] = defaults["tolerances"]["verify"]
            out.append(sc)
        except ConfigError as exc:
            if strict:
                raise
            errors.append((sid, str(exc)))
        seen.add(sid)
    return Batch(out, defaults, errors)


def load_batch(path, seed=None, tol=None, strict=False) -> Batch:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("%s is not valid JSON: %s" % (path, exc)) from None
    return parse_batch(obj, seed=seed, tol=tol, strict=strict)
