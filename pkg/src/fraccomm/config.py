"""Run configuration: TOML loading, flag overrides and a canonical hash.

Schema (all keys optional)::

    command = "sweep"            # apply | check | sweep | weights | info
    seed = 42
    workers = 4
    out = "out"
    explore_outside = false

    [domain]
    dim = 1
    kind = "line"                # line | torus
    extent = 20.0                # half-width R (line) or period L (torus)
    resolution = 1024
    resolutions = [512, 1024]    # sweeps only

    [apply]
    operator = "ds_spectral"
    inputs = ["u.grid"]          # sampled from the first family when empty
    params = { s = 0.7 }

    [check]
    name = "pointwise_cs"

    [sweep]
    inequality = "besov"
    points = [{ s1 = 0.45, s2 = 0.45, p1 = 2, p2 = 2, q1 = 2, q2 = 2 }]

    [weights]
    exponents = [0.2, 0.5, 0.9, 1.2]
    p = [1.5, 2.0, 3.0]

    [[families]]
    family = "gaussian"
    sigma = 1.0

    [tolerances]                 # overrides for named checks
    identity_commint = 1e-2
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DomainConfig:
    dim: int = 1
    kind: str = "line"
    extent: float = 20.0
    resolution: int = 1024
    resolutions: tuple = (512, 1024)


@dataclass(frozen=True)
class RunConfig:
    command: str = "info"
    seed: int = 42
    workers: int | None = None
    out: str = "out"
    explore_outside: bool = False
    domain: DomainConfig = field(default_factory=DomainConfig)
    operator: str | None = None
    inputs: tuple = ()
    params: dict = field(default_factory=dict)
    check: str | None = None
    inequality: str | None = None
    points: tuple = ()
    families: tuple = ()
    weight_exponents: tuple = (0.2, 0.5, 0.9, 1.2)
    weight_p: tuple = (1.5, 2.0, 3.0)
    tolerances: dict = field(default_factory=dict)

    def canonical(self) -> dict:
        """Serializable view; ``out`` and ``workers`` do not affect results."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def override(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        dom_kw = {k: kw.pop(k) for k in list(kw) if k in {f.name for f in fields(DomainConfig)}}
        cfg = replace(self, **kw)
        if dom_kw:
            cfg = replace(cfg, domain=replace(cfg.domain, **dom_kw))
        return cfg


def from_mapping(doc: dict) -> RunConfig:
    known = {"command", "seed", "workers", "out", "explore_outside", "domain", "apply", "check", "sweep",
             "weights", "families", "tolerances"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = {k: doc[k] for k in ("command", "seed", "workers", "out", "explore_outside") if k in doc}
    try:
        if "domain" in doc:
            d = dict(doc["domain"])
            if "resolutions" in d:
                d["resolutions"] = tuple(int(v) for v in d["resolutions"])
            kw["domain"] = DomainConfig(**d)
        ap = doc.get("apply", {})
        kw.update(operator=ap.get("operator"), inputs=tuple(ap.get("inputs", ())), params=dict(ap.get("params", {})))
        kw["check"] = doc.get("check", {}).get("name")
        sw = doc.get("sweep", {})
        kw["inequality"] = sw.get("inequality")
        kw["points"] = tuple(dict(p) for p in sw.get("points", ()))
        kw["families"] = tuple(dict(f) for f in doc.get("families", ()))
        w = doc.get("weights", {})
        if "exponents" in w:
            kw["weight_exponents"] = tuple(float(a) for a in w["exponents"])
        if "p" in w:
            kw["weight_p"] = tuple(float(p) for p in w["p"])
        kw["tolerances"] = dict(doc.get("tolerances", {}))
        return RunConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    return from_mapping(doc)
