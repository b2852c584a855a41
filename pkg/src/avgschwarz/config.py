"""Experiment configuration: JSON schema validation, defaults and hashing."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .assembly import SpaceType
from .coefficient import CoefficientGeometry
from .krylov import DEFAULT_TOL
from .precond import Variant
from .spectral import FixedPolicy, Policy, ThresholdPolicy

DEFAULTS = {
    "n": 36,
    "N_side": 6,
    "geometry": {
        "alpha_b": 1.0,
        "alpha_c": 1e4,
        "alpha_i": 1e6,
        "channel_width_fraction": 1.0 / 6.0,
        "inclusion_side_fraction": 1.0 / 3.0,
        "channels_continuous": False,
    },
    "type": "layer",
    "variant": "add",
    "enrichment": {"threshold": 100.0},
    "tolerance": DEFAULT_TOL,
    "residual_norm": "unpreconditioned",
    "max_iter": None,
    "sweep": {
        "N_side": [3, 6, 9],
        "n": [18, 36, 54],
        "min_ratio": 6,
        "jumps": [[1e2, 1e4], [1e4, 1e6]],
        "variants": ["add", "mlt"],
    },
    "fixed_counts": [0, 2, 4, 5, 6, 7],
    "output": {},
}


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    text = resources.files("avgschwarz").joinpath("config_schema.json").read_text()
    return json.loads(text)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key != "enrichment":
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass
class ExperimentConfig:
    n: int
    N_side: int
    geometry: CoefficientGeometry
    space_type: SpaceType
    variant: Variant
    policy: Policy
    tolerance: float
    residual_norm: str
    max_iter: int | None
    sweep: dict
    fixed_counts: list
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict | None = None) -> "ExperimentConfig":
        data = data or {}
        try:
            jsonschema.validate(data, load_schema())
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {path}: {exc.message}") from exc
        d = _merge(DEFAULTS, data)
        if d["n"] % d["N_side"]:
            raise ConfigError(f"n={d['n']} is not divisible by N_side={d['N_side']}")
        enr = d["enrichment"]
        policy = ThresholdPolicy(float(enr["threshold"])) if "threshold" in enr else FixedPolicy(int(enr["fixed"]))
        return cls(
            n=d["n"],
            N_side=d["N_side"],
            geometry=CoefficientGeometry(**d["geometry"]),
            space_type=SpaceType(d["type"]),
            variant=Variant(d["variant"]),
            policy=policy,
            tolerance=float(d["tolerance"]),
            residual_norm=d["residual_norm"],
            max_iter=d["max_iter"],
            sweep=d["sweep"],
            fixed_counts=list(d["fixed_counts"]),
            output=d["output"],
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        g = self.geometry
        if isinstance(self.policy, ThresholdPolicy):
            enr = {"threshold": self.policy.threshold}
        else:
            enr = {"fixed": self.policy.count}
        return {
            "n": self.n,
            "N_side": self.N_side,
            "geometry": {
                "alpha_b": g.alpha_b,
                "alpha_c": g.alpha_c,
                "alpha_i": g.alpha_i,
                "channel_width_fraction": g.channel_width_fraction,
                "inclusion_side_fraction": g.inclusion_side_fraction,
                "channels_continuous": g.channels_continuous,
            },
            "type": self.space_type.value,
            "variant": self.variant.value,
            "enrichment": enr,
            "tolerance": self.tolerance,
            "residual_norm": self.residual_norm,
            "max_iter": self.max_iter,
            "sweep": copy.deepcopy(self.sweep),
            "fixed_counts": list(self.fixed_counts),
            "output": dict(self.output),
        }

    def replace(self, **changes) -> "ExperimentConfig":
        new = copy.copy(self)
        for k, v in changes.items():
            if not hasattr(new, k):
                raise AttributeError(k)
            setattr(new, k, v)
        return new

    def solver_hash(self) -> str:
        """Short digest of everything that determines a single run's result."""
        d = self.to_dict()
        for key in ("sweep", "fixed_counts", "output"):
            d.pop(key)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def sweep_pairs(self) -> list[tuple[int, int]]:
        """(N_side, n) cells of the H/h sweep, coarse grids outermost."""
        s = self.sweep
        pairs = [
            (N, n)
            for N in s["N_side"]
            for n in s["n"]
            if n % N == 0 and n // N >= s.get("min_ratio", 2)
        ]
        if not pairs:
            raise ConfigError("sweep lists produce no (N_side, n) pair with n divisible by N_side")
        return pairs
