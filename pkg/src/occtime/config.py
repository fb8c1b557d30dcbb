"""YAML run configuration for the command-line front end.

A run names exactly one of ``law`` (a sojourn-pair law) or ``model`` (a
spectrally positive Lévy model, used with the level ``tau``)::

    model: {kind: cp_exp_drift, lam: 0.5, jump_mean: 1.0}
    tau: 1.0
    query: {theta: [1.0], q: [1.0], t: [10.0], x: [7.0]}
    inversion: {terms: 41, euler_order: 12, target_abs_tol: 1.0e-8}
    simulation: {replications: 2000, horizon: 10.0}
    seed: 7
    output: {path: out.csv, format: csv}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .inversion import InversionConfig
from .lattice import LatticeConfig
from .laws import law_from_dict
from .levy_scale import model_from_dict

__all__ = ["FORMATS", "RunConfig", "load_config"]

FORMATS = ("csv", "json")
SECTIONS = {"law", "model", "tau", "query", "inversion", "lattice", "simulation", "seed", "output", "validate"}


@dataclass
class RunConfig:
    raw: dict
    law: object = None
    model: object = None
    tau: float = 0.0
    query: dict = field(default_factory=dict)
    inversion: InversionConfig = field(default_factory=InversionConfig)
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    simulation: dict = field(default_factory=dict)
    seed: int = 0
    out_path: str | None = None
    out_format: str = "csv"
    validate: dict = field(default_factory=dict)

    @property
    def seed_given(self):
        return "seed" in self.raw or "seed" in self.simulation

    @property
    def digest(self):
        """SHA-256 of the canonical JSON form of the raw mapping."""
        text = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(text.encode()).hexdigest()

    def floats(self, key, default=None):
        v = self.query.get(key, default)
        if v is None:
            raise ConfigError(f"query.{key} is required for this command")
        return [float(a) for a in (v if isinstance(v, (list, tuple)) else [v])]


def _section(raw, key):
    v = raw.get(key) or {}
    if not isinstance(v, dict):
        raise ConfigError(f"section {key!r} must be a mapping")
    return v


def parse_config(raw, *, need_subject=True):
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("configuration is empty")
    unknown = set(raw) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    has_law, has_model = "law" in raw, "model" in raw
    if has_law and has_model:
        raise ConfigError("give exactly one of 'law' or 'model', not both")
    if need_subject and not (has_law or has_model):
        raise ConfigError("give exactly one of 'law' or 'model'")
    cfg = RunConfig(raw=raw)
    try:
        if has_law:
            cfg.law = law_from_dict(_section(raw, "law"))
        if has_model:
            cfg.model = model_from_dict(_section(raw, "model"))
        cfg.tau = float(raw.get("tau", 0.0))
        cfg.inversion = InversionConfig(**_section(raw, "inversion"))
        cfg.lattice = LatticeConfig(**_section(raw, "lattice"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    cfg.query = _section(raw, "query")
    cfg.simulation = _section(raw, "simulation")
    cfg.validate = _section(raw, "validate")
    cfg.seed = int(raw.get("seed", cfg.simulation.get("seed", 0)))
    out = _section(raw, "output")
    cfg.out_path = out.get("path")
    cfg.out_format = out.get("format", "csv")
    if cfg.out_format not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}")
    if cfg.tau < 0:
        raise ConfigError("tau must be nonnegative")
    return cfg


def load_config(path, *, need_subject=True):
    """Read and validate a YAML run configuration."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(raw, need_subject=need_subject)
