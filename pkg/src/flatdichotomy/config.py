"""Experiment configuration: JSON file values overridden by command-line flags."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

SEED_ENV = "SEED"


@dataclass
class ExperimentConfig:
    command: str = ""
    space: Optional[str] = None
    p: Optional[int] = None
    q: Optional[int] = None
    point: Optional[list] = None
    t: Optional[float] = None
    k: Optional[int] = None
    kmax: Optional[int] = None
    levels: Optional[int] = None
    samples: Optional[int] = None
    seed: int = 0
    format: str = "json"
    out: Optional[str] = None
    strict: bool = False
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        base = {k: v for k, v in data.items() if k in known}
        extra = {k: v for k, v in data.items() if k not in known}
        cfg = cls(**base)
        cfg.options = {**extra, **cfg.options}
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def load_config(path: Optional[str], overrides: dict, command: str) -> ExperimentConfig:
    """File first, then every flag that was given explicitly, then the SEED variable."""
    data: dict = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"config {path} must hold a JSON object")
    cfg = ExperimentConfig.from_dict(data)
    cfg.command = command
    known = {f.name for f in fields(ExperimentConfig)}
    for key, val in overrides.items():
        if val is None:
            continue
        if key in known:
            setattr(cfg, key, val)
        else:
            cfg.options[key] = val
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        cfg.seed = int(env)
    return cfg
