"""Experiment configuration: JSON document, overridden field by field by CLI flags.

Recognised keys (all optional in the file, see README for meaning)::

    experiment, n, beta, k, ell, M, delta, delta_frac, C, replicas, seed,
    out, grid, threads, starts
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..errors import InvalidParameter

DEFAULT_SEED = 20180101
SEED_ENV = "STIRRING_LAB_SEED"
GRID_POLICIES = ("auto", "event", "fixed")


@dataclass
class ExperimentConfig:
    experiment: str
    n: int | None = None
    beta: list[float] = field(default_factory=lambda: [0.8])
    k: int | None = None
    ell: int | None = None
    M: int | None = None
    delta: float | None = None
    delta_frac: float | None = None
    C: float = 2.0
    replicas: int = 100
    seed: int | None = None
    out: str | None = None
    grid: str = "auto"
    threads: int = 1
    starts: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.n is None:
            raise InvalidParameter("n is required (flag --n or config key 'n')")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidParameter(f"n must be an integer >= 2, got {self.n}")
        if not self.beta or any(b < 0 for b in self.beta):
            raise InvalidParameter("beta values must be >= 0")
        if self.replicas < 1:
            raise InvalidParameter("replicas must be >= 1")
        if self.threads < 1:
            raise InvalidParameter("threads must be >= 1")
        if self.grid not in GRID_POLICIES:
            raise InvalidParameter(f"grid must be one of {GRID_POLICIES}")
        if self.seed is None:
            self.seed = int(os.environ.get(SEED_ENV, DEFAULT_SEED))
        return self

    def echo(self) -> dict:
        """Config fields that determine the results (no output path, no worker count)."""
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        return d


def load_config(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise InvalidParameter("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
    if "beta" in doc and not isinstance(doc["beta"], list):
        doc["beta"] = [doc["beta"]]
    return doc


def merge(experiment: str, file_values: dict, overrides: dict) -> ExperimentConfig:
    values = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    values["experiment"] = experiment
    return ExperimentConfig(**values).validate()
