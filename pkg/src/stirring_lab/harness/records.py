from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "stirring-lab/1"
Z95 = 1.959963984540054


def mean_ci(values) -> dict:
    """Mean, sample variance and a normal-approximation 95% interval."""
    x = np.asarray(values, dtype=float)
    m = float(x.mean()) if x.size else float("nan")
    var = float(x.var(ddof=1)) if x.size > 1 else 0.0
    half = Z95 * math.sqrt(var / x.size) if x.size else float("nan")
    return {"mean": m, "var": var, "ci95": [m - half, m + half], "count": int(x.size)}


def proportion_ci(successes: int, trials: int) -> dict:
    p = successes / trials
    half = Z95 * math.sqrt(p * (1 - p) / trials)
    return {"p": p, "ci95": [max(0.0, p - half), min(1.0, p + half)],
            "successes": int(successes), "trials": int(trials)}


@dataclass
class RunRecord:
    experiment: str
    config: dict
    replicas: list[dict]
    aggregate: dict
    seed: int
    version: str
    warnings: list[str] = field(default_factory=list)
    runtime: dict = field(default_factory=dict)

    def to_dict(self, with_runtime: bool = True) -> dict:
        d = {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "version": self.version,
            "seed": self.seed,
            "config": self.config,
            "warnings": self.warnings,
            "aggregate": self.aggregate,
            "replicas": self.replicas,
        }
        if with_runtime:
            d["runtime"] = self.runtime
        return d

    def to_json(self, with_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(with_runtime), sort_keys=True)

    def write(self, path: str | Path) -> tuple[Path, Path]:
        """Write the record as one JSON line plus a per-replica CSV next to it."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n")
        table = path.with_suffix(".replicas.csv")
        write_csv(table, self.replicas)
        return path, table


def write_csv(path: Path, rows: list[dict]) -> None:
    cols: list[str] = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
