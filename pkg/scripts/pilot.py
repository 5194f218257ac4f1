"""Pilot runs that calibrate the acceptance thresholds; writes tests/fixtures/pilot.json.

    python3 scripts/pilot.py            # about two minutes on one core
"""
from __future__ import annotations

import json
import math
import statistics
import sys
from pathlib import Path

from stirring_lab.harness.config import ExperimentConfig
from stirring_lab.harness.experiments import coupling, phase_sweep

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "pilot.json"


def main() -> int:
    phase_cfg = ExperimentConfig("phase-sweep", n=64, beta=[0.3, 0.45, 0.55, 0.8],
                                 replicas=200, seed=1).validate()
    phase = phase_sweep(phase_cfg).aggregate
    scaling = {}
    for n in (32, 64, 128):
        cfg = ExperimentConfig("phase-sweep", n=n, beta=[0.3], replicas=100, seed=2).validate()
        scaling[str(n)] = phase_sweep(cfg).aggregate["per_beta"][0]["median_max_cycle"]

    n = 32
    cfg = ExperimentConfig("coupling", n=n, beta=[0.8], ell=n, replicas=100, seed=5).validate()
    rows = coupling(cfg).replicas
    median_mass = statistics.median(r["mass_graph_0"] / n ** 2 for r in rows)

    doc = {
        "phase": {
            "command": "phase_sweep(n=64, beta=[0.3,0.45,0.55,0.8], replicas=200, seed=1)",
            "threshold": math.ceil(64 ** 1.5),
            "per_beta": [{k: b[k] for k in ("beta", "long_fraction", "median_max_cycle")}
                         for b in phase["per_beta"]],
        },
        "subcritical_scaling": {
            "command": "phase_sweep(n in {32,64,128}, beta=[0.3], replicas=100, seed=2)",
            "median_max_cycle": scaling,
        },
        "sprinkling": {
            "command": "coupling(n=32, beta=0.8, ell=32, replicas=100, seed=5)",
            "median_initial_mass_fraction": median_mass,
            "delta_frac": median_mass / 2,
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
