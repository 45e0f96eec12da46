"""Regenerate the packaged verification fixture.

Runs a handful of small, deterministic coincidence cases and freezes their
exact counts.  `bellmc verify` replays these and demands equality, which
catches any change to sampling, folding, model evaluation, or counting.

Usage: python3 scripts/make_verify_fixture.py
"""

import json
import os

from bellmc.cli import DEFAULT_FIXTURE, _base_run_config
from bellmc.config import from_mapping
from bellmc.engine import run_coincidence

CASES = [
    {
        "name": "malus-probabilistic-gaussian-source",
        "config": {
            "source": {
                "kind": "gaussian",
                "transverse_spread": 5.0,
                "cone_half_angle": "0.001 rad",
                "center": [0.0, 0.0],
            },
            "geometry": {"length_1": 1000.0, "length_2": 1000.0},
            "lattice": {"period": 1.0, "rotation_center": [0.0, 0.0]},
            "model": {"both": {"type": "malus-probabilistic"}},
            "run": {"events": 20000, "seed": 20260815, "workers": 1},
            "settings": {"pair": {"alpha": "0 rad", "beta": "22.5 deg"}},
        },
    },
    {
        "name": "deterministic-vs-scalar",
        "config": {
            "source": {
                "kind": "uniform-disc",
                "transverse_spread": 2.0,
                "cone_half_angle": "0.002 rad",
                "center": [0.1, -0.2],
            },
            "geometry": {"length_1": 500.0, "length_2": 750.0},
            "lattice": {"period": 0.8, "rotation_center": [0.05, 0.0]},
            "model": {
                "device_1": {"type": "malus-deterministic"},
                "device_2": {
                    "type": "scalar-particle",
                    "amplitude": 0.9,
                    "radial_profile": "gaussian",
                    "scale": 0.3,
                },
            },
            "run": {"events": 20000, "seed": 31, "workers": 1},
            "settings": {"pair": {"alpha": "30 deg", "beta": "-10 deg"}},
        },
    },
    {
        "name": "impact-modulated-point-source",
        "config": {
            "source": {
                "kind": "point",
                "transverse_spread": 0.0,
                "cone_half_angle": "0.0005 rad",
                "center": [0.3, 0.1],
            },
            "geometry": {"length_1": 1000.0, "length_2": 1000.0},
            "lattice": {"period": 1.0, "rotation_center": [0.0, 0.0]},
            "model": {
                "both": {
                    "type": "impact-modulated",
                    "epsilon": 0.5,
                    "radial_profile": "gaussian",
                    "scale": 0.4,
                }
            },
            "run": {"events": 20000, "seed": 77, "workers": 1},
            "settings": {"pair": {"alpha": "0 rad", "beta": "45 deg"}},
        },
    },
]


def main() -> None:
    cases = []
    for case in CASES:
        cfg = from_mapping(case["config"])
        alpha, beta = cfg.settings
        run = _base_run_config(cfg, "verify", None, None, None, alpha=alpha, beta=beta)
        counts = run_coincidence(run).counts()
        cases.append({
            "name": case["name"],
            "label": "verify",
            "config": case["config"],
            "expected_counts": counts,
        })
        print(f"{case['name']}: {counts}")
    os.makedirs(os.path.dirname(DEFAULT_FIXTURE), exist_ok=True)
    with open(DEFAULT_FIXTURE, "w", encoding="utf-8") as handle:
        json.dump({"schema": "bellmc/verify-fixture/1", "cases": cases}, handle, indent=2)
        handle.write("\n")
    print(f"wrote {DEFAULT_FIXTURE}")


if __name__ == "__main__":
    main()
