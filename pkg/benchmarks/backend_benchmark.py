"""Throughput comparison of the compiled counting kernel vs the numpy fallback.

Two numbers per model: full-run throughput (sampling + counting, what users
see) and kernel-only throughput (the stage the backends actually implement
differently).  Counts are asserted identical across backends while timing.

Usage: python3 benchmarks/backend_benchmark.py [events]
"""

import sys
import time

import numpy as np

from bellmc import ArmGeometry, Lattice, RunConfig, SourceDistribution, build_model
from bellmc import kernels
from bellmc.engine import run_coincidence
from bellmc.hidden import sample_block
from bellmc.rng import event_uniforms, stream_key

MODELS = [
    ("malus-probabilistic", {}),
    ("malus-deterministic", {}),
    ("impact-modulated", {"epsilon": 0.5, "radial_profile": "gaussian", "scale": 0.4}),
    ("scalar-particle", {"radial_profile": "gaussian", "scale": 0.3, "amplitude": 0.9}),
]


def full_run_rate(kind, params, n, backend):
    kernels.set_backend(backend)
    config = RunConfig(
        distribution=SourceDistribution(),
        arms=ArmGeometry(),
        lattice=Lattice(),
        model_1=build_model(kind, params),
        model_2=build_model(kind, params),
        alpha=0.2,
        beta=1.1,
        n_events=n,
        seed=1,
        label="bench",
    )
    start = time.perf_counter()
    result = run_coincidence(config)
    elapsed = time.perf_counter() - start
    return n / elapsed / 1e6, result.counts()


def kernel_rate(kind, params, n, backend):
    spec = build_model(kind, params).kernel_spec()
    u = event_uniforms(stream_key(1, "bench-kernel"), 0, n)
    block = sample_block(SourceDistribution(), u)
    args = (
        block.lam, block.pos_x, block.pos_y,
        block.dir_x, block.dir_y, block.dir_z,
        np.ascontiguousarray(u[:, 5]), np.ascontiguousarray(u[:, 6]),
        1000.0, 1000.0, 1.0, 0.0, 0.0, 0.2, 1.1, spec, spec,
    )
    kernels.set_backend(backend)
    kernels.pair_counts(*args)  # warm up
    start = time.perf_counter()
    counts = kernels.pair_counts(*args)
    elapsed = time.perf_counter() - start
    return n / elapsed / 1e6, counts


def main():
    n = int(float(sys.argv[1])) if len(sys.argv) > 1 else 1_000_000
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; benchmarking the numpy backend alone")
    original = kernels.backend_name()
    print(f"events per measurement: {n}")
    print(f"{'model':24s} {'stage':8s} " + "".join(f"{b:>12s}" for b in backends) + "   speedup")
    try:
        for kind, params in MODELS:
            for stage, fn in (("full", full_run_rate), ("kernel", kernel_rate)):
                rates = {}
                counts = {}
                for backend in backends:
                    rates[backend], counts[backend] = fn(kind, params, n, backend)
                values = [counts[b] for b in backends]
                assert all(v == values[0] for v in values), f"count mismatch: {counts}"
                cells = "".join(f"{rates[b]:10.1f} M" for b in backends)
                if "compiled" in rates and "numpy" in rates:
                    ratio = f"{rates['compiled'] / rates['numpy']:9.2f}x"
                else:
                    ratio = "        -"
                print(f"{kind:24s} {stage:8s} {cells} {ratio}")
    finally:
        kernels.set_backend(original)


if __name__ == "__main__":
    main()
