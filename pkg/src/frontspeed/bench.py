"""Throughput benchmark: compiled kernel vs numpy fallback, naive vs pruned.

Reports steps/second and keyed draws examined per step after a short warm-up
into the stationary regime, where pruning's draw fraction settles.
"""

from __future__ import annotations

import time

from . import kernels, noise, particles


def _time_stepper(impl, d, n, steps, pruned, seed, threads):
    state = particles.initial_state(n, "zero", seed)
    for _ in range(30):
        state, _ = particles._do_step(state, d, seed, pruned, impl, threads)
    draws = 0
    t0 = time.perf_counter()
    for _ in range(steps):
        state, pairs = particles._do_step(state, d, seed, pruned, impl, threads)
        draws += pairs
    dt = time.perf_counter() - t0
    return {
        "steps_per_s": steps / dt if dt > 0 else float("inf"),
        "seconds_per_step": dt / steps,
        "draws_per_step": draws / steps,
        "draw_fraction": draws / steps / (n * n),
    }


def run_benchmark(n_list=(256, 1024), dist="uniform01", seed=1, steps=50,
                  threads=1) -> dict:
    d = noise.parse_spec(dist)
    seed_eff = particles.run_seed(seed, 0)
    impls = kernels.implementations()
    report: dict = {"dist": dist, "steps": steps, "threads": threads,
                    "active_backend": kernels.BACKEND, "results": {}}
    for n in n_list:
        per_n = {}
        for name, impl in impls.items():
            if name == "python" and n > 1024:
                continue  # fallback at large N is minutes per step
            for stepper in ("naive", "pruned"):
                key = f"{name}/{stepper}"
                per_n[key] = _time_stepper(
                    impl, d, n, steps, stepper == "pruned", seed_eff, threads)
        report["results"][str(n)] = per_n
    return report
