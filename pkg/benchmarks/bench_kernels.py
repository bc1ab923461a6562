#!/usr/bin/env python3
"""Time the compiled state-space kernels against the pure-NumPy fallback.

Both implementations expose the same three entry points (forward filter,
likelihood-only pass, backward sampler); this script runs them on an
identical simulated panel and reports per-call wall time plus the speedup.
The problem size defaults to the bundled study design (264 months, 13
maturities, 3 regimes) because that is what a posterior sweep spends its
time on.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --reps 50 --draws 100
"""

from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from nsregimes import bundled_design, simulate_panel
from nsregimes.statespace import _prepare


def load_kernel_modules() -> dict:
    """Import whichever kernel backends are available, compiled first."""
    modules = {}
    for name, label in (("_core", "compiled"), ("_core_py", "pure numpy")):
        try:
            modules[label] = importlib.import_module(f"nsregimes.{name}")
        except ImportError:
            pass
    return modules


def best_of(fn, reps: int) -> float:
    """Minimum wall time over ``reps`` calls, in seconds."""
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="compare state-space kernel backends on one simulated panel"
    )
    parser.add_argument("--reps", type=int, default=30, help="timing repetitions per kernel")
    parser.add_argument("--draws", type=int, default=50, help="paths per backward-sampler call")
    parser.add_argument("--seed", type=int, default=0, help="panel and noise seed")
    args = parser.parse_args(argv)

    design = bundled_design()
    sim = simulate_panel(design, seed=args.seed)
    params = design.params()
    z, y, cmat, A, H, mu, q, f0, p0 = _prepare(params, sim.labels, sim.yields.values, None, None)
    T, n_obs = y.shape
    p = A.shape[1]
    normals = np.random.default_rng(args.seed).standard_normal((args.draws, T, p))

    modules = load_kernel_modules()
    if not modules:
        print("no kernel backend importable; is the package installed?")
        return 1

    print(
        f"panel: T={T}, n_obs={n_obs}, p={p}, G={A.shape[0]}; "
        f"{args.draws} sampler draws/call, best of {args.reps} reps"
    )
    print(f"{'backend':<12} {'loglik':>12} {'filter':>12} {'sampler':>12}")

    timings = {}
    logliks = {}
    for label, mod in modules.items():
        status, pm, pc, fm, fc, gains, ll = mod.kalman_core(y, cmat, A, H, mu, q, z, f0, p0)
        if status >= 0:
            raise RuntimeError(f"{label} filter failed at period {status}")
        fm = np.ascontiguousarray(fm)
        fc = np.ascontiguousarray(fc)
        logliks[label] = float(np.sum(ll))
        timings[label] = {
            "loglik": best_of(lambda: mod.loglik_core(y, cmat, A, H, mu, q, z, f0, p0), args.reps),
            "filter": best_of(lambda: mod.kalman_core(y, cmat, A, H, mu, q, z, f0, p0), args.reps),
            "sampler": best_of(lambda: mod.ffbs_core(fm, fc, A, H, z, normals), args.reps),
        }
        row = timings[label]
        print(
            f"{label:<12} {row['loglik'] * 1e3:>10.3f}ms {row['filter'] * 1e3:>10.3f}ms "
            f"{row['sampler'] * 1e3:>10.3f}ms"
        )

    if len(modules) == 2:
        fast, slow = timings["compiled"], timings["pure numpy"]
        print(
            "speedup      "
            + " ".join(f"{slow[k] / fast[k]:>11.1f}x" for k in ("loglik", "filter", "sampler"))
        )
        gap = abs(logliks["compiled"] - logliks["pure numpy"])
        print(f"log-likelihood agreement: |diff| = {gap:.3e}")
        if gap > 1e-8:
            print("WARNING: backends disagree beyond tolerance")
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
