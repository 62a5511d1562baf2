#!/usr/bin/env python3
"""Time the two dual-solver engines on synthetic training problems.

The compiled extension and the NumPy fallback walk the identical update
sequence, so the interesting numbers are wall time and pair updates per
second at growing problem sizes.  Run from an installed tree:

    python benchmarks/bench_smo.py
    python benchmarks/bench_smo.py --sizes 500,2000,8000 --repeats 3
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from farsvm.svm_core import KernelConfig, TrainConfig, train_arrays


def synthetic_problem(rng: np.random.Generator, m: int):
    """Two overlapping Gaussian clouds; roughly balanced labels."""
    n_pos = m // 2
    y = np.concatenate([np.ones(n_pos), -np.ones(m - n_pos)])
    X = rng.normal(0.0, 1.0, (m, 3)) + np.outer(y, [0.6, 0.6, 0.6])
    return X, y


def time_engine(engine, X, y, kernel, config, repeats: int):
    best = float("inf")
    model = None
    for _ in range(repeats):
        started = time.perf_counter()
        model = train_arrays(X, y, kernel, config, engine=engine)
        best = min(best, time.perf_counter() - started)
    return best, model


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,2000,8000",
                        help="comma-separated training-set sizes")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats per engine (best is kept)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--kkt-tol", type=float, default=1e-3)
    args = parser.parse_args()

    try:
        from farsvm import _smo as compiled
    except ImportError:
        compiled = None
        print("compiled engine not built; timing the fallback only\n")
    from farsvm import _smo_fallback as fallback

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    kernel = KernelConfig(delta=1.0)
    rng = np.random.default_rng(args.seed)

    header = (f"{'M':>7} {'updates':>9} {'fallback s':>11} "
              f"{'compiled s':>11} {'fb upd/s':>10} {'cc upd/s':>10} "
              f"{'speedup':>8}")
    print(header)
    print("-" * len(header))
    for m in sizes:
        X, y = synthetic_problem(rng, m)
        config = TrainConfig(beta0=1.0, beta1=1.0, kkt_tol=args.kkt_tol)
        fb_time, fb_model = time_engine(
            fallback, X, y, kernel, config, args.repeats
        )
        updates = fb_model.training_meta.n_updates
        if compiled is not None:
            cc_time, cc_model = time_engine(
                compiled, X, y, kernel, config, args.repeats
            )
            if cc_model.training_meta.n_updates != updates:
                print(f"warning: engines disagree on update count at M={m}")
            print(f"{m:>7} {updates:>9} {fb_time:>11.3f} {cc_time:>11.3f} "
                  f"{updates / fb_time:>10.0f} {updates / cc_time:>10.0f} "
                  f"{fb_time / cc_time:>7.1f}x")
        else:
            print(f"{m:>7} {updates:>9} {fb_time:>11.3f} {'-':>11} "
                  f"{updates / fb_time:>10.0f} {'-':>10} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
