"""Benchmark the compiled kernels against the pure-Python fallback.

Runs itself twice in subprocesses (with and without VOLKIT_NO_NUMBA) and
prints a comparison table.  Invoke from the repository root:

    python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time


def run_suite():
    from volkit._accel import NUMBA_ENABLED
    from volkit.estimation import fit
    from volkit.garch import GarchParams, GarchSpec, filter_volatility, simulate
    from volkit.gof import khmaladze_transform, pseudo_observations
    from volkit.numerics import rng_stream
    from volkit.distributions import Ged

    spec = GarchSpec()
    params = GarchParams(omega=0.1, alpha=(0.1,), beta=(0.8,), sigma1_sq=1.0)
    sim = simulate(spec, params, 2000, rng_stream(0, 0))
    u = pseudo_observations(rng_stream(1, 0).uniform(size=2000))
    ged = Ged(1.3)
    x_cdf = rng_stream(2, 0).standard_normal(5000)

    def timeit(fn, reps):
        fn()  # warm-up (includes JIT compilation on the compiled path)
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        return (time.perf_counter() - t0) / reps

    results = {
        "numba": NUMBA_ENABLED,
        "garch_filter_n2000": timeit(
            lambda: filter_volatility(spec, params, sim.returns), 200),
        "khmaladze_transform_n2000": timeit(
            lambda: khmaladze_transform(u), 5 if not NUMBA_ENABLED else 50),
        "ged_cdf_n5000": timeit(lambda: ged.cdf(x_cdf), 10),
        "mle_fit_n2000": timeit(lambda: fit(spec, sim.returns), 1),
    }
    return results


def main():
    if os.environ.get("_VOLKIT_BENCH_CHILD"):
        print(json.dumps(run_suite()))
        return
    rows = {}
    for label, extra in (("numba", {}), ("fallback", {"VOLKIT_NO_NUMBA": "1"})):
        env = dict(os.environ, _VOLKIT_BENCH_CHILD="1", **extra)
        env.pop("VOLKIT_NO_NUMBA", None) if label == "numba" else None
        out = subprocess.run([sys.executable, os.path.abspath(__file__)],
                             capture_output=True, text=True, env=env)
        if out.returncode != 0:
            sys.stderr.write(out.stderr)
            raise SystemExit(1)
        rows[label] = json.loads(out.stdout.strip().splitlines()[-1])
    names = [k for k in rows["numba"] if k != "numba"]
    width = max(len(n) for n in names)
    print(f"{'kernel':<{width}}  {'numba':>12}  {'fallback':>12}  {'speedup':>8}")
    for name in names:
        fast = rows["numba"][name]
        slow = rows["fallback"][name]
        print(f"{name:<{width}}  {fast * 1e3:>10.3f}ms  {slow * 1e3:>10.3f}ms  "
              f"{slow / fast:>7.1f}x")


if __name__ == "__main__":
    main()
