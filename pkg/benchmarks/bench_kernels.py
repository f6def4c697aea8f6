"""Benchmark the compiled kernels against the NumPy fallback.

Both implementations are imported directly (bypassing the import-time
backend choice) so a single run times them side by side on identical
inputs and checks they agree.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--repeats K]
"""

import argparse
import time

import numpy as np

from corrineq._kernels import pure
from corrineq.utils import rng_for

try:
    from corrineq._kernels import _compiled as compiled
except ImportError:
    compiled = None


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def _report(name, timings, outputs, atol):
    py_t = timings["python"]
    line = f"{name:24s} python {py_t * 1e3:9.2f} ms"
    if "compiled" in timings:
        c_t = timings["compiled"]
        dev = float(np.max(np.abs(np.asarray(outputs["python"], float)
                                  - np.asarray(outputs["compiled"], float))))
        agree = "agree" if dev <= atol else f"DISAGREE dev={dev:.2e}"
        line += (f"   compiled {c_t * 1e3:9.2f} ms"
                 f"   speedup {py_t / c_t:6.1f}x   {agree}")
    print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rng = rng_for(0, 777)
    d = 5
    m = 16
    normals = rng.standard_normal((m, d))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = rng.uniform(0.5, 1.5, m)
    semi_axes = rng.uniform(0.5, 2.0, d)
    pts = rng.standard_normal((args.points, d)) * 1.5

    backends = {"python": pure}
    if compiled is not None:
        backends["compiled"] = compiled
    else:
        print("compiled extension not importable; timing fallback only")

    cases = [
        ("polytope_contains", 0,
         lambda mod: mod.polytope_contains(normals, offsets, pts)),
        ("polytope_project", 1e-7,
         lambda mod: mod.polytope_project(normals, offsets, pts,
                                          1e-10, 500)[0]),
        ("ellipsoid_contains", 0,
         lambda mod: mod.ellipsoid_contains(semi_axes, pts)),
        ("ellipsoid_project", 1e-9,
         lambda mod: mod.ellipsoid_project(semi_axes, pts, 1e-12)),
    ]

    print(f"{args.points} points, d={d}, m={m} halfspaces, "
          f"best of {args.repeats}")
    for name, atol, call in cases:
        timings = {}
        outputs = {}
        for label, mod in backends.items():
            timings[label], outputs[label] = _time(lambda: call(mod),
                                                   args.repeats)
        _report(name, timings, outputs, atol)


if __name__ == "__main__":
    main()
