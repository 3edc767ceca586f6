"""Time the compiled kernels against the numpy fallback on nested-quadrature sized inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Both backends
are loaded side by side, their outputs are compared, and the best wall time
of each is printed.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from bergman_lab import kernels
from bergman_lab.geometry import random_ball_points
from bergman_lab.holo import HoloFunc


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    centers = random_ball_points(rng, 400, 2, 0.95)
    nodes = random_ball_points(rng, 2000, 2, 0.7)
    f = (HoloFunc.kernel(np.array([0.6, 0.3j]), 3.0, s=3.0) + HoloFunc.monomial((2, 1))
         + HoloFunc.kernel(np.array([-0.2, 0.9]), 4.0, s=4.0))
    pts = random_ball_points(rng, 200000, 2, 0.99)
    zs = random_ball_points(rng, 3000, 1, 0.999)
    ws = random_ball_points(rng, 1500, 1, 0.99)
    coeffs = rng.normal(size=1500) + 1j * rng.normal(size=1500)
    zeta = np.array([1.0 + 0j])
    cands = random_ball_points(rng, 6000, 1, 0.95)
    cands = cands[np.argsort(np.abs(cands[:, 0]), kind="stable")]
    return {
        "mobius_transport 400x2000 (n=2)": ("mobius_transport", (centers, nodes)),
        "holo_eval 2e5 points with gradient": ("holo_eval", (pts,) + tuple(f._packed) + (True,)),
        "projection_sum 3000x1500": ("projection_sum", (zs, ws, coeffs, zeta, 2.0)),
        "greedy_separated 6000 candidates": ("greedy_separated", (cands, np.tanh(0.25) ** 2)),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if a is None:
        return b is None
    return np.allclose(a, b, rtol=1e-10, atol=1e-12)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    mods = {b: kernels.get_backend(b) for b in backends}
    for label, (name, inputs) in cases(np.random.default_rng(0)).items():
        times = {}
        outs = {}
        for b, mod in mods.items():
            fn = getattr(mod, name)
            outs[b] = fn(*inputs)
            times[b] = best_time(lambda: fn(*inputs), args.repeat)
        line = f"{label:<40}" + "".join(f"  {b} {t * 1e3:9.2f} ms" for b, t in times.items())
        if len(times) == 2:
            vals = list(outs.values())
            line += f"  speedup {times['numpy'] / times['cython']:6.1f}x  agree {_same(vals[0], vals[1])}"
        print(line)


if __name__ == "__main__":
    main()
