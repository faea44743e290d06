"""Time each hot kernel under the numba and numpy backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. The first numba
call per kernel is a warm-up (compilation or cache load) and is reported
separately from the steady-state timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gnp_lab import _kernels as K
from gnp_lab import varopt


def _cases(rng: np.random.Generator) -> dict:
    th = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    a = np.column_stack([np.cos(th), np.sin(th)])
    b = 1.01 * a[::2] + rng.normal(scale=1e-3, size=(2000, 2))
    poly = np.column_stack([np.cos(th[::10]), np.sin(th[::10])])
    pts = rng.uniform(-1.2, 1.2, size=(200_000, 2))
    xs = a[:512]
    ys = rng.uniform(-0.5, 0.5, size=(2048, 2))
    box = varopt.canonical_box(101)
    levels = np.linspace(0, 2, 201) ** 2
    c = a[::4]
    phi = 1.3 * c
    return {
        "directed_hausdorff": lambda: K.directed_hausdorff(a, b),
        "cone_margins": lambda: K.cone_margins(xs, ys, poly[:64], 0.0),
        "points_in_polygon": lambda: K.points_in_polygon(pts, poly),
        "dp_solve": lambda: K.dp_solve(levels, box.dx, box.lo, box.hi, 1.0, 0, 0),
        "pair_ratio_bounds": lambda: K.pair_ratio_bounds(c, phi),
    }


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = _cases(np.random.default_rng(0))
    backends = ["numpy"] + (["numba"] if K.HAVE_NUMBA else [])
    print(f"{'kernel':22s} {'numpy s':>10s} {'numba warm':>11s} {'numba s':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        row = {}
        for be in backends:
            K.set_backend(be)
            warm = None
            if be == "numba":
                t = time.perf_counter()
                fn()
                warm = time.perf_counter() - t
            row[be] = (_time(fn, args.repeat), warm)
        np_t = row["numpy"][0]
        nb_t, warm = row.get("numba", (float("nan"), float("nan")))
        print(f"{name:22s} {np_t:10.4f} {warm:11.4f} {nb_t:10.4f} {np_t / nb_t:8.1f}x")


if __name__ == "__main__":
    main()
