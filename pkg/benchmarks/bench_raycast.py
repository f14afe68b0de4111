"""Benchmark the compiled ray-cast kernel against the pure-Python fallback.

Kernel mode times raw scan batches through both backends on the default
pen. --full additionally times a complete simulated run per backend in a
subprocess (backend forced via DCASIM_BACKEND).

Usage:
    python benchmarks/bench_raycast.py [--rays 181] [--batches 2000] [--full]
"""

import argparse
import math
import os
import subprocess
import sys
import time

import numpy as np


def kernel_bench(rays: int, batches: int) -> None:
    from dcasim._kernels import _raycast_py
    from dcasim.world import StaticGeometry, default_pen

    try:
        from dcasim._kernels import _raycast as compiled
    except ImportError:
        compiled = None

    pen = default_pen()
    geom = StaticGeometry(pen)
    rng = np.random.default_rng(7)
    origins = rng.uniform((300, 300), (pen.width - 300, pen.height - 300),
                          size=(batches, 2))
    angles = np.linspace(-math.pi / 2, math.pi / 2, rays)
    args_tail = (pen.width, pen.height, pen.wall_height, geom.obs_x,
                 geom.obs_y, geom.obs_r, geom.obs_h, math.inf)

    def run(cast):
        t0 = time.perf_counter()
        acc = 0.0
        for ox, oy in origins:
            dist, _ = cast(ox, oy, angles, 330.0, *args_tail)
            acc += dist[0]
        return time.perf_counter() - t0, acc

    results = {}
    py_t, py_acc = run(_raycast_py.cast_rays)
    results["python"] = py_t
    print(f"python   backend: {batches} x {rays} rays in {py_t:8.3f} s "
          f"({batches * rays / py_t / 1e6:6.2f} Mray/s)")
    if compiled is not None:
        c_t, c_acc = run(compiled.cast_rays)
        results["compiled"] = c_t
        print(f"compiled backend: {batches} x {rays} rays in {c_t:8.3f} s "
              f"({batches * rays / c_t / 1e6:6.2f} Mray/s)")
        assert c_acc == py_acc, "backends disagree"
        print(f"speedup: {py_t / c_t:.1f}x (results bit-identical)")
    else:
        print("compiled backend not built; kernel comparison skipped")


def full_run_bench() -> None:
    code = ("import time; t0=time.perf_counter(); "
            "from dcasim.experiment import ExperimentConfig, run_single; "
            "import dcasim; "
            "run_single(ExperimentConfig(out_dir='{out}'), 30.0, 0); "
            "print(dcasim.KERNEL_BACKEND, time.perf_counter()-t0)")
    for backend in ("python", "compiled"):
        env = dict(os.environ, DCASIM_BACKEND=backend)
        out = f"/tmp/dcasim_bench_{backend}"
        proc = subprocess.run(
            [sys.executable, "-c", code.format(out=out)],
            env=env, capture_output=True, text=True)
        if proc.returncode:
            print(f"{backend}: failed ({proc.stderr.strip().splitlines()[-1]})")
            continue
        name, elapsed = proc.stdout.split()[-2:]
        print(f"full 600 s run, {name} backend: {float(elapsed):.2f} s")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rays", type=int, default=181)
    parser.add_argument("--batches", type=int, default=2000)
    parser.add_argument("--full", action="store_true",
                        help="also time one complete simulated run per backend")
    args = parser.parse_args()
    kernel_bench(args.rays, args.batches)
    if args.full:
        full_run_bench()


if __name__ == "__main__":
    main()
