"""Timing comparison of the compiled kernels against the pure-Python path.

Runs the same workloads twice in subprocesses, once with DRIVEBENCH_NUMBA=1
and once with =0, because the backend is chosen at import time.

    python3 benchmarks/bench_kernels.py            # both backends
    python3 benchmarks/bench_kernels.py --inner    # used internally
"""

import argparse
import os
import subprocess
import sys
import time


def _inner():
    import numpy as np

    from drivebench import kernels as K
    from drivebench.dynamics import BicycleParams

    K.prewarm()
    params = BicycleParams().as_array()
    path = np.column_stack((np.linspace(0.0, 400.0, 401),
                            10.0 * np.sin(np.linspace(0.0, 8.0, 401))))
    cum = np.concatenate(([0.0], np.cumsum(
        np.linalg.norm(np.diff(path, axis=0), axis=1))))

    results = []

    t0 = time.perf_counter()
    n = 20000
    for i in range(n):
        K.bicycle_step_scalar(0.0, 0.0, 0.1, 8.0, 0.2, 0.5, 0.0,
                              params[0], params[1], params[2], params[3],
                              params[4], params[5], 0.05)
    results.append(("bicycle_step", n, time.perf_counter() - t0))

    t0 = time.perf_counter()
    n = 2000
    for i in range(n):
        K.drive_path_unroll(0.0, 0.0, 0.0, 8.0, path, 0, 40, 0.05,
                            8.0, params, 3.5,
                            1.0, 0.0, 0.1, 10.0,
                            1.0, 0.05, 0.0, 10.0,
                            0.3, 0.05,
                            0.0, 0.0, 0.0, 0.0, 0.0)
    results.append(("drive_path_unroll", n, time.perf_counter() - t0))

    t0 = time.perf_counter()
    n = 5000
    state = np.array([[30.0, 5.0, -1.5, 6.0]])
    cmd = np.array([[0.0, 0.0, 0.0]])
    geom = np.array([[4.5, 2.0]])
    veh = np.tile(params, (1, 1))
    for i in range(n):
        K.forecast_first_collision(0.0, 0.0, 0.0, 8.0, path, 0, 4.5, 2.0,
                                   params, 1.0, 3.5, state, cmd, geom, veh,
                                   40, 0.05)
    results.append(("forecast_first_collision", n, time.perf_counter() - t0))

    t0 = time.perf_counter()
    n = 50000
    for i in range(n):
        K.obb_overlap(0.0, 0.0, 0.3, 4.5, 2.0, 3.0, 1.0, -0.2, 4.5, 2.0)
    results.append(("obb_overlap", n, time.perf_counter() - t0))

    t0 = time.perf_counter()
    n = 5000
    for i in range(n):
        K.nearest_on_polyline(path, cum, 200.0, 3.0, 0, 400)
    results.append(("nearest_on_polyline", n, time.perf_counter() - t0))

    backend = "numba" if K.USE_NUMBA else "python"
    for name, count, dt in results:
        print(f"{backend:8s} {name:26s} {count:7d} calls  "
              f"{dt:8.3f} s  {dt / count * 1e6:9.2f} us/call")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true")
    args = ap.parse_args()
    if args.inner:
        _inner()
        return
    here = os.path.abspath(__file__)
    for flag in ("1", "0"):
        env = dict(os.environ, DRIVEBENCH_NUMBA=flag)
        subprocess.run([sys.executable, here, "--inner"], env=env, check=True)


if __name__ == "__main__":
    main()
