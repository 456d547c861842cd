"""Compiled kernels versus the pure-numpy path.

Captures the real subproblems of one bundle-method run, then times
``ipm_maximize`` and ``simplex_quad_min`` with and without numba on the same
inputs, and finally times a whole run in two subprocesses (one with
ASPGM_DISABLE_NUMBA=1).

    python3 benchmarks/bench_kernels.py [--d 200] [--calls 300] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from aspgm import _kernels, bspgm
from aspgm._jit import NUMBA_ENABLED, force_njit
from aspgm.problems import SpectrumSpec, gen_synthetic

RUN_SNIPPET = """
import json, time, numpy as np
from aspgm import bspgm
from aspgm._jit import NUMBA_ENABLED
from aspgm.problems import SpectrumSpec, gen_synthetic
inst = gen_synthetic("ls", {d}, SpectrumSpec("uniform", 1e4), 0)
bspgm.run(inst, inst.x0, inst.L, 7, max_calls=20)  # warm-up (compilation)
t = time.perf_counter()
res = bspgm.run(inst, inst.x0, inst.L, 7, max_calls={calls})
print(json.dumps(dict(numba=NUMBA_ENABLED, seconds=time.perf_counter() - t, f=res.sample.f)))
"""


def capture(d, calls):
    """Arguments of every ipm/ray kernel call during one run."""
    ipm_args, ray_args = [], []
    ipm, ray = _kernels.ipm_maximize, _kernels.simplex_quad_min

    def ipm_spy(*a):
        ipm_args.append(tuple(np.copy(v) if isinstance(v, np.ndarray) else v for v in a))
        return ipm(*a)

    def ray_spy(*a):
        ray_args.append(tuple(np.copy(v) if isinstance(v, np.ndarray) else v for v in a))
        return ray(*a)

    _kernels.ipm_maximize, _kernels.simplex_quad_min = ipm_spy, ray_spy
    try:
        inst = gen_synthetic("ls", d, SpectrumSpec("uniform", 1e4), 0)
        bspgm.run(inst, inst.x0, inst.L, 7, max_calls=calls)
    finally:
        _kernels.ipm_maximize, _kernels.simplex_quad_min = ipm, ray
    return ipm_args, ray_args


def objective(name, result, args):
    if name == "ipm_maximize":
        return float(args[0] @ result[0])
    d = result[0]
    return float(d @ args[0] @ d)


def time_kernel(fn, args_list, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def run_subprocess(d, calls, disable):
    env = dict(os.environ)
    if disable:
        env["ASPGM_DISABLE_NUMBA"] = "1"
    else:
        env.pop("ASPGM_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", RUN_SNIPPET.format(d=d, calls=calls)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=200)
    ap.add_argument("--calls", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    ipm_args, ray_args = capture(args.d, args.calls)
    print(f"captured {len(ipm_args)} interior point solves, {len(ray_args)} ray searches")

    ipm_jit = force_njit(_kernels.ipm_maximize_py)
    ray_jit = force_njit(_kernels.simplex_quad_min_py)
    if ipm_args:
        ipm_jit(*ipm_args[0])
    if ray_args:
        ray_jit(*ray_args[0])

    rows = [
        ("ipm_maximize", _kernels.ipm_maximize_py, ipm_jit, ipm_args),
        ("simplex_quad_min", _kernels.simplex_quad_min_py, ray_jit, ray_args),
    ]
    print(f"{'kernel':<18} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    for name, py, jit, arglist in rows:
        if not arglist:
            continue
        tp = time_kernel(py, arglist, args.repeat)
        tj = time_kernel(jit, arglist, args.repeat)
        # the two paths must reach the same objective (optima can be degenerate)
        for a in arglist[:20]:
            vp, vj = objective(name, py(*a), a), objective(name, jit(*a), a)
            assert abs(vp - vj) <= 1e-8 * (1.0 + abs(vp)), (name, vp, vj)
        print(f"{name:<18} {1e3 * tp:12.2f} {1e3 * tj:12.2f} {tp / tj:9.1f}")

    fast = run_subprocess(args.d, args.calls, disable=False)
    slow = run_subprocess(args.d, args.calls, disable=True)
    print(f"whole run, {args.calls} calls at d={args.d}: numba {fast['seconds']:.2f}s, "
          f"numpy {slow['seconds']:.2f}s (f {fast['f']:.12g} vs {slow['f']:.12g})")
    if not NUMBA_ENABLED:
        print("note: this process ran with numba disabled; kernel timings used force_njit")


if __name__ == "__main__":
    main()
