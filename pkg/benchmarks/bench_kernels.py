"""Timing comparison between the compiled kernels and the pure-Python path.

The kernel path is chosen at import time, so the other path is measured in a
subprocess running with KINESPHERE_NO_NUMBA=1.  Calling a compiled kernel's
py_func in the same process would still hit compiled inner kernels and
understate the gap.

    python benchmarks/bench_kernels.py
"""
import argparse
import importlib.resources
import json
import os
import subprocess
import sys
import time

import numpy as np

from kinesphere import _kernels
from kinesphere.eurdf import parse_eurdf
from kinesphere.kinematics import (
    InstallConfig,
    _ChainProblem,
    _start_matrix,
    _tree_arrays,
    auto_install,
)
from kinesphere.vsam import build_vsam, direction_vector, laban26, parse_direction


def _load(name):
    root = importlib.resources.files("kinesphere") / "fixtures"
    return parse_eurdf((root / f"{name}.eurdf").read_text())


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_workloads(platform, fk_calls, repeats):
    """Time each kernel on whichever path this process imported.
    Returns {label: (calls, best_seconds)} in insertion order."""
    results = {}

    arrays = _tree_arrays(platform)
    m = platform.joint_space.m
    rng = np.random.default_rng(0)
    poses = rng.uniform(-1.0, 1.0, size=(fk_calls, m))
    n_links = arrays.order_joint.shape[0]
    out_r = np.empty((n_links, 3, 3))
    out_t = np.empty((n_links, 3))

    def run_fk():
        for q in poses:
            _kernels.fk_tree(arrays.order_joint, arrays.order_parent,
                             arrays.j_r, arrays.j_t, arrays.j_axis,
                             arrays.j_type, arrays.j_qidx, q, out_r, out_t)

    run_fk()  # compile outside the timed region
    results[f"fk_tree ({n_links} links)"] = (fk_calls, _time(run_fk, repeats))

    problem = _ChainProblem(platform, "limb_11")
    config = InstallConfig()
    direction = parse_direction("left-high")
    starts = _start_matrix(problem, config, direction)
    dvec = direction_vector(direction)
    ascend_args = (problem.pre_r, problem.pre_t, problem.j_r, problem.j_t,
                   problem.j_axis, problem.j_type, problem.qmin, problem.qinc,
                   problem.qn, starts, config.orthogonal_penalty, dvec,
                   problem.neutral_ep, config.iterations)
    best_idx, _, _ = _kernels.ascend(*ascend_args)
    label = (f"ascend ({len(problem.qn)} joints, "
             f"{starts.shape[0]} restarts)")
    results[label] = (1, _time(lambda: _kernels.ascend(*ascend_args), repeats))

    ladder_args = (problem.pre_r, problem.pre_t, problem.j_r, problem.j_t,
                   problem.j_axis, problem.j_type, problem.qmin, problem.qinc,
                   problem.neutral_idx, best_idx, config.orthogonal_penalty,
                   dvec, problem.neutral_ep)
    _kernels.ladder_walk(*ladder_args)
    results["ladder_walk"] = (
        1, _time(lambda: _kernels.ladder_walk(*ladder_args), repeats)
    )
    return results


def _pure_results(argv):
    env = dict(os.environ, KINESPHERE_NO_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--json", *argv],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--platform", default="baxter",
                        help="bundled platform name (default: baxter)")
    parser.add_argument("--fk-calls", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=2)
    parser.add_argument("--skip-install", action="store_true",
                        help="skip the end-to-end auto_install timing")
    parser.add_argument("--json", action="store_true",
                        help="emit raw timings as JSON (used internally)")
    args = parser.parse_args(argv)

    platform = _load(args.platform)
    mine = run_workloads(platform, args.fk_calls, args.repeats)
    if args.json:
        print(json.dumps(mine))
        return

    print(f"platform: {platform.name}, {platform.joint_space.m} joints")
    if _kernels.JIT_ENABLED:
        passthrough = ["--platform", args.platform,
                       "--fk-calls", str(args.fk_calls),
                       "--repeats", str(args.repeats)]
        print("timing the pure path in a subprocess, this takes a while...")
        pure = _pure_results(passthrough)
        header = (f"{'workload':<30} {'compiled':>14} {'pure':>14}"
                  f" {'speedup':>9}")
        print("\n" + header)
        print("-" * len(header))
        for label, (calls, compiled_s) in mine.items():
            _, pure_s = pure[label]
            print(f"{label:<30} {compiled_s / calls * 1e6:>11.1f} us"
                  f" {pure_s / calls * 1e6:>11.1f} us"
                  f" {pure_s / compiled_s:>8.1f}x")
    else:
        header = f"{'workload':<30} {'pure':>14}"
        print("\ncompilation disabled; pure path only\n" + header)
        print("-" * len(header))
        for label, (calls, seconds) in mine.items():
            print(f"{label:<30} {seconds / calls * 1e6:>11.1f} us")

    if not args.skip_install:
        spec = build_vsam(sorted(platform.labels.distals), laban26(), 3,
                          platform=platform)
        t0 = time.perf_counter()
        auto_install(platform, spec, InstallConfig())
        dt = time.perf_counter() - t0
        path = "compiled" if _kernels.JIT_ENABLED else "pure python"
        print(f"\nauto_install on the active path ({path}): {dt:.2f} s")


if __name__ == "__main__":
    main()
