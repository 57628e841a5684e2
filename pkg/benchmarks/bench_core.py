"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_core.py [--repeat R]
"""

import argparse
import time

import numpy as np

from lyapflow import _backend, flowsim
from lyapflow.spectral3d import build_operator_3d


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def eigen_case(kern, a):
    def run():
        b = np.ascontiguousarray(a.copy())
        kern.balance(b)
        kern.orthes(b)
        kern.hqr(b)

    return run


def product_case(kern, cfg, trials, n):
    return lambda: flowsim.log_norms(cfg, n, trials, backend=kern)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = {"python": _backend.get("python")}
    try:
        kernels["compiled"] = _backend.get("compiled")
    except ImportError:
        print("compiled kernels unavailable; timing the fallback only")
    cases = {
        "eigvals d=3 N=32 (289x289)": lambda k: eigen_case(k, build_operator_3d(1 / 3, 0.5, 32)),
        "products d=2 100 trials x 2000 steps": lambda k: product_case(k, flowsim.FlowConfig(d=2, seed=1), 100, 2000),
        "products d=3 100 trials x 1000 steps": lambda k: product_case(k, flowsim.FlowConfig(d=3, seed=1), 100, 1000),
    }
    print(f"{'case':40s} " + " ".join(f"{name:>10s}" for name in kernels) + "   speedup")
    for label, make in cases.items():
        t = {name: best_of(make(k), args.repeat) for name, k in kernels.items()}
        speed = f"{t['python'] / t['compiled']:8.1f}x" if "compiled" in t else ""
        print(f"{label:40s} " + " ".join(f"{v:9.3f}s" for v in t.values()) + f"  {speed}")


if __name__ == "__main__":
    main()
