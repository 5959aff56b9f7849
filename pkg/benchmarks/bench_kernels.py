"""Compiled vs numpy kernels: wall time per call on representative sizes.

Run:  python3 benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]
"""
import argparse
import csv
import sys
import timeit

import numpy as np

from qlspsim import _backend, qsp
from qlspsim.problem import augment, generate_instance


def cases():
    rng = np.random.default_rng(0)
    for N in (8, 16, 32):
        sys_ = augment(generate_instance(N, 20.0, 4, seed=1), 5.0)
        B = sys_.B
        yield f"jacobi_eigh n={B.shape[0]}", lambda k, B=B: k.jacobi_eigh(B, 1e-15, 60)
        C = sys_.C
        yield f"jacobi_svd {C.shape[0]}x{C.shape[1]}", lambda k, C=C: k.jacobi_svd(C, 1e-15, 60)
    for l in (100, 1000):
        phases = rng.uniform(-np.pi, np.pi, l + 1)
        x = np.cos(np.linspace(0, np.pi, 2 * l))
        yield f"qsp_response l={l} m={len(x)}", lambda k, p=phases, x=x: k.qsp_response(p, x)
        yield f"qsp_gradient l={l} m={len(x) // 4}", lambda k, p=phases, x=x[::4]: k.qsp_gradient(p, x)


def phase_solve_case(k):
    def run(_kernels):
        qsp._cached_phases.cache_clear()
        qsp.solve_phases(qsp.make_filter(k, 0.02))
    return f"solve_phases k={k} (end to end)", run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    if _backend.compiled_kernels is None:
        print("compiled kernels are not built; only the numpy fallback is available", file=sys.stderr)
        return 1
    rows = []
    all_cases = list(cases()) + [phase_solve_case(100), phase_solve_case(400)]
    print(f"{'case':36s} {'numpy [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in all_cases:
        t = {}
        for backend in ("python", "cython"):
            _backend.use(backend)
            kern = _backend.kernels
            fn(kern)  # warm up
            t[backend] = min(timeit.repeat(lambda fn=fn, kern=kern: fn(kern), number=1, repeat=args.repeat)) * 1e3
        speed = t["python"] / t["cython"]
        rows.append({"case": name, "python_ms": t["python"], "cython_ms": t["cython"], "speedup": speed})
        print(f"{name:36s} {t['python']:12.3f} {t['cython']:14.3f} {speed:8.1f}x")
    _backend.use("cython")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
