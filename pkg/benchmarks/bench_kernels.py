"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from wpqc import _kernels_py

try:
    from wpqc import _kernels as _cy
except ImportError:
    _cy = None


def cases(rng):
    n = 20
    keys = _kernels_py.weight_states(n, 6)
    cols = np.zeros(len(keys), dtype=np.int64)
    amps = rng.normal(size=len(keys)) + 0j
    shifts = np.array([3, 7], dtype=np.int64)
    mat = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    return {
        "weight_states(20, 6)": lambda m: m.weight_states(n, 6),
        "rank_states(C(20,6))": lambda m: m.rank_states(keys, n),
        "expand_local 2-wire": lambda m: m.expand_local(keys, cols, amps, shifts, 0, 0, mat),
        "expand_local controlled": lambda m: m.expand_local(keys, cols, amps, shifts, 1 << 12, 1 << 12, mat),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _cy is None:
            print(f"{name:28s} {t_py:10.2f} {'n/a':>10s} {'n/a':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(_cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:28s} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
