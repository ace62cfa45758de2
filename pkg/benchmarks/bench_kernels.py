"""Compare the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import math
import timeit

from gnf import _kernels_py as py
from gnf.kernels import compiled_backend as cy

GOLDEN = -(math.sqrt(5) - 1) / 2

CASES = [
    ("divisor_minima_int n=2 |Q|<=512", "divisor_minima_int", ([1, -3], 512)),
    ("divisor_minima_int n=3 |Q|<=96", "divisor_minima_int", ([2, -3, 5], 96)),
    ("divisor_minima_float n=2 |Q|<=512", "divisor_minima_float", ([1.0, GOLDEN], 512)),
    ("log_eta_dp kmax=60", "log_eta_dp", ([0.0] * 60, 1.0, 60)),
    ("log_sigma_dp kmax=60", "log_sigma_dp", (math.log(0.1), math.log(math.sqrt(2)), 60)),
]


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if cy is None:
        print("compiled kernels not available; rebuild with `pip install -e . --no-build-isolation`")
    print(f"{'case':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for label, name, call_args in CASES:
        t_py = min(timeit.repeat(lambda: getattr(py, name)(*call_args), number=1,
                                 repeat=args.repeat))
        if cy is not None:
            ref, got = getattr(py, name)(*call_args), getattr(cy, name)(*call_args)
            assert all(abs(a - b) <= 1e-9 * (1 + abs(a)) for a, b in zip(ref, got)), label
            t_cy = min(timeit.repeat(lambda: getattr(cy, name)(*call_args), number=1,
                                     repeat=args.repeat))
            print(f"{label:40s} {t_py:12.4f} {t_cy:12.4f} {t_py / t_cy:8.1f}x")
        else:
            print(f"{label:40s} {t_py:12.4f} {'-':>12s} {'-':>9s}")


if __name__ == "__main__":
    main()
