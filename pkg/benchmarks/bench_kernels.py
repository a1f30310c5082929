"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from gdops import _backend


def cases(rng):
    a8 = rng.standard_normal((8, 8))
    a8 = a8 + a8.T
    a16 = rng.standard_normal((16, 16))
    a16 = a16 + a16.T
    lam6 = rng.standard_normal(6)
    lam4 = rng.random(4)
    return {
        "jacobi 8x8": lambda k: k.jacobi_eigh(a8, 1e-12 * np.linalg.norm(a8), 100, False),
        "jacobi 16x16": lambda k: k.jacobi_eigh(a16, 1e-12 * np.linalg.norm(a16), 100, False),
        "elementary n=6": lambda k: k.elementary_all(lam6),
        "pfold n=6 p=3": lambda k: k.pfold_product(lam6, 3),
        "signed sums n=4": lambda k: k.signed_sum_product(4.0, lam4),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=200)
    args = parser.parse_args()
    if "cython" not in _backend.BACKENDS:
        print("compiled extension not built; only the fallback is available")
    names = sorted(_backend.BACKENDS)
    print(f"{'kernel':<18}" + "".join(f"{n + ' (us)':>16}" for n in names) + f"{'speed-up':>12}")
    for label, fn in cases(np.random.default_rng(0)).items():
        per_call = {}
        for name in names:
            impl = _backend.BACKENDS[name]
            t = min(timeit.repeat(lambda: fn(impl), number=args.number, repeat=args.repeat))
            per_call[name] = 1e6 * t / args.number
        row = f"{label:<18}" + "".join(f"{per_call[n]:>16.2f}" for n in names)
        if len(names) == 2:
            row += f"{per_call['python'] / per_call['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
