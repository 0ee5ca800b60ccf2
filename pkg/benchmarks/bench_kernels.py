"""Compare the compiled and pure-Python grid kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from contextual_qnd import kernels
from contextual_qnd.maxconf import QubitEnsemble, pauli_coefficients
from contextual_qnd.oracle import BLOCH_GRID, REGION_COARSE


def cases():
    ens = QubitEnsemble(0.42 * math.pi, 0.58, 0.65)
    num = np.ascontiguousarray(pauli_coefficients(ens.q1 * ens.rho1))
    den = np.ascontiguousarray(pauli_coefficients(ens.rho))
    return {
        "usd region": lambda k: k.linear_region_scan(
            0.5, 0.5, 0, 0.25, 0.0, 1, 1, 0.0, 1.0, 0.0, 1.0, REGION_COARSE, 0.0),
        "cloning region": lambda k: k.linear_region_scan(
            0.5, 0.5, 1, 0.0, 0.6, 1, 2, 0.0, 1.0, 0.0, 1.0, REGION_COARSE, 0.0),
        "bloch ratio": lambda k: k.bloch_ratio_scan(
            num, den, 0.0, math.pi, BLOCH_GRID[0], 0.0, 2 * math.pi, BLOCH_GRID[1]),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the Python kernels only")
    print(f"{'kernel':<16}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, call in cases().items():
        results = {name: call(mod) for name, mod in backends.items()}
        values = [r[-1] for r in results.values()]
        assert max(values) - min(values) < 1e-9, f"backends disagree on {label}"
        times = {name: min(timeit.repeat(lambda m=mod: call(m), number=1, repeat=args.repeat))
                 for name, mod in backends.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<16}" + "".join(f"{t * 1e3:>12.1f}ms" for t in times.values()) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
