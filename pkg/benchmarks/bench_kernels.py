"""Compare the compiled kernels against the numpy fallback.

Micro-benchmarks time each kernel on random bit-packed rows in-process.
End-to-end runs start a fresh interpreter per backend (the backend is fixed
at import) and time d=3 enumeration and a d=5 single-branch injection.

    python3 benchmarks/bench_kernels.py [--qubits 64 --rows 256 --repeat 5]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from extstab.kernels import available_backends

E2E = """
import time
from extstab.protocols import build_surface_injection
from extstab.runner import run_extended
from extstab import kernels
t0 = time.perf_counter()
c, _ = build_surface_injection(3)
run_extended(c, mode="enumerate")
t1 = time.perf_counter()
c, _ = build_surface_injection(5)
run_extended(c, mode="postselect")
t2 = time.perf_counter()
print(kernels.BACKEND, t1 - t0, t2 - t1)
"""


def random_rows(rng, m, n):
    w = (n + 63) // 64
    a = rng.integers(0, 2**63, (m, w), dtype=np.uint64)
    if n & 63:
        a[:, -1] &= np.uint64((1 << (n & 63)) - 1)
    return a


def micro(impl, n, m, repeat, rng):
    ax, az = random_rows(rng, m, n), random_rows(rng, m, n)
    bx, bz = ax[0].copy(), az[1].copy()
    sel = rng.integers(0, 2, m).astype(bool)
    cases = {
        "omega_rows": lambda: impl.omega_rows(ax, az, bx, bz),
        "mul_phase": lambda: impl.mul_phase(ax[2], az[2], bx, bz),
        "right_mul_rows": lambda: impl.right_mul_rows(ax.copy(), az.copy(), sel, bx, bz),
        "row_product": lambda: impl.row_product(ax, az, sel),
        "apply_gate CNOT": lambda: impl.apply_gate(ax, az, impl.GATE_CODES["CNOT"], 0, n - 1),
        "apply_gate H": lambda: impl.apply_gate(ax, az, impl.GATE_CODES["H"], n // 2),
    }
    out = {}
    for name, fn in cases.items():
        number = 200
        out[name] = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
    return out


def end_to_end(backend):
    env = {**os.environ, "EXTSTAB_KERNELS": backend}
    proc = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
    name, d3, d5 = proc.stdout.split()
    return float(d3), float(d5)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=64)
    ap.add_argument("--rows", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-e2e", action="store_true", help="skip the end-to-end runs")
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    results = {name: micro(impl, args.qubits, args.rows, args.repeat, rng) for name, impl in backends.items()}

    names = list(backends)
    print(f"kernel timings, {args.rows} rows x {args.qubits} qubits (microseconds per call)")
    print(f"  {'kernel':<18}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for kernel in results["python"]:
        row = f"  {kernel:<18}" + "".join(f"{results[n][kernel] * 1e6:>12.2f}" for n in names)
        if "cython" in results:
            row += f"{results['python'][kernel] / results['cython'][kernel]:>11.1f}x"
        print(row)

    if args.no_e2e:
        return
    print("end to end (seconds)")
    print(f"  {'backend':<10}{'d=3 enumerate':>16}{'d=5 branch':>14}")
    for name in names:
        d3, d5 = end_to_end(name)
        print(f"  {name:<10}{d3:>16.3f}{d5:>14.3f}")


if __name__ == "__main__":
    main()
