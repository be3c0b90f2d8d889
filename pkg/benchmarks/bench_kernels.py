"""Benchmark the compiled statevector kernels against the pure-Python fallback.

Micro-benchmarks time the raw kernels on a grid of register sizes and
iteration counts; the end-to-end benchmark times full quantum-engine
identification runs under each backend.  Emits a small table (or CSV with
--csv) plus the measured speedups.

Usage: python benchmarks/bench_kernels.py [--csv out.csv] [--trials 200]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from oracleid import _grover_py

try:
    from oracleid import _grover

    BACKENDS = [("compiled", _grover), ("python", _grover_py)]
except ImportError:
    print("compiled extension not available; timing the fallback only")
    BACKENDS = [("python", _grover_py)]


def _fresh_state(dim: int) -> np.ndarray:
    amps = np.empty(2 * dim, dtype=np.complex128)
    c = 1.0 / math.sqrt(2 * dim)
    amps[0::2] = c
    amps[1::2] = -c
    return amps


def bench_kernel(impl, dim: int, iterations: int, repeats: int) -> float:
    marked = np.zeros(dim, dtype=np.uint8)
    marked[dim // 2] = 1
    out = np.empty(dim, dtype=np.float64)
    amps = _fresh_state(dim)
    impl.grover_run(amps, marked, iterations)  # warm-up
    start = time.perf_counter()
    for _ in range(repeats):
        amps = _fresh_state(dim)
        impl.grover_run(amps, marked, iterations)
        impl.index_probabilities(amps, out)
    return (time.perf_counter() - start) / repeats


def bench_end_to_end(backend_name: str, trials: int) -> float:
    import os
    import subprocess
    import sys

    # backend choice happens at import, so run in a subprocess
    code = (
        "import time, numpy as np\n"
        "from oracleid.bitstrings import generate_class\n"
        "from oracleid.identify import run_final\n"
        "c = generate_class('hamming1', 8)\n"
        f"trials = {trials}\n"
        "start = time.perf_counter()\n"
        "for t in range(trials):\n"
        "    run_final(c, c.members[t % 8], 'quantum', seed=(1, t))\n"
        "print((time.perf_counter() - start) / trials)\n"
    )
    env = dict(os.environ)
    env["ORACLEID_PURE_PYTHON"] = "1" if backend_name == "python" else "0"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    return float(out.stdout.strip())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", default=None)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    rows = [("benchmark", "dim", "iterations") + tuple(n for n, _ in BACKENDS)]
    for dim in (8, 32, 128):
        for iterations in (8, 64):
            times = [bench_kernel(impl, dim, iterations, args.repeats) for _, impl in BACKENDS]
            rows.append(("grover_run", dim, iterations) + tuple(f"{t * 1e6:.2f}us" for t in times))

    e2e = [bench_end_to_end(name, args.trials) for name, _ in BACKENDS]
    rows.append(("run_final/quantum N=8", "-", "-") + tuple(f"{t * 1e3:.3f}ms" for t in e2e))

    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)) for row in rows]
    body = "\n".join(lines)
    if len(BACKENDS) == 2 and e2e[0] > 0:
        body += f"\n\nend-to-end speedup (python / compiled): {e2e[1] / e2e[0]:.1f}x"
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(",".join(str(c) for c in row) for row in rows) + "\n")
        print(f"wrote {args.csv}")
    print(body)


if __name__ == "__main__":
    main()
