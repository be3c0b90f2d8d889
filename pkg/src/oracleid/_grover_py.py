"""Pure-Python statevector kernels, mirroring ``_grover.pyx``.

Same array layout and semantics as the compiled module; used when the
extension is unavailable or when ORACLEID_PURE_PYTHON=1.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def oracle_permute(amps: np.ndarray, marked: np.ndarray) -> None:
    view = amps.reshape(-1, 2)
    rows = marked.view(bool)
    view[rows] = view[rows, ::-1]


def grover_run(amps: np.ndarray, marked: np.ndarray, iterations: int) -> None:
    view = amps.reshape(-1, 2)
    rows = marked.view(bool)
    for _ in range(iterations):
        view[rows] = view[rows, ::-1]
        view[:] = 2.0 * view.mean(axis=0, keepdims=True) - view


def index_probabilities(amps: np.ndarray, out: np.ndarray) -> None:
    view = amps.reshape(-1, 2)
    np.sum(view.real**2 + view.imag**2, axis=1, out=out)
