"""Backend selection for the statevector kernels.

Prefers the compiled extension (``oracleid._grover``) and falls back to the
pure-Python implementation.  Set ORACLEID_PURE_PYTHON=1 to force the
fallback; ``benchmarks/bench_kernels.py`` times the two side by side.
"""

from __future__ import annotations

import os

if os.environ.get("ORACLEID_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _grover_py as _impl
else:
    try:
        from . import _grover as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _grover_py as _impl

BACKEND: str = _impl.BACKEND
oracle_permute = _impl.oracle_permute
grover_run = _impl.grover_run
index_probabilities = _impl.index_probabilities

__all__ = ["BACKEND", "oracle_permute", "grover_run", "index_probabilities"]
