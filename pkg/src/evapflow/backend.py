"""Kernel backend selection.

The multigrid smoother and a few other inner-loop kernels exist twice: a
Cython extension (``evapflow._kernels``) and a vectorized numpy fallback
(``evapflow._kernels_py``).  The compiled one is picked when importable.
Set ``EVAPFLOW_BACKEND=numpy`` or ``=cython`` to force a choice;
``benchmarks/kernel_bench.py`` compares the two.
"""

import os

_requested = os.environ.get("EVAPFLOW_BACKEND", "auto").lower()
if _requested not in ("auto", "cython", "numpy"):
    raise RuntimeError(f"EVAPFLOW_BACKEND must be auto|cython|numpy, got {_requested!r}")

kernels = None
if _requested in ("auto", "cython"):
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "cython":
            raise
if kernels is None:
    from . import _kernels_py as kernels

BACKEND = kernels.NAME
