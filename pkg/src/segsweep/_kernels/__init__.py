"""Hot pixel kernels with a compiled core and a numpy fallback.

The compiled extension (built from ``_core.pyx``) is preferred when it
imported cleanly; otherwise the numpy backend takes over. Set
``SEGSWEEP_PURE_PYTHON=1`` to force the fallback, e.g. for benchmarking.
Both backends are bit-identical; see benchmarks/bench_kernels.py for the
speed comparison.
"""

from __future__ import annotations

import os

from segsweep._kernels import numpy_backend

try:
    from segsweep._kernels import _core as compiled_backend  # type: ignore[attr-defined]
except ImportError:
    compiled_backend = None

if compiled_backend is not None and os.environ.get("SEGSWEEP_PURE_PYTHON", "") in ("", "0"):
    _active = compiled_backend
    BACKEND = "cython"
else:
    _active = numpy_backend
    BACKEND = "numpy"

confusion_counts = _active.confusion_counts
count_le = _active.count_le
erode = _active.erode
dilate = _active.dilate

__all__ = [
    "BACKEND",
    "compiled_backend",
    "numpy_backend",
    "confusion_counts",
    "count_le",
    "erode",
    "dilate",
]
