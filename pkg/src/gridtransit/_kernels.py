"""Backend selection for the OD aggregation kernel.

The compiled Cython kernel is used when the extension built; otherwise the
vectorized NumPy fallback takes over. ``GRIDTRANSIT_FORCE_BACKEND`` can pin
either one explicitly (value ``compiled`` or ``numpy``), which the test
suite and the benchmark script use to exercise both paths.
"""

from __future__ import annotations

import os

import numpy as np

from . import _agg_numpy

_FORCE = os.environ.get("GRIDTRANSIT_FORCE_BACKEND", "").strip().lower()

try:
    from . import _agg_cy
except ImportError:
    _agg_cy = None

if _FORCE == "numpy":
    _impl = _agg_numpy
    BACKEND = "numpy"
elif _FORCE == "compiled":
    if _agg_cy is None:
        raise ImportError(
            "GRIDTRANSIT_FORCE_BACKEND=compiled but the compiled kernel is "
            "not available; build it with `pip install -e . --no-build-isolation`"
        )
    _impl = _agg_cy
    BACKEND = "compiled"
elif _agg_cy is not None:
    _impl = _agg_cy
    BACKEND = "compiled"
else:
    _impl = _agg_numpy
    BACKEND = "numpy"


def available_backends() -> dict:
    """Name -> kernel function, for everything importable in this process."""
    backends = {"numpy": _agg_numpy.accumulate_od}
    if _agg_cy is not None:
        backends["compiled"] = _agg_cy.accumulate_od
    return backends


def accumulate_od(density: np.ndarray, delta: float, backend: str | None = None):
    """Run the selected (or named) aggregation backend on a C-contiguous copy."""
    arr = np.ascontiguousarray(density, dtype=np.float64)
    if arr.ndim != 4 or len(set(arr.shape)) != 1:
        raise ValueError(f"density must be n x n x n x n, got shape {arr.shape}")
    if backend is None:
        fn = _impl.accumulate_od
    else:
        try:
            fn = available_backends()[backend]
        except KeyError:
            raise ValueError(f"unknown aggregation backend {backend!r}") from None
    return fn(arr, float(delta))
