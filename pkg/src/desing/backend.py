"""Kernel backend selection: numba-accelerated with a pure-numpy fallback.

The environment variable ``DESING_NUMBA`` picks the path: "0" forces the
numpy fallback, "1" (or unset) uses numba when importable.  The choice can
also be made programmatically through :func:`set_backend`, which the
benchmark script uses to time both paths on identical inputs.
"""

from __future__ import annotations

import os

from . import _kernels_numpy

try:
    from . import _kernels_numba
    HAS_NUMBA = True
except ImportError:
    _kernels_numba = None
    HAS_NUMBA = False

_KERNEL_NAMES = ("contract_full_flat", "apply_metric_slot", "norm_sq_flat",
                 "christoffel_flat", "covd_correction_flat")

_active_name = "numpy"
_active_module = _kernels_numpy


def available_backends() -> tuple:
    return ("numpy", "numba") if HAS_NUMBA else ("numpy",)


def set_backend(name: str) -> None:
    """Select 'numpy' or 'numba'.  Raises if numba was requested but absent."""
    global _active_name, _active_module
    if name == "numpy":
        _active_name, _active_module = "numpy", _kernels_numpy
    elif name == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        _active_name, _active_module = "numba", _kernels_numba
    else:
        raise ValueError(f"unknown backend {name!r}; expected 'numpy' or 'numba'")


def active_backend() -> str:
    return _active_name


def kernels():
    """Module object providing the active kernel implementations."""
    return _active_module


def warmup() -> None:
    """Compile the numba kernels on tiny inputs so timings exclude JIT cost."""
    if _active_name != "numba":
        return
    import numpy as np
    a = np.zeros((1, 2, 2))
    g = np.eye(2)[None, :, :].copy()
    dg = np.zeros((1, 2, 2, 2))
    gamma = _active_module.christoffel_flat(g, dg)
    _active_module.contract_full_flat(a, a, 2, 1, 1, 1, 1)
    _active_module.norm_sq_flat(a.reshape(1, 4), g, g, 2, 1, 1)
    _active_module.covd_correction_flat(a.reshape(1, 4), gamma, 2, 1, 1)


def _init_from_env() -> None:
    flag = os.environ.get("DESING_NUMBA", "").strip()
    if flag == "0":
        set_backend("numpy")
    elif flag == "1":
        set_backend("numba")  # raises if unavailable: an explicit request
    else:
        set_backend("numba" if HAS_NUMBA else "numpy")


_init_from_env()
