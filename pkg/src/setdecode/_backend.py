"""Kernel backend selection.

Hot loops (chain sweeps, state enumeration, simplex pivoting, coverage
enumeration) are written once as plain functions over numpy arrays and
compiled with numba when available.  Setting the environment variable
``SETDECODE_NUMBA=0`` before import forces the uncompiled pure
numpy/Python path; the two paths execute identical code and therefore
produce identical results.
"""

from __future__ import annotations

import os

_flag = os.environ.get("SETDECODE_NUMBA", "1").strip().lower()

NUMBA_ENABLED = _flag not in {"0", "false", "off", "no"}

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is an install dependency
        NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def jit_kernel(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return func
