"""Numba / numpy backend selection for the hot solver loops.

The iterative game solver has a numba ``@njit`` implementation and an
equivalent pure-numpy one.  The default is numba whenever it imports; set
``PERSUASION_BACKEND=numpy`` to force the fallback (or ``numba`` to insist,
raising if unavailable).  Individual solver calls can also override the
backend explicitly, which is what the benchmark script does.
"""
from __future__ import annotations

import os
import warnings

ENV_VAR = "PERSUASION_BACKEND"

try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


def resolve_backend(override: str | None = None) -> str:
    """Return 'numba' or 'numpy' given an optional per-call override."""
    choice = override if override is not None else os.environ.get(ENV_VAR, "auto")
    choice = choice.lower()
    if choice in ("auto", ""):
        return "numba" if HAS_NUMBA else "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    warnings.warn(f"unknown backend {choice!r}, falling back to auto", stacklevel=2)
    return "numba" if HAS_NUMBA else "numpy"
