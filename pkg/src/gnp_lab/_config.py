"""Process-wide settings read from the environment.

``GNP_LAB_TOL`` overrides the default geometric tolerance (absolute, in
domain length units). ``GNP_LAB_DISABLE_NUMBA=1`` forces the pure-numpy
kernel path even when numba is importable.
"""
from __future__ import annotations

import os

DEFAULT_TOL = 1e-9


def default_tol() -> float:
    raw = os.environ.get("GNP_LAB_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"GNP_LAB_TOL must be a positive number, got {raw!r}") from None
    if not value > 0:
        raise ValueError(f"GNP_LAB_TOL must be positive, got {raw!r}")
    return value


def resolve_tol(tol: float | None) -> float:
    return default_tol() if tol is None else float(tol)


def numba_requested() -> bool:
    return os.environ.get("GNP_LAB_DISABLE_NUMBA", "0").strip().lower() not in {"1", "true", "yes"}
