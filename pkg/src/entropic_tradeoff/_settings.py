"""Process-wide numeric settings: validation tolerance and entropy log base."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass


@dataclass
class _Settings:
    atol: float = 1e-10
    log_base: float = 2.0


_SETTINGS = _Settings()

#: Probabilities in [-CLAMP_BAND, 0) are clamped to zero.
CLAMP_BAND = 1e-12
#: Probabilities below this are exact zeros inside logarithms.
LOG_ZERO = 1e-15


def get_tolerance() -> float:
    """Construction tolerance (default 1e-10)."""
    return _SETTINGS.atol


def derived_tolerance() -> float:
    """Tolerance for derived identities, one decade looser than construction."""
    return 10.0 * _SETTINGS.atol


def set_tolerance(atol: float) -> None:
    if not atol > 0 or not math.isfinite(atol):
        raise ValueError(f"tolerance must be positive and finite, got {atol!r}")
    _SETTINGS.atol = float(atol)


def get_log_base() -> float:
    return _SETTINGS.log_base


def set_log_base(base: float) -> None:
    """Set the entropy unit: 2 for bits, ``math.e`` for nats."""
    if not base > 1 or not math.isfinite(base):
        raise ValueError(f"log base must be finite and > 1, got {base!r}")
    _SETTINGS.log_base = float(base)


def resolve_base(base: float | None) -> float:
    return _SETTINGS.log_base if base is None else float(base)


@contextlib.contextmanager
def override(*, atol: float | None = None, log_base: float | None = None):
    """Temporarily change settings inside a ``with`` block."""
    saved = (_SETTINGS.atol, _SETTINGS.log_base)
    try:
        if atol is not None:
            set_tolerance(atol)
        if log_base is not None:
            set_log_base(log_base)
        yield
    finally:
        _SETTINGS.atol, _SETTINGS.log_base = saved
