"""Exception types and the shared desk-scale work guard."""

import os

DEFAULT_MAX_WORK = 10**7
MAX_WORK_ENV = "SPARSE_SIEVE_MAX_WORK"


class NotCoprimeError(ValueError):
    """Raised when a modular inverse is requested for a non-unit."""


class CapacityExceeded(RuntimeError):
    """Raised when a computation would exceed the desk-scale work guard."""


class InputFormatError(ValueError):
    """Raised for malformed moduli or coefficient files."""


class GridTooCoarse(UserWarning):
    """Emitted when refining the z-grid moves a search result by more than 1%."""


def max_work():
    """Return the work guard, honouring the SPARSE_SIEVE_MAX_WORK override."""
    raw = os.environ.get(MAX_WORK_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_WORK
    try:
        value = int(raw)
    except ValueError:
        raise InputFormatError(f"{MAX_WORK_ENV} must be an integer, got {raw!r}")
    if value < 1:
        raise InputFormatError(f"{MAX_WORK_ENV} must be positive, got {value}")
    return value
