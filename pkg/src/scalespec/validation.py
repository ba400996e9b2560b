"""Small input-checking helpers shared across the package."""

import numpy as np


def require(condition, message):
    """Raise ValueError(message) unless condition holds."""
    if not condition:
        raise ValueError(message)


def as_float_vector(x, name="values", min_len=1, allow_nan=False):
    """Coerce x to a 1-d float64 array and validate it.

    Accepts lists, tuples, 1-d arrays, and (n, 1) / (1, n) column or row
    vectors. Non-finite entries are rejected unless allow_nan is set.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"{name} must have at least {min_len} values, got {arr.size}")
    if not allow_nan and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_positive_int(value, name, minimum=1):
    try:
        ivalue = int(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be an integer, got {value!r}") from None
    if ivalue != value or ivalue < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return ivalue


def check_open_unit(value, name):
    """Validate a parameter constrained to the open interval (0, 1)."""
    v = float(value)
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {value!r}")
    return v
