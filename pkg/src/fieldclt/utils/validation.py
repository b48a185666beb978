"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

SUPPORTED_DIMENSIONS = (1, 2, 3)


def check_positive(value, name, allow_zero=False):
    """Return ``value`` as a float, raising ``ValueError`` unless it is > 0."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be {bound}, got {value}")
    return value


def check_dimension(d):
    if not isinstance(d, numbers.Integral) or isinstance(d, bool):
        raise TypeError(f"dimension must be an integer, got {d!r}")
    if d not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"dimension must be one of {SUPPORTED_DIMENSIONS}, got {d}")
    return int(d)


def check_points(points, d, name="points"):
    """Coerce ``points`` to a float array whose last axis has length ``d``.

    Scalars and 1-D arrays are accepted in dimension one and interpreted as
    a collection of scalar points.
    """
    arr = np.asarray(points, dtype=float)
    if d == 1 and (arr.ndim == 0 or arr.shape[-1:] != (1,)):
        arr = arr[..., np.newaxis]
    if arr.shape[-1] != d:
        raise ValueError(f"{name} must have trailing dimension {d}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_lambda(lam, d):
    """Validate a single frequency vector and return it as shape ``(d,)``."""
    arr = check_points(lam, d, name="lambda")
    if arr.size != d:
        raise ValueError(f"expected a single {d}-vector, got shape {np.shape(lam)}")
    return arr.reshape(d)


def check_samples(samples, min_samples=2, name="samples"):
    """Return a finite 1-D float array with at least ``min_samples`` entries."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size < min_samples:
        raise ValueError(f"{name} needs at least {min_samples} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
