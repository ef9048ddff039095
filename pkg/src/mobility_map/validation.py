"""Input validation helpers used by the estimators and functional API."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .errors import ParameterError


def check_points(X, *, allow_empty=True, name="X"):
    """Validate an ``(n, 3)`` array of finite coordinates and return it as float64."""
    if isinstance(X, np.ndarray) and X.ndim == 2 and X.shape[0] == 0:
        if X.shape[1] != 3:
            raise ParameterError(f"{name} must have 3 columns, got {X.shape[1]}")
        if not allow_empty:
            raise ParameterError(f"{name} is empty")
        return np.zeros((0, 3))
    try:
        X = check_array(X, dtype=np.float64, ensure_2d=True,
                        ensure_min_samples=0 if allow_empty else 1)
    except ValueError as exc:
        raise ParameterError(f"{name}: {exc}") from exc
    if X.shape[1] != 3:
        raise ParameterError(f"{name} must have 3 columns, got {X.shape[1]}")
    return X


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_unit_interval(value, name, *, closed_low=False, closed_high=False):
    ok_low = value >= 0 if closed_low else value > 0
    ok_high = value <= 1 if closed_high else value < 1
    if not isinstance(value, numbers.Real) or not (ok_low and ok_high):
        lo = "[" if closed_low else "("
        hi = "]" if closed_high else ")"
        raise ParameterError(f"{name} must lie in {lo}0, 1{hi}, got {value!r}")
    return float(value)


def check_vector3(v, name):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ParameterError(f"{name} must be a finite 3-vector, got {v!r}")
    return v
