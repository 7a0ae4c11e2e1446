"""Dense vector primitives and the diagonal-metric norm used by every update rule.

Parameter vectors are plain 1-D float64 numpy arrays.  All operations here are
pure and never broadcast across mismatched lengths: a length mismatch is a hard
error, because silent broadcasting hides harness bugs.
"""

from __future__ import annotations

import numpy as np


class DimensionError(ValueError):
    """Two vectors that must have equal length do not."""


class InputError(ValueError):
    """An input contains NaN/Inf or violates a documented precondition."""


def as_vector(a) -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError(f"expected a 1-D vector, got shape {arr.shape}")
    # ndarray.all() avoids the fromnumeric dispatch; this sits on the hot path
    if not np.isfinite(arr).all():
        raise InputError("vector contains NaN or Inf")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")


def elemwise_square(a: np.ndarray) -> np.ndarray:
    """Element-wise square of a vector."""
    a = as_vector(a)
    return a * a


def elemwise_max(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise maximum of two equal-length vectors."""
    a = as_vector(a)
    b = as_vector(b)
    check_same_length(a, b)
    return np.maximum(a, b)


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean inner product."""
    a = as_vector(a)
    b = as_vector(b)
    check_same_length(a, b)
    return float(np.dot(a, b))


def norm_inf(a: np.ndarray) -> float:
    """max_i |a_i|."""
    a = as_vector(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def metric_norm(diag: np.ndarray, x: np.ndarray) -> float:
    """Norm induced by a nonnegative diagonal metric: sqrt(sum_i diag_i * x_i^2)."""
    diag = as_vector(diag)
    x = as_vector(x)
    check_same_length(diag, x)
    if np.any(diag < 0):
        raise InputError("metric weights must be nonnegative")
    return float(np.sqrt(np.sum(diag * x * x)))
