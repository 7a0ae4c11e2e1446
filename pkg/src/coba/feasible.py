"""Feasible sets with bounded diameter and the diagonal-metric projection.

Three variants: the full space, an axis-aligned box, and a Euclidean ball.
Projection is taken under a strictly positive diagonal metric; for the box the
metric separates coordinates so projection reduces to a clamp, while the ball
needs a one-dimensional root find on the Lagrange multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vecmath import as_vector, check_same_length

#: residual tolerance on |dist - radius| for ball projection
BALL_TOL = 1e-12
_BALL_MAX_BISECT = 200


class MetricError(ValueError):
    """The projection metric has a nonpositive entry."""


@dataclass(frozen=True)
class FullSpace:
    """Unconstrained feasible set (no bounded diameter)."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lower, upper], lower_i <= upper_i."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper)
        check_same_length(lo, hi)
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}, radius > 0."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_vector(self.center)
        r = float(self.radius)
        if not (math.isfinite(r) and r > 0):
            raise ValueError("ball radius must be finite and positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)


FeasibleSet = FullSpace | Box | Ball


def symmetric_box(n: int, bound: float = 10.0) -> Box:
    """Default benchmark set: [-bound, bound]^n."""
    b = float(bound) * np.ones(n)
    return Box(-b, b)


def diameter_inf(fset: FeasibleSet) -> float:
    """ell-infinity diameter; math.inf for the full space."""
    if isinstance(fset, FullSpace):
        return math.inf
    if isinstance(fset, Box):
        if fset.lower.size == 0:
            return 0.0
        return float(np.max(fset.upper - fset.lower))
    return 2.0 * fset.radius


def contains(fset: FeasibleSet, x: np.ndarray, tol: float = 1e-10) -> bool:
    """Membership predicate, with tolerance for floating-point boundaries."""
    x = as_vector(x)
    if isinstance(fset, FullSpace):
        return True
    if isinstance(fset, Box):
        check_same_length(x, fset.lower)
        return bool(
            np.all(x >= fset.lower - tol) and np.all(x <= fset.upper + tol)
        )
    check_same_length(x, fset.center)
    return float(np.linalg.norm(x - fset.center)) <= fset.radius + tol


def _check_metric(diag: np.ndarray) -> np.ndarray:
    diag = as_vector(diag)
    if np.any(diag <= 0):
        raise MetricError("projection metric must be strictly positive")
    return diag


def _project_ball(fset: Ball, diag: np.ndarray, y: np.ndarray) -> np.ndarray:
    c, r = fset.center, fset.radius
    dist = float(np.linalg.norm(y - c))
    if dist <= r:
        return y.copy()

    # Minimize sum diag_i (x_i - y_i)^2 s.t. ||x - c|| <= r.  KKT gives
    # x_i = c_i + diag_i (y_i - c_i) / (diag_i + theta) with theta > 0 the
    # multiplier; the constraint residual is monotone decreasing in theta.
    dy = y - c

    def residual(theta: float) -> float:
        x = diag * dy / (diag + theta)
        return float(np.linalg.norm(x)) - r

    lo, hi = 0.0, 1.0
    while residual(hi) > 0:
        lo = hi
        hi *= 2.0
        if hi > 1e300:  # unreachable for finite inputs; defensive
            break
    for _ in range(_BALL_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        res = residual(mid)
        if abs(res) <= BALL_TOL:
            hi = lo = mid
            break
        if res > 0:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return c + diag * dy / (diag + theta)


def project(fset: FeasibleSet, diag: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Nearest point of the set under the metric induced by ``diag``.

    ``diag`` holds the strictly positive diagonal of the metric matrix.
    """
    y = as_vector(y)
    diag = _check_metric(diag)
    check_same_length(diag, y)
    if isinstance(fset, FullSpace):
        return y.copy()
    if isinstance(fset, Box):
        check_same_length(y, fset.lower)
        return np.clip(y, fset.lower, fset.upper)
    check_same_length(y, fset.center)
    return _project_ball(fset, diag, y)
