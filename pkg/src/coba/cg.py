"""Conjugate-gradient update parameters and the damped CG surrogate direction.

Five classical formulas for the scalar mixing parameter (Hestenes-Stiefel,
Fletcher-Reeves, Polak-Ribiere-Polyak, Dai-Yuan, Hager-Zhang) applied to the
stochastic gradients and the optimizer's own stored previous direction.  The
direction combines the current gradient with the previous direction through a
coefficient M / t^a that decays to zero, so no line search is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vecmath import InputError, as_vector, check_same_length

#: relative threshold below which a denominator is treated as singular
GUARD_REL_TOL = 1e-12

GAMMA_KINDS = ("hs", "fr", "prp", "dy", "hz")


@dataclass(frozen=True)
class GammaKind:
    """Choice of CG update-parameter formula; ``hz`` carries lambda > 1/4."""

    name: str
    hz_lambda: float = 2.0

    def __post_init__(self):
        if self.name not in GAMMA_KINDS:
            raise ValueError(f"unknown gamma kind {self.name!r}")
        if self.name == "hz" and not self.hz_lambda > 0.25:
            raise ValueError("hz requires lambda > 1/4")


@dataclass
class CgContext:
    """Gradient pair and previous direction feeding the gamma formulas.

    At t = 1 both g_prev and d_prev are zero vectors.
    """

    g_curr: np.ndarray
    g_prev: np.ndarray
    d_prev: np.ndarray
    t: int


def _singular(num: float, den: float) -> bool:
    return abs(den) < GUARD_REL_TOL * (1.0 + abs(num))


def gamma(kind: GammaKind, ctx: CgContext) -> float:
    """CG update parameter for the given formula; 0 on any singular case.

    Returning 0 on t = 1 or a vanishing denominator falls back to the plain
    stochastic gradient for that step, which the regret analysis tolerates.
    """
    g = as_vector(ctx.g_curr)
    gp = as_vector(ctx.g_prev)
    dp = as_vector(ctx.d_prev)
    check_same_length(g, gp)
    check_same_length(g, dp)
    if ctx.t < 1:
        raise InputError("step counter must be >= 1")
    if ctx.t == 1:
        return 0.0

    # inputs are validated above; raw dot products avoid re-validation
    y = g - gp
    gg = float(g @ g)
    if kind.name == "fr":
        den = float(gp @ gp)
        return 0.0 if _singular(gg, den) else gg / den
    if kind.name == "prp":
        num = float(g @ y)
        den = float(gp @ gp)
        return 0.0 if _singular(num, den) else num / den

    dy = float(dp @ y)
    if kind.name == "hs":
        num = float(g @ y)
        return 0.0 if _singular(num, dy) else num / dy
    if kind.name == "dy":
        return 0.0 if _singular(gg, dy) else gg / dy
    # hz: HS minus the lambda-weighted curvature correction; any singular
    # denominator zeroes the whole value, not just one term
    num = float(g @ y)
    correction_num = kind.hz_lambda * float(y @ y) * float(g @ dp)
    if _singular(num, dy) or _singular(correction_num, dy * dy):
        return 0.0
    return num / dy - correction_num / (dy * dy)


def cg_direction(
    g: np.ndarray,
    gamma_t: float,
    d_prev: np.ndarray,
    M: float,
    a: float,
    t: int,
) -> np.ndarray:
    """Damped CG surrogate gradient: g - (M / t^a) * gamma_t * d_prev."""
    g = as_vector(g)
    d_prev = as_vector(d_prev)
    check_same_length(g, d_prev)
    if not np.isfinite(gamma_t):
        raise InputError("gamma_t must be finite")
    if t < 1:
        raise InputError("step counter must be >= 1")
    coeff = (M / float(t) ** a) * gamma_t
    return g - coeff * d_prev
