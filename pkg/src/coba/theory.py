"""Regret accounting and numerical verification of the regret bound.

Given a fully instrumented run trace, this module evaluates the four-term
regret bound, the direction-boundedness lemma, and the weighted moment-sum
lemma, reporting whether each holds within floating-point slack.

Norm convention: the direction bound manipulates the unsubscripted Euclidean
norm, so callers should supply a gradient bound G that dominates the l2 norm
of every stochastic gradient over the feasible set (sqrt(N) times an
l-infinity bound suffices).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .optim import DiminishingSqrtStep, HyperParams
from .vecmath import InputError

#: relative slack absorbing floating-point summation error in bound checks
REL_SLACK = 1e-9


class PreconditionError(ValueError):
    """The trace does not satisfy the hypotheses of the checked statement."""


@dataclass
class TheoryTrace:
    """Per-step instrumentation of one run, everything 1-indexed by step.

    Row t-1 of each array holds the value at step t.  ``loss_star`` holds
    f_t evaluated at the offline comparator.
    """

    gammas: np.ndarray        # (T,)
    directions: np.ndarray    # (T, N)
    moments: np.ndarray       # (T, N)
    v_hats: np.ndarray        # (T, N)
    alphas: np.ndarray        # (T,)
    beta1s: np.ndarray        # (T,)
    loss_x: np.ndarray        # (T,)
    loss_star: np.ndarray     # (T,)
    hyper: HyperParams

    def __post_init__(self):
        T = len(self.gammas)
        if T < 1:
            raise InputError("trace must contain at least one step")
        for name in ("directions", "moments", "v_hats", "alphas", "beta1s",
                     "loss_x", "loss_star"):
            if len(getattr(self, name)) != T:
                raise InputError(f"trace field {name} has mismatched length")

    @property
    def T(self) -> int:
        return len(self.gammas)


@dataclass
class BoundReport:
    """Evaluated regret bound: four summands plus the three AMSGrad analogues."""

    regret: float
    term1: float
    term2: float
    term3: float
    term4: float
    amsgrad_term1: float
    amsgrad_term2: float
    amsgrad_term3: float
    t0: int
    G_inf: float
    Gbar_inf: float
    holds: bool

    @property
    def total(self) -> float:
        return self.term1 + self.term2 + self.term3 + self.term4

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


def regret(trace: TheoryTrace) -> float:
    """Cumulative excess loss over the comparator."""
    return float(np.sum(trace.loss_x - trace.loss_star))


def compute_t0(gammas, M: float, a: float) -> int:
    """Smallest t0 with (M / t^a) * sup|gamma| <= 1/2 for all t >= t0."""
    gammas = np.asarray(gammas, dtype=np.float64)
    if gammas.size == 0:
        raise InputError("gamma list must be nonempty")
    big_gamma = float(np.max(np.abs(gammas)))
    if M * big_gamma <= 0.0:
        return 1
    # coefficient is strictly decreasing in t, so solve then verify
    t0 = max(1, math.ceil((2.0 * M * big_gamma) ** (1.0 / a)))
    while t0 > 1 and (M / (t0 - 1) ** a) * big_gamma <= 0.5:
        t0 -= 1
    while (M / t0**a) * big_gamma > 0.5:
        t0 += 1
    return t0


def direction_bound_value(trace: TheoryTrace, G: float, t0: int) -> float:
    """max{2G, max_{t < t0} ||d_t||}."""
    gbar = 2.0 * float(G)
    if t0 > 1:
        early = np.linalg.norm(trace.directions[: t0 - 1], axis=1)
        gbar = max(gbar, float(np.max(early)))
    return gbar


def check_direction_bound(trace: TheoryTrace, G: float, t0: int) -> bool:
    """||d_t|| <= max{2G, max_{t < t0} ||d_t||} for every step."""
    gbar = direction_bound_value(trace, G, t0)
    norms = np.linalg.norm(trace.directions, axis=1)
    return bool(np.all(norms <= gbar + REL_SLACK))


def _check_schedule(trace: TheoryTrace) -> float:
    """Verify alpha_t = alpha / sqrt(t) and beta1_t <= beta1; return alpha."""
    h = trace.hyper
    if not isinstance(h.step, DiminishingSqrtStep):
        raise PreconditionError("the bound requires the alpha / sqrt(t) schedule")
    alpha = h.step.alpha
    t_idx = np.arange(1, trace.T + 1, dtype=np.float64)
    if not np.allclose(trace.alphas, alpha / np.sqrt(t_idx), rtol=1e-12, atol=0):
        raise PreconditionError("trace step sizes do not match alpha / sqrt(t)")
    if np.any(trace.beta1s > h.beta1.cap + 1e-15):
        raise PreconditionError("trace beta1_t exceeds the beta1 cap")
    if not h.mu < 1.0:
        raise PreconditionError("beta1 / sqrt(beta2) must be < 1")
    return alpha


def check_moment_sum(trace: TheoryTrace, l: int) -> bool:
    """Weighted moment sum lemma for shift l in {0, ..., T-2}.

    Left side: sum_{t=l+1}^T alpha_t sum_i m_{t-l,i}^2 / sqrt(vhat_{t,i});
    coordinates with vhat = 0 are skipped (their moments are identically 0).
    """
    T = trace.T
    if not 0 <= l <= T - 2:
        if T == 1:
            return True  # no admissible l; vacuous
        raise InputError(f"l must lie in [0, {T - 2}]")
    alpha = _check_schedule(trace)
    h = trace.hyper

    lhs = 0.0
    for t in range(l + 1, T + 1):
        m = trace.moments[t - l - 1]
        vh = trace.v_hats[t - 1]
        mask = vh > 0
        lhs += trace.alphas[t - 1] * float(np.sum(m[mask] ** 2 / np.sqrt(vh[mask])))

    beta1 = h.beta1.cap
    rhs = (
        alpha
        * math.sqrt(1.0 + math.log(T))
        / ((1.0 - beta1) * (1.0 - h.mu) * math.sqrt(1.0 - h.beta2))
        * float(np.sum(np.sqrt(np.sum(trace.directions**2, axis=0))))
    )
    return bool(lhs <= rhs + REL_SLACK * max(1.0, abs(rhs)))


def theorem1_bound(
    trace: TheoryTrace,
    hyper: HyperParams,
    D_inf: float,
    Gbar_inf: float,
    G_inf: float = math.nan,
) -> BoundReport:
    """Evaluate the four-term regret bound against the observed regret.

    The bound is stated with the eps-free sqrt(vhat); coordinates with
    vhat = 0 contribute 0.
    """
    if not math.isfinite(D_inf):
        raise PreconditionError("the bound requires a bounded feasible set")
    alpha = _check_schedule(trace)
    T = trace.T
    beta1 = hyper.beta1.cap
    mu = hyper.mu

    sqrt_vhat = np.sqrt(trace.v_hats)              # (T, N)
    term1 = (
        D_inf**2 * math.sqrt(T) / (alpha * (1.0 - beta1))
        * float(np.sum(sqrt_vhat[-1]))
    )
    term2 = (
        D_inf**2 / (2.0 * (1.0 - beta1))
        * float(np.sum((trace.beta1s / trace.alphas) * np.sum(sqrt_vhat, axis=1)))
    )
    term3 = (
        alpha * math.sqrt(1.0 + math.log(T))
        / ((1.0 - beta1) ** 2 * (1.0 - mu) * math.sqrt(1.0 - hyper.beta2))
        * float(np.sum(np.sqrt(np.sum(trace.directions**2, axis=0))))
    )
    t_idx = np.arange(1, T + 1, dtype=np.float64)
    term4 = (
        D_inf * Gbar_inf * float(np.sum(np.abs(trace.gammas) / t_idx**hyper.a))
    )

    r = regret(trace)
    total = term1 + term2 + term3 + term4
    return BoundReport(
        regret=r,
        term1=term1,
        term2=term2,
        term3=term3,
        term4=term4,
        amsgrad_term1=term1,
        amsgrad_term2=term2,
        amsgrad_term3=term3,
        t0=compute_t0(trace.gammas, hyper.M, hyper.a),
        G_inf=G_inf,
        Gbar_inf=Gbar_inf,
        holds=bool(r <= total + REL_SLACK * max(1.0, abs(total))),
    )
