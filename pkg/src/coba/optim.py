"""Optimizer state machines: SGD, Adam, AMSGrad, CoBA, AdaGrad, RMSProp.

All optimizers share the projected-update shape x <- proj(x - alpha * dir).
AMSGrad and CoBA share one moment-update core so that CoBA with M = 0
reproduces AMSGrad bit for bit (the CG coefficient vanishes and the surrogate
direction collapses to the raw gradient).

The projection metric for the Adam family is diag(sqrt(v) + eps): the bare
diag(sqrt(v)) is singular while any coordinate of v is still zero, and the
same eps that guards the denominator keeps the metric positive definite.  For
box sets the clamp result is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cg import CgContext, GammaKind, cg_direction, gamma
from .feasible import FeasibleSet, contains, project
from .vecmath import as_vector

OPTIMIZER_NAMES = (
    "sgd",
    "adagrad",
    "rmsprop",
    "adam",
    "amsgrad",
    "coba-hs",
    "coba-fr",
    "coba-prp",
    "coba-dy",
    "coba-hz",
)


@dataclass(frozen=True)
class ConstantStep:
    """alpha_t = alpha for all t."""

    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be finite and positive")

    def value(self, t: int) -> float:
        return self.alpha


@dataclass(frozen=True)
class DiminishingSqrtStep:
    """alpha_t = alpha / sqrt(t), the schedule assumed by the regret bound."""

    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be finite and positive")

    def value(self, t: int) -> float:
        return self.alpha / math.sqrt(t)


StepSizeSchedule = ConstantStep | DiminishingSqrtStep


@dataclass(frozen=True)
class ConstantBeta1:
    """beta1_t = beta1 for all t."""

    beta1: float

    def __post_init__(self):
        # 0 is admitted (momentum off) even though the algorithm statement
        # writes (0, 1); the bound evaluation degenerates gracefully there
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError("beta1 must lie in [0, 1)")

    @property
    def cap(self) -> float:
        return self.beta1

    def value(self, t: int) -> float:
        return self.beta1


@dataclass(frozen=True)
class GeometricDecayBeta1:
    """beta1_t = beta1 * decay^(t-1); always <= beta1."""

    beta1: float
    decay: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.beta1 < 1.0:
            raise ValueError("beta1 must lie in [0, 1)")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError("decay must lie in (0, 1]")

    @property
    def cap(self) -> float:
        return self.beta1

    def value(self, t: int) -> float:
        return self.beta1 * self.decay ** (t - 1)


Beta1Schedule = ConstantBeta1 | GeometricDecayBeta1


@dataclass(frozen=True)
class HyperParams:
    """Hyperparameters shared across the optimizer family.

    M = 0 is admitted (though the algorithm statement wants M > 0) because the
    equivalence oracle against AMSGrad relies on the degenerate value.  a <= 1
    is rejected unless ``allow_small_a`` is set; that override exists only so
    tests can probe the boundary.
    """

    step: StepSizeSchedule = field(default_factory=lambda: ConstantStep(1e-3))
    beta1: Beta1Schedule = field(default_factory=lambda: ConstantBeta1(0.9))
    beta2: float = 0.999
    eps: float = 1e-8
    M: float = 1e-4
    a: float = 1.0 + 1e-5
    gamma_kind: GammaKind = field(default_factory=lambda: GammaKind("hs"))
    rho: float = 0.99  # RMSProp decay
    allow_small_a: bool = False

    def __post_init__(self):
        if not 0.0 < self.beta2 < 1.0:
            raise ValueError("beta2 must lie in (0, 1)")
        if not self.eps >= 0.0:
            raise ValueError("eps must be nonnegative")
        if not self.M >= 0.0:
            raise ValueError("M must be nonnegative")
        if not self.a > 1.0 and not self.allow_small_a:
            raise ValueError("a must exceed 1 (set allow_small_a to override)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")

    @property
    def mu(self) -> float:
        """beta1 / sqrt(beta2); the regret bound requires mu < 1."""
        return self.beta1.cap / math.sqrt(self.beta2)


@dataclass
class OptimizerState:
    """Mutable per-run state; zero-initialized before step 1."""

    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    v_hat: np.ndarray
    d_prev: np.ndarray
    g_prev: np.ndarray
    grad_accum: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, x0: np.ndarray) -> "OptimizerState":
        z = np.zeros_like(x0)
        return cls(
            x=x0.copy(),
            m=z.copy(),
            v=z.copy(),
            v_hat=z.copy(),
            d_prev=z.copy(),
            g_prev=z.copy(),
            grad_accum=z.copy(),
        )


class Optimizer:
    """Base class: holds hyperparameters, feasible set, and mutable state."""

    name = "base"

    def __init__(self, hyper: HyperParams, x0, fset: FeasibleSet):
        x0 = as_vector(x0)
        if not contains(fset, x0):
            raise ValueError("initial point lies outside the feasible set")
        self.hyper = hyper
        self.fset = fset
        self.state = OptimizerState.initial(x0)
        self._identity = np.ones_like(x0)
        #: gamma and direction of the most recent step, for instrumentation
        self.last_gamma = 0.0
        self.last_direction = np.zeros_like(x0)

    def step(self, g) -> np.ndarray:
        g = as_vector(g)
        s = self.state
        s.t += 1
        self.last_gamma = 0.0
        self.last_direction = g
        return self._apply(g, s.t)

    def _apply(self, g: np.ndarray, t: int) -> np.ndarray:
        raise NotImplementedError


class SGD(Optimizer):
    name = "sgd"

    def _apply(self, g, t):
        s = self.state
        alpha_t = self.hyper.step.value(t)
        s.x = project(self.fset, self._identity, s.x - alpha_t * g)
        return s.x


class AdaGrad(Optimizer):
    name = "adagrad"

    def _apply(self, g, t):
        s = self.state
        s.grad_accum = s.grad_accum + g * g
        scaled = g / (np.sqrt(s.grad_accum) + self.hyper.eps)
        alpha_t = self.hyper.step.value(t)
        s.x = project(self.fset, self._identity, s.x - alpha_t * scaled)
        return s.x


class RMSProp(Optimizer):
    name = "rmsprop"

    def _apply(self, g, t):
        s = self.state
        rho = self.hyper.rho
        s.v = rho * s.v + (1.0 - rho) * (g * g)
        scaled = g / (np.sqrt(s.v) + self.hyper.eps)
        alpha_t = self.hyper.step.value(t)
        s.x = project(self.fset, self._identity, s.x - alpha_t * scaled)
        return s.x


class Adam(Optimizer):
    name = "adam"

    def _apply(self, g, t):
        s = self.state
        h = self.hyper
        b1 = h.beta1.value(t)
        s.m = b1 * s.m + (1.0 - b1) * g
        s.v = h.beta2 * s.v + (1.0 - h.beta2) * (g * g)
        metric = np.sqrt(s.v) + h.eps
        direction = s.m / metric
        alpha_t = h.step.value(t)
        s.x = project(self.fset, metric, s.x - alpha_t * direction)
        return s.x


class AMSGrad(Optimizer):
    name = "amsgrad"

    def _moment_update(self, d, g, t):
        # shared with CoBA; d is the first-moment input, g feeds the
        # second moment (always the raw gradient square)
        s = self.state
        h = self.hyper
        b1t = h.beta1.value(t)
        s.m = b1t * s.m + (1.0 - b1t) * d
        s.v = h.beta2 * s.v + (1.0 - h.beta2) * (g * g)
        s.v_hat = np.maximum(s.v_hat, s.v)
        metric = np.sqrt(s.v_hat) + h.eps
        d_hat = s.m / metric
        alpha_t = h.step.value(t)
        s.x = project(self.fset, metric, s.x - alpha_t * d_hat)
        return s.x

    def _apply(self, g, t):
        return self._moment_update(g, g, t)


class CoBA(AMSGrad):
    """Conjugate-gradient-based Adam: AMSGrad with the CG surrogate gradient."""

    def __init__(self, hyper, x0, fset):
        super().__init__(hyper, x0, fset)
        self.name = f"coba-{hyper.gamma_kind.name}"

    def _apply(self, g, t):
        s = self.state
        h = self.hyper
        ctx = CgContext(g_curr=g, g_prev=s.g_prev, d_prev=s.d_prev, t=t)
        gamma_t = gamma(h.gamma_kind, ctx)
        d = cg_direction(g, gamma_t, s.d_prev, h.M, h.a, t)
        self.last_gamma = gamma_t
        self.last_direction = d
        x = self._moment_update(d, g, t)
        s.g_prev = g.copy()
        s.d_prev = d
        return x


def make_optimizer(name: str, hyper: HyperParams, x0, fset: FeasibleSet) -> Optimizer:
    """Build an optimizer by its benchmark name (e.g. ``coba-fr``)."""
    if name not in OPTIMIZER_NAMES:
        raise ValueError(f"unknown optimizer {name!r}")
    if name.startswith("coba-"):
        kind = name.split("-", 1)[1]
        if hyper.gamma_kind.name != kind:
            hyper = HyperParams(
                step=hyper.step,
                beta1=hyper.beta1,
                beta2=hyper.beta2,
                eps=hyper.eps,
                M=hyper.M,
                a=hyper.a,
                gamma_kind=GammaKind(kind, hyper.gamma_kind.hz_lambda),
                rho=hyper.rho,
                allow_small_a=hyper.allow_small_a,
            )
        return CoBA(hyper, x0, fset)
    cls = {
        "sgd": SGD,
        "adagrad": AdaGrad,
        "rmsprop": RMSProp,
        "adam": Adam,
        "amsgrad": AMSGrad,
    }[name]
    return cls(hyper, x0, fset)
