"""Conjugate-gradient-based Adam, baselines, and a regret-bound test bench."""

__version__ = "0.1.0"

from .cg import CgContext, GammaKind, cg_direction, gamma
from .feasible import Ball, Box, FullSpace, contains, diameter_inf, project
from .optim import (
    AMSGrad,
    Adam,
    AdaGrad,
    CoBA,
    ConstantBeta1,
    ConstantStep,
    DiminishingSqrtStep,
    GeometricDecayBeta1,
    HyperParams,
    OptimizerState,
    RMSProp,
    SGD,
    make_optimizer,
)
from .problems import (
    LabeledBatch,
    OnlineLogistic,
    SoftmaxLinear,
    StochasticQuadratic,
    TinyMLP,
    accuracy,
    bce_loss,
    ce_loss,
)
from .theory import (
    BoundReport,
    TheoryTrace,
    check_direction_bound,
    check_moment_sum,
    compute_t0,
    regret,
    theorem1_bound,
)
from .vecmath import elemwise_max, elemwise_square, inner, metric_norm, norm_inf

__all__ = [
    "GammaKind", "CgContext", "gamma", "cg_direction",
    "FullSpace", "Box", "Ball", "project", "contains", "diameter_inf",
    "HyperParams", "OptimizerState", "ConstantStep", "DiminishingSqrtStep",
    "ConstantBeta1", "GeometricDecayBeta1", "make_optimizer",
    "SGD", "AdaGrad", "RMSProp", "Adam", "AMSGrad", "CoBA",
    "StochasticQuadratic", "OnlineLogistic", "SoftmaxLinear", "TinyMLP",
    "LabeledBatch", "bce_loss", "ce_loss", "accuracy",
    "TheoryTrace", "BoundReport", "regret", "compute_t0",
    "check_direction_bound", "check_moment_sum", "theorem1_bound",
    "elemwise_square", "elemwise_max", "inner", "norm_inf", "metric_norm",
]
