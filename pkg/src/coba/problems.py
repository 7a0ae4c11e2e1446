"""Loss functions and synthetic online problems with comparator oracles.

Each problem draws its step-t loss deterministically from (seed, t), exposes an
exact analytic gradient, and (for the convex variants) can compute the offline
minimizer used as the regret comparator.  A tiny manually-differentiated MLP
stands in for hardware-scale deep models: it exercises non-convex training
curves and the 100%-accuracy milestone at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from . import feasible as fz
from .vecmath import DimensionError, InputError

#: predictions are clipped into [CLIP, 1 - CLIP] before logs
CLIP = 1e-12


class UnsupportedError(ValueError):
    """The requested oracle does not exist for this problem variant."""


class PreconditionError(ValueError):
    """A documented precondition was violated (e.g. infeasible query point)."""


def bce_loss(y, z) -> float:
    """Mean binary cross entropy; z is clipped away from {0, 1}."""
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if y.shape != z.shape or y.ndim != 1:
        raise DimensionError("labels and predictions must be equal-length vectors")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("binary labels must be 0 or 1")
    zc = np.clip(z, CLIP, 1.0 - CLIP)
    return float(-np.mean(y * np.log(zc) + (1.0 - y) * np.log(1.0 - zc)))


def ce_loss(Y, Z) -> float:
    """Mean multi-class cross entropy over one-hot rows.

    Rows of Z are clipped entrywise to >= CLIP and renormalized.
    """
    Y = np.asarray(Y, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if Y.shape != Z.shape or Y.ndim != 2:
        raise DimensionError("labels and predictions must be equal-shape matrices")
    if not np.all((Y == 0) | (Y == 1)) or not np.all(Y.sum(axis=1) == 1):
        raise InputError("label rows must be one-hot")
    Zc = np.clip(Z, CLIP, None)
    Zc = Zc / Zc.sum(axis=1, keepdims=True)
    return float(-np.mean(np.sum(Y * np.log(Zc), axis=1)))


@dataclass
class LabeledBatch:
    """Feature rows plus binary labels or one-hot label rows."""

    inputs: np.ndarray
    labels: np.ndarray


def _step_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, t])


def _check_feasible(fset, x):
    if not fz.contains(fset, x, tol=1e-9):
        raise PreconditionError("query point lies outside the feasible set")


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -700, 700)))


class Problem:
    """Common surface: loss_and_grad, comparator, gradient_bound, accuracy."""

    convex: bool = False
    dim: int
    feasible: fz.FeasibleSet
    seed: int

    def loss_and_grad(self, x: np.ndarray, t: int) -> tuple[float, np.ndarray]:
        raise NotImplementedError

    def comparator(self, T: int) -> np.ndarray:
        raise UnsupportedError(f"{type(self).__name__} has no comparator oracle")

    def gradient_bound(self) -> float:
        raise UnsupportedError(f"{type(self).__name__} has no gradient bound oracle")

    def accuracy(self, x: np.ndarray) -> float:
        raise UnsupportedError(f"{type(self).__name__} has no accuracy notion")


class StochasticQuadratic(Problem):
    """f_t(x) = 1/2 sum_i q_i (x_i - c_{t,i})^2 with random per-step centers.

    Centers are uniform in [-center_scale, center_scale]^N, drawn from
    (seed, t).  The offline minimizer over a box is the clamped mean center
    (the objective is separable).
    """

    convex = True

    def __init__(self, q, feasible_set: fz.FeasibleSet, seed: int = 0,
                 center_scale: float = 1.0):
        self.q = np.asarray(q, dtype=np.float64)
        if self.q.ndim != 1 or np.any(self.q <= 0):
            raise InputError("quadratic weights must be a positive vector")
        self.dim = self.q.size
        self.feasible = feasible_set
        self.seed = int(seed)
        self.center_scale = float(center_scale)
        self._center_cache = None

    def center(self, t: int) -> np.ndarray:
        # one-entry cache: a benchmark step queries the same t several times
        cached = self._center_cache
        if cached is not None and cached[0] == t:
            return cached[1]
        c = _step_rng(self.seed, t).uniform(
            -self.center_scale, self.center_scale, self.dim
        )
        self._center_cache = (t, c)
        return c

    def loss_and_grad(self, x, t):
        _check_feasible(self.feasible, x)
        c = self.center(t)
        diff = x - c
        return float(0.5 * np.sum(self.q * diff * diff)), self.q * diff

    def comparator(self, T):
        mean_c = np.mean([self.center(t) for t in range(1, T + 1)], axis=0)
        if isinstance(self.feasible, fz.Box):
            return np.clip(mean_c, self.feasible.lower, self.feasible.upper)
        if isinstance(self.feasible, fz.FullSpace):
            return mean_c
        return fz.project(self.feasible, np.ones(self.dim), mean_c)

    def gradient_bound(self):
        if not isinstance(self.feasible, fz.Box):
            raise UnsupportedError("gradient bound requires a box feasible set")
        box_abs = np.maximum(np.abs(self.feasible.lower), np.abs(self.feasible.upper))
        return float(np.max(self.q * (box_abs + self.center_scale)))


class _PgdComparatorMixin:
    """Offline minimizer via L-BFGS-B warm start plus projected-gradient polish."""

    def _mean_loss_grad(self, x, T):
        total, grad = 0.0, np.zeros(self.dim)
        for t in range(1, T + 1):
            lt, gt = self._raw_loss_and_grad(x, t)
            total += lt
            grad += gt
        return total / T, grad / T

    def comparator(self, T, max_iter: int = 10**6, tol: float = 1e-10):
        x0 = np.zeros(self.dim)
        if isinstance(self.feasible, fz.Box):
            bounds = list(zip(self.feasible.lower, self.feasible.upper))
        elif isinstance(self.feasible, fz.FullSpace):
            bounds = None
        else:
            raise UnsupportedError("comparator supports box or full-space sets")

        res = _scipy_minimize(
            lambda x: self._mean_loss_grad(x, T),
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"ftol": 1e-18, "gtol": 1e-14, "maxiter": 20000},
        )
        x = np.asarray(res.x, dtype=np.float64)

        ones = np.ones(self.dim)
        eta = 1.0 / self._smoothness()
        for _ in range(max_iter):
            _, g = self._mean_loss_grad(x, T)
            x_next = fz.project(self.feasible, ones, x - eta * g)
            if float(np.linalg.norm(x_next - x)) <= tol * eta:
                return x_next
            x = x_next
        raise RuntimeError("comparator projected gradient descent did not converge")


class OnlineLogistic(_PgdComparatorMixin, Problem):
    """Binary cross entropy of a linear model on one fresh sample per step.

    Features are uniform in [-1, 1]^N; labels come from a fixed hidden weight
    vector, so the stream is a consistent (noise-free) logistic problem.
    Losses are evaluated in logit space (exactly, without clipping).
    """

    convex = True

    def __init__(self, dim: int, feasible_set: fz.FeasibleSet, seed: int = 0):
        self.dim = int(dim)
        self.feasible = feasible_set
        self.seed = int(seed)
        self._hidden = np.random.default_rng([seed, 10**9]).uniform(-1, 1, self.dim)

    def sample(self, t: int) -> tuple[np.ndarray, float]:
        w = _step_rng(self.seed, t).uniform(-1, 1, self.dim)
        y = 1.0 if float(np.dot(self._hidden, w)) >= 0 else 0.0
        return w, y

    def _raw_loss_and_grad(self, x, t):
        w, y = self.sample(t)
        z = float(np.dot(w, x))
        loss = float(np.logaddexp(0.0, z) - y * z)
        grad = (float(_sigmoid(z)) - y) * w
        return loss, grad

    def loss_and_grad(self, x, t):
        _check_feasible(self.feasible, x)
        return self._raw_loss_and_grad(x, t)

    def _smoothness(self):
        return 0.25 * self.dim  # sigmoid' <= 1/4, ||w||^2 <= dim

    def gradient_bound(self):
        if not isinstance(self.feasible, fz.Box):
            raise UnsupportedError("gradient bound requires a box feasible set")
        return 1.0  # |sigmoid - y| <= 1, features in [-1, 1]

    def eval_batch(self, size: int = 200) -> LabeledBatch:
        rows = [self.sample(2 * 10**9 + i) for i in range(size)]
        return LabeledBatch(
            inputs=np.array([r[0] for r in rows]),
            labels=np.array([r[1] for r in rows]),
        )

    def predict(self, x, inputs):
        return _sigmoid(inputs @ x)

    def accuracy(self, x):
        batch = self.eval_batch()
        return accuracy(self, x, batch)


class SoftmaxLinear(_PgdComparatorMixin, Problem):
    """Cross entropy of a K-class linear model; parameters are the flattened
    K x d weight matrix.  Losses use exact log-sum-exp evaluation."""

    convex = True

    def __init__(self, k: int, feature_dim: int, feasible_set: fz.FeasibleSet,
                 seed: int = 0):
        self.k = int(k)
        self.feature_dim = int(feature_dim)
        self.dim = self.k * self.feature_dim
        self.feasible = feasible_set
        self.seed = int(seed)
        self._hidden = np.random.default_rng([seed, 10**9]).uniform(
            -1, 1, (self.k, self.feature_dim)
        )

    def sample(self, t: int) -> tuple[np.ndarray, int]:
        phi = _step_rng(self.seed, t).uniform(-1, 1, self.feature_dim)
        label = int(np.argmax(self._hidden @ phi))
        return phi, label

    def _raw_loss_and_grad(self, x, t):
        phi, label = self.sample(t)
        W = x.reshape(self.k, self.feature_dim)
        scores = W @ phi
        zmax = float(np.max(scores))
        lse = zmax + math.log(float(np.sum(np.exp(scores - zmax))))
        loss = lse - float(scores[label])
        p = np.exp(scores - lse)
        p_minus_y = p.copy()
        p_minus_y[label] -= 1.0
        return loss, np.outer(p_minus_y, phi).ravel()

    def loss_and_grad(self, x, t):
        _check_feasible(self.feasible, x)
        return self._raw_loss_and_grad(x, t)

    def _smoothness(self):
        return 0.5 * self.feature_dim  # softmax Hessian norm <= 1/2

    def gradient_bound(self):
        if not isinstance(self.feasible, fz.Box):
            raise UnsupportedError("gradient bound requires a box feasible set")
        return 1.0  # |p_k - y_k| <= 1, features in [-1, 1]

    def eval_batch(self, size: int = 200) -> LabeledBatch:
        rows = [self.sample(2 * 10**9 + i) for i in range(size)]
        onehot = np.zeros((size, self.k))
        for i, (_, label) in enumerate(rows):
            onehot[i, label] = 1.0
        return LabeledBatch(
            inputs=np.array([r[0] for r in rows]), labels=onehot
        )

    def predict(self, x, inputs):
        scores = inputs @ x.reshape(self.k, self.feature_dim).T
        e = np.exp(scores - scores.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)

    def accuracy(self, x):
        batch = self.eval_batch()
        return accuracy(self, x, batch)


class TinyMLP(Problem):
    """One-hidden-layer network (affine -> tanh -> affine -> sigmoid) trained
    with BCE on a margin-separated two-Gaussian binary dataset.

    Parameters are packed as [W1 (H x d), b1 (H), w2 (H), b2].  Gradients are
    manual backpropagation.  One training point is visited per step, drawn
    deterministically from (seed, t).
    """

    convex = False

    def __init__(self, feature_dim: int = 2, hidden: int = 16,
                 feasible_set: fz.FeasibleSet | None = None, seed: int = 0,
                 n_train: int = 1000, margin: float = 1.0,
                 center_dist: float = 1.5):
        self.feature_dim = int(feature_dim)
        self.hidden = int(hidden)
        if self.hidden < 1:
            raise InputError("hidden width must be >= 1")
        self.dim = self.hidden * self.feature_dim + 2 * self.hidden + 1
        self.feasible = feasible_set if feasible_set is not None else fz.FullSpace()
        self.seed = int(seed)
        self.n_train = int(n_train)
        self._make_dataset(margin, center_dist)

    def _make_dataset(self, margin, center_dist):
        rng = np.random.default_rng([self.seed, 10**9 + 1])
        u = np.ones(self.feature_dim) / math.sqrt(self.feature_dim)
        center = center_dist * u
        half = margin / 2.0
        xs, ys = [], []
        for i in range(self.n_train):
            label = float(i % 2)
            sign = 1.0 if label == 1.0 else -1.0
            while True:
                p = rng.normal(sign * center, 1.0, self.feature_dim)
                if sign * float(np.dot(u, p)) >= half:
                    break
            xs.append(p)
            ys.append(label)
        self.train_inputs = np.array(xs)
        self.train_labels = np.array(ys)

    def _unpack(self, x):
        h, d = self.hidden, self.feature_dim
        W1 = x[: h * d].reshape(h, d)
        b1 = x[h * d : h * d + h]
        w2 = x[h * d + h : h * d + 2 * h]
        b2 = x[-1]
        return W1, b1, w2, b2

    def loss_and_grad(self, x, t):
        _check_feasible(self.feasible, x)
        idx = int(_step_rng(self.seed, t).integers(self.n_train))
        p = self.train_inputs[idx]
        y = self.train_labels[idx]
        W1, b1, w2, b2 = self._unpack(x)

        pre = W1 @ p + b1
        h = np.tanh(pre)
        z = float(np.dot(w2, h) + b2)
        loss = float(np.logaddexp(0.0, z) - y * z)

        dz = float(_sigmoid(z)) - y
        dw2 = dz * h
        db2 = dz
        dpre = dz * w2 * (1.0 - h * h)
        dW1 = np.outer(dpre, p)
        db1 = dpre
        grad = np.concatenate([dW1.ravel(), db1, dw2, [db2]])
        return loss, grad

    def predict(self, x, inputs):
        W1, b1, w2, b2 = self._unpack(x)
        h = np.tanh(inputs @ W1.T + b1)
        return _sigmoid(h @ w2 + b2)

    def train_batch(self) -> LabeledBatch:
        return LabeledBatch(inputs=self.train_inputs, labels=self.train_labels)

    def accuracy(self, x):
        return accuracy(self, x, self.train_batch())

    def init_point(self, scale: float = 0.5) -> np.ndarray:
        """Random small-weight initial parameter vector, seeded."""
        return np.random.default_rng([self.seed, 10**9 + 2]).normal(
            0.0, scale, self.dim
        )


def accuracy(inst: Problem, x, batch: LabeledBatch) -> float:
    """Fraction of batch items whose prediction matches the label.

    Binary labels use a 0.5 threshold; one-hot rows use argmax.
    """
    preds = inst.predict(np.asarray(x, dtype=np.float64), batch.inputs)
    labels = batch.labels
    if labels.ndim == 1:
        hits = (preds >= 0.5) == (labels == 1.0)
    else:
        hits = np.argmax(preds, axis=1) == np.argmax(labels, axis=1)
    return float(np.mean(hits))


def finite_difference_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite differences; the independent oracle for gradient checks."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return grad
