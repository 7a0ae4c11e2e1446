"""Configuration-driven experiment runner: runs, traces, theory reports, files.

A run executes T optimizer steps on a problem, records one CSV row per step
(schema: t,alpha_t,loss,cum_loss,regret,accuracy,gamma,dnorm,wall_clock_ns),
and writes a JSON summary.  When theory checks are enabled the run is fully
instrumented and the regret-bound report is attached to the summary; a run
with any failed check is marked failed (the CLI turns that into a nonzero
exit code).

Epochs map onto the online setting as one pass of 1000 steps.  Accuracy is
evaluated at epoch boundaries and carried forward between them (a full-batch
forward pass per step would dominate the runtime).
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from . import feasible as fz
from . import problems as pb
from . import theory as th
from .cg import GammaKind
from .optim import (
    OPTIMIZER_NAMES,
    ConstantBeta1,
    ConstantStep,
    DiminishingSqrtStep,
    GeometricDecayBeta1,
    HyperParams,
    make_optimizer,
)

EPOCH_STEPS = 1000

CSV_HEADER = "t,alpha_t,loss,cum_loss,regret,accuracy,gamma,dnorm,wall_clock_ns"

#: environment variable overriding the output root directory
OUT_ENV_VAR = "COBA_BENCH_OUT"


class ConfigError(ValueError):
    """The run configuration is inconsistent or names unknown components."""


@dataclass(frozen=True)
class RunConfig:
    problem: str = "quadratic"       # quadratic | logistic | softmax | mlp
    optimizer: str = "coba-hs"
    T: int = 1000
    epochs: int | None = None        # overrides T as epochs * 1000 when set
    seed: int = 0
    dim: int = 10
    k: int = 3                       # softmax class count
    hidden: int = 16                 # mlp hidden width
    alpha: float = 1e-3
    schedule: str = "constant"       # constant | sqrt
    beta1: float = 0.9
    beta1_decay: float = 1.0
    beta2: float = 0.999
    eps: float = 1e-8
    M: float = 1e-4
    a: float = 1.0 + 1e-5
    hz_lambda: float = 2.0
    rho: float = 0.99
    feasible: str = "box"            # box | full | ball
    box_bound: float = 10.0
    center_scale: float = 1.0        # quadratic center spread
    ball_radius: float = 10.0
    theory_checks: bool = False
    accuracy_every: int = EPOCH_STEPS
    out_dir: str | None = None

    @property
    def steps(self) -> int:
        if self.epochs is not None:
            return int(self.epochs) * EPOCH_STEPS
        return int(self.T)


@dataclass
class RunRecord:
    """Per-step rows plus a summary; rows is a (T, 9) float64 array in the
    CSV column order (t and wall_clock_ns stored as exact integers)."""

    rows: np.ndarray
    summary: dict = field(default_factory=dict)
    trace: th.TheoryTrace | None = None


def build_hyper(cfg: RunConfig) -> HyperParams:
    if cfg.schedule == "constant":
        step = ConstantStep(cfg.alpha)
    elif cfg.schedule == "sqrt":
        step = DiminishingSqrtStep(cfg.alpha)
    else:
        raise ConfigError(f"unknown step schedule {cfg.schedule!r}")
    if cfg.beta1_decay == 1.0:
        beta1 = ConstantBeta1(cfg.beta1)
    else:
        beta1 = GeometricDecayBeta1(cfg.beta1, cfg.beta1_decay)
    kind = "hs"
    if cfg.optimizer.startswith("coba-"):
        kind = cfg.optimizer.split("-", 1)[1]
        if kind not in ("hs", "fr", "prp", "dy", "hz"):
            raise ConfigError(f"unknown optimizer {cfg.optimizer!r}")
    return HyperParams(
        step=step,
        beta1=beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        M=cfg.M,
        a=cfg.a,
        gamma_kind=GammaKind(kind, cfg.hz_lambda),
        rho=cfg.rho,
    )


def build_feasible(cfg: RunConfig, dim: int) -> fz.FeasibleSet:
    if cfg.feasible == "box":
        return fz.symmetric_box(dim, cfg.box_bound)
    if cfg.feasible == "full":
        return fz.FullSpace()
    if cfg.feasible == "ball":
        return fz.Ball(np.zeros(dim), cfg.ball_radius)
    raise ConfigError(f"unknown feasible set {cfg.feasible!r}")


def build_problem(cfg: RunConfig) -> pb.Problem:
    if cfg.problem == "quadratic":
        fset = build_feasible(cfg, cfg.dim)
        return pb.StochasticQuadratic(
            np.ones(cfg.dim), fset, seed=cfg.seed, center_scale=cfg.center_scale
        )
    if cfg.problem == "logistic":
        fset = build_feasible(cfg, cfg.dim)
        return pb.OnlineLogistic(cfg.dim, fset, seed=cfg.seed)
    if cfg.problem == "softmax":
        n = cfg.k * cfg.dim
        fset = build_feasible(cfg, n)
        return pb.SoftmaxLinear(cfg.k, cfg.dim, fset, seed=cfg.seed)
    if cfg.problem == "mlp":
        inst = pb.TinyMLP(feature_dim=cfg.dim if cfg.dim <= 8 else 2,
                          hidden=cfg.hidden, seed=cfg.seed)
        if cfg.feasible == "box":
            inst.feasible = fz.symmetric_box(inst.dim, cfg.box_bound)
        return inst
    raise ConfigError(f"unknown problem {cfg.problem!r}")


def initial_point(inst: pb.Problem) -> np.ndarray:
    if isinstance(inst, pb.TinyMLP):
        x0 = inst.init_point()
        return fz.project(inst.feasible, np.ones(inst.dim), x0)
    return np.zeros(inst.dim)


def run(cfg: RunConfig, clock=time.perf_counter_ns) -> RunRecord:
    """Execute one configured run and return its record.

    ``clock`` is injectable so determinism tests can compare full byte
    identity; with the real clock only the wall_clock_ns column varies
    between repeated runs.
    """
    if cfg.optimizer not in OPTIMIZER_NAMES:
        raise ConfigError(f"unknown optimizer {cfg.optimizer!r}")
    inst = build_problem(cfg)
    hyper = build_hyper(cfg)
    T = cfg.steps
    if T < 1:
        raise ConfigError("step count must be >= 1")

    theory_on = cfg.theory_checks
    if theory_on:
        if not inst.convex:
            raise ConfigError("theory checks require a convex problem")
        if not cfg.optimizer.startswith("coba-") and cfg.optimizer != "amsgrad":
            raise ConfigError(
                "theory checks apply to amsgrad and coba optimizers only"
            )
        if not math.isfinite(fz.diameter_inf(inst.feasible)):
            raise ConfigError("theory checks require a bounded feasible set")

    opt = make_optimizer(cfg.optimizer, hyper, initial_point(inst), inst.feasible)

    x_star = None
    if inst.convex:
        x_star = inst.comparator(T)

    has_accuracy = not isinstance(inst, pb.StochasticQuadratic)

    rows = np.empty((T, 9), dtype=np.float64)
    cum_loss = 0.0
    cum_regret = 0.0
    acc = math.nan
    grad_inf_max = 0.0

    trace_gammas = np.empty(T) if theory_on else None
    trace_dirs = np.empty((T, inst.dim)) if theory_on else None
    trace_m = np.empty((T, inst.dim)) if theory_on else None
    trace_vhat = np.empty((T, inst.dim)) if theory_on else None
    trace_alphas = np.empty(T) if theory_on else None
    trace_beta1s = np.empty(T) if theory_on else None
    trace_fx = np.empty(T) if theory_on else None
    trace_fstar = np.empty(T) if theory_on else None

    t_start = clock()
    for t in range(1, T + 1):
        x = opt.state.x
        loss, g = inst.loss_and_grad(x, t)
        grad_inf_max = max(grad_inf_max, float(np.max(np.abs(g))) if g.size else 0.0)
        if x_star is not None:
            loss_star, _ = inst.loss_and_grad(x_star, t)
            cum_regret += loss - loss_star
        else:
            loss_star = math.nan
        opt.step(g)
        cum_loss += loss
        alpha_t = hyper.step.value(t)
        if has_accuracy and (t % cfg.accuracy_every == 0 or t == T):
            acc = inst.accuracy(opt.state.x)
        reg = cum_regret if x_star is not None else math.nan
        rows[t - 1] = (
            t,
            alpha_t,
            loss,
            cum_loss,
            reg,
            acc,
            opt.last_gamma,
            float(np.linalg.norm(opt.last_direction)),
            clock() - t_start,
        )
        if theory_on:
            trace_gammas[t - 1] = opt.last_gamma
            trace_dirs[t - 1] = opt.last_direction
            trace_m[t - 1] = opt.state.m
            trace_vhat[t - 1] = opt.state.v_hat
            trace_alphas[t - 1] = alpha_t
            trace_beta1s[t - 1] = hyper.beta1.value(t)
            trace_fx[t - 1] = loss
            trace_fstar[t - 1] = loss_star

    summary = {
        "code_version": __version__,
        "optimizer": cfg.optimizer,
        "config": dataclasses.asdict(cfg),
        "steps": T,
        "final_loss": float(rows[-1, 2]),
        "mean_loss": cum_loss / T,
        "final_accuracy": None if math.isnan(acc) else acc,
        "final_regret": None if x_star is None else cum_regret,
        "observed_grad_inf_max": grad_inf_max,
    }

    trace = None
    if theory_on:
        trace = th.TheoryTrace(
            gammas=trace_gammas,
            directions=trace_dirs,
            moments=trace_m,
            v_hats=trace_vhat,
            alphas=trace_alphas,
            beta1s=trace_beta1s,
            loss_x=trace_fx,
            loss_star=trace_fstar,
            hyper=hyper,
        )
        g_inf = inst.gradient_bound()
        g_l2 = math.sqrt(inst.dim) * g_inf  # l2-compatible gradient bound
        t0 = th.compute_t0(trace.gammas, hyper.M, hyper.a)
        gbar = th.direction_bound_value(trace, g_l2, t0)
        report = th.theorem1_bound(
            trace, hyper, fz.diameter_inf(inst.feasible), gbar, G_inf=g_inf
        )
        checks = {
            "regret_bound": report.holds,
            "direction_bound": th.check_direction_bound(trace, g_l2, t0),
            "gradient_bound": grad_inf_max <= g_inf + 1e-9,
        }
        for l in (0, 1, 2):
            if l <= T - 2:
                checks[f"moment_sum_l{l}"] = th.check_moment_sum(trace, l)
        summary["bound_report"] = report.to_dict()
        summary["theory_checks"] = checks
        summary["theory_ok"] = all(checks.values())

    record = RunRecord(rows=rows, summary=summary, trace=trace)
    if cfg.out_dir is not None:
        write_outputs(record, cfg)
    return record


def output_root(cfg: RunConfig) -> str:
    root = os.environ.get(OUT_ENV_VAR)
    if root:
        return root
    return cfg.out_dir or "."


def _atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_csv(record: RunRecord) -> str:
    lines = [CSV_HEADER]
    for row in record.rows:
        lines.append(
            ",".join(
                [
                    str(int(row[0])),
                    _fmt(row[1]),
                    _fmt(row[2]),
                    _fmt(row[3]),
                    _fmt(row[4]),
                    _fmt(row[5]),
                    _fmt(row[6]),
                    _fmt(row[7]),
                    str(int(row[8])),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> RunRecord:
    lines = [ln for ln in text.strip().split("\n") if ln]
    if lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = np.array(
        [[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=np.float64
    )
    return RunRecord(rows=rows)


def records_equal(a: RunRecord, b: RunRecord) -> bool:
    """Exact numeric-field equality, treating NaN as equal to NaN."""
    if a.rows.shape != b.rows.shape:
        return False
    ar, br = a.rows, b.rows
    both_nan = np.isnan(ar) & np.isnan(br)
    return bool(np.all((ar == br) | both_nan))


def run_name(cfg: RunConfig) -> str:
    return f"{cfg.problem}_{cfg.optimizer}_T{cfg.steps}_seed{cfg.seed}"


def write_outputs(record: RunRecord, cfg: RunConfig) -> dict:
    """Write the per-run CSV and JSON summary atomically; return the paths."""
    root = output_root(cfg)
    base = os.path.join(root, run_name(cfg))
    csv_path = base + ".csv"
    json_path = base + ".json"
    _atomic_write(csv_path, emit_csv(record))
    _atomic_write(json_path, json.dumps(record.summary, indent=2) + "\n")
    record.summary["csv_path"] = csv_path
    record.summary["json_path"] = json_path
    return {"csv": csv_path, "json": json_path}


def _grid_cell(args):
    base, m_val, a_val = args
    cfg = replace(base, M=m_val, a=a_val)
    rec = run(cfg)
    # final training loss = mean loss over the last epoch (stable under
    # per-step stochasticity)
    tail = rec.rows[-min(len(rec.rows), EPOCH_STEPS):, 2]
    return {"M": m_val, "a": a_val, "final_loss": float(np.mean(tail))}


def grid_search(base: RunConfig, M_grid, a_grid, jobs: int = 1):
    """Cross-product sweep over (M, a); returns (best_config, table).

    The cell with minimal final training loss wins; ties break toward
    smaller M, then smaller a.
    """
    M_grid = list(M_grid)
    a_grid = list(a_grid)
    if not M_grid or not a_grid:
        raise ConfigError("grids must be nonempty")
    cells = [(base, m, a) for m in M_grid for a in a_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            table = list(ex.map(_grid_cell, cells))
    else:
        table = [_grid_cell(c) for c in cells]
    best = min(table, key=lambda r: (r["final_loss"], r["M"], r["a"]))
    return replace(base, M=best["M"], a=best["a"]), table
