import math

import numpy as np
import pytest

from coba.bench import RunConfig, run
from coba.cg import GammaKind
from coba.optim import (
    AMSGrad,
    ConstantBeta1,
    ConstantStep,
    DiminishingSqrtStep,
    HyperParams,
)
from coba.feasible import symmetric_box
from coba.theory import (
    PreconditionError,
    TheoryTrace,
    check_direction_bound,
    check_moment_sum,
    compute_t0,
    direction_bound_value,
    regret,
    theorem1_bound,
)
from coba.vecmath import InputError


def sqrt_hyper(**kw):
    defaults = dict(
        step=DiminishingSqrtStep(0.1),
        beta1=ConstantBeta1(0.9),
        beta2=0.999,
        eps=1e-8,
        M=1e-4,
        a=1 + 1e-5,
    )
    defaults.update(kw)
    return HyperParams(**defaults)


def amsgrad_trace(T=10, N=3, seed=0, hyper=None):
    """Instrumented AMSGrad run on a random gradient stream (losses zeroed)."""
    h = hyper or sqrt_hyper()
    opt = AMSGrad(h, np.zeros(N), symmetric_box(N))
    rng = np.random.default_rng(seed)
    dirs, moms, vhats, alphas, beta1s = [], [], [], [], []
    for t in range(1, T + 1):
        g = rng.normal(size=N)
        opt.step(g)
        dirs.append(g)
        moms.append(opt.state.m.copy())
        vhats.append(opt.state.v_hat.copy())
        alphas.append(h.step.value(t))
        beta1s.append(h.beta1.value(t))
    return TheoryTrace(
        gammas=np.zeros(T),
        directions=np.array(dirs),
        moments=np.array(moms),
        v_hats=np.array(vhats),
        alphas=np.array(alphas),
        beta1s=np.array(beta1s),
        loss_x=np.zeros(T),
        loss_star=np.zeros(T),
        hyper=h,
    )


def simple_trace(loss_x, loss_star):
    T = len(loss_x)
    h = sqrt_hyper()
    t_idx = np.arange(1, T + 1)
    return TheoryTrace(
        gammas=np.zeros(T),
        directions=np.zeros((T, 1)),
        moments=np.zeros((T, 1)),
        v_hats=np.zeros((T, 1)),
        alphas=h.step.alpha / np.sqrt(t_idx),
        beta1s=np.full(T, 0.9),
        loss_x=np.asarray(loss_x, dtype=float),
        loss_star=np.asarray(loss_star, dtype=float),
        hyper=h,
    )


class TestRegret:
    def test_optimal_play(self):
        assert regret(simple_trace([1.0, 2.0], [1.0, 2.0])) == 0.0

    def test_exact_sum(self):
        assert regret(simple_trace([1.0, 0.5], [0.5, 0.25])) == 0.75

    def test_convex_run_nonnegative(self):
        rec = run(
            RunConfig(
                problem="quadratic", optimizer="amsgrad", T=300, seed=2,
                schedule="sqrt", alpha=0.1, theory_checks=True,
            )
        )
        assert rec.summary["final_regret"] >= -1e-9


class TestComputeT0:
    def test_default_hyperparameters(self):
        assert compute_t0([2.0, -1.0], M=1e-4, a=1 + 1e-5) == 1

    def test_brute_force_case(self):
        # 10/4^2 = 0.625 > 1/2 but 10/5^2 = 0.4 <= 1/2
        assert compute_t0([1.0, -1.0, 0.5], M=10.0, a=2.0) == 5

    def test_zero_gammas(self):
        assert compute_t0([0.0, 0.0], M=100.0, a=2.0) == 1

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            compute_t0([], M=1.0, a=2.0)

    def test_matches_scan(self):
        for M, a, gam in [(3.0, 1.5, 2.0), (50.0, 2.0, 0.7), (1e3, 1.1, 1.0)]:
            got = compute_t0([gam], M, a)
            t = 1
            while (M / t**a) * gam > 0.5:
                t += 1
            assert got == t


class TestDirectionBound:
    def test_gradient_only_run(self):
        trace = amsgrad_trace(T=50, N=4)
        g_l2 = float(np.max(np.linalg.norm(trace.directions, axis=1)))
        assert check_direction_bound(trace, g_l2, t0=1)

    def test_coba_default_run(self):
        rec = run(
            RunConfig(
                problem="quadratic", optimizer="coba-hz", T=500, seed=0,
                schedule="sqrt", alpha=0.1, theory_checks=True,
            )
        )
        assert rec.summary["theory_checks"]["direction_bound"]

    def test_adversarial_m_absorbed_by_early_max(self):
        # large M inflates the first few directions past 2G; the bound's
        # early-step max absorbs them by construction
        rec = run(
            RunConfig(
                problem="quadratic", optimizer="coba-fr", T=500, seed=1,
                schedule="sqrt", alpha=0.1, M=10.0, a=2.0, theory_checks=True,
            )
        )
        assert rec.summary["theory_checks"]["direction_bound"]
        assert rec.summary["bound_report"]["t0"] > 1

    def test_bound_value_includes_early_steps(self):
        trace = amsgrad_trace(T=10, N=2)
        trace.directions[0] = [100.0, 0.0]
        val = direction_bound_value(trace, G=1.0, t0=3)
        assert val == 100.0


class TestMomentSum:
    def test_single_step_vacuous(self):
        trace = amsgrad_trace(T=1)
        assert check_moment_sum(trace, 0)

    def test_zero_gradient_stream(self):
        h = sqrt_hyper()
        T = 5
        t_idx = np.arange(1, T + 1)
        trace = TheoryTrace(
            gammas=np.zeros(T),
            directions=np.zeros((T, 2)),
            moments=np.zeros((T, 2)),
            v_hats=np.zeros((T, 2)),
            alphas=h.step.alpha / np.sqrt(t_idx),
            beta1s=np.full(T, 0.9),
            loss_x=np.zeros(T),
            loss_star=np.zeros(T),
            hyper=h,
        )
        for l in (0, 1, 2):
            assert check_moment_sum(trace, l)

    @pytest.mark.parametrize("l", [0, 1, 2])
    def test_against_brute_force(self, l):
        trace = amsgrad_trace(T=10, N=3, seed=4)
        h = trace.hyper
        T = trace.T
        # independent summation of both sides
        lhs_terms = []
        for t in range(l + 1, T + 1):
            for i in range(3):
                vh = trace.v_hats[t - 1, i]
                if vh > 0:
                    lhs_terms.append(
                        trace.alphas[t - 1]
                        * trace.moments[t - l - 1, i] ** 2
                        / math.sqrt(vh)
                    )
        lhs = math.fsum(lhs_terms)
        rhs = (
            h.step.alpha
            * math.sqrt(1 + math.log(T))
            / ((1 - 0.9) * (1 - h.mu) * math.sqrt(1 - h.beta2))
            * math.fsum(
                math.sqrt(math.fsum(trace.directions[t, i] ** 2 for t in range(T)))
                for i in range(3)
            )
        )
        assert lhs <= rhs
        assert check_moment_sum(trace, l)

    def test_schedule_precondition(self):
        bad = amsgrad_trace(T=5)
        bad.hyper = HyperParams(step=ConstantStep(0.1), beta1=ConstantBeta1(0.9))
        with pytest.raises(PreconditionError):
            check_moment_sum(bad, 0)


class TestTheorem1Bound:
    def test_hand_computed_single_step(self):
        h = HyperParams(
            step=DiminishingSqrtStep(1.0),
            beta1=ConstantBeta1(0.0),
            beta2=0.5,
            M=1e-4,
            a=2.0,
        )
        trace = TheoryTrace(
            gammas=np.array([0.0]),
            directions=np.array([[1.0]]),
            moments=np.array([[1.0]]),
            v_hats=np.array([[1.0]]),
            alphas=np.array([1.0]),
            beta1s=np.array([0.0]),
            loss_x=np.array([0.0]),
            loss_star=np.array([0.0]),
            hyper=h,
        )
        rep = theorem1_bound(trace, h, D_inf=1.0, Gbar_inf=2.0)
        assert rep.term1 == pytest.approx(1.0, rel=1e-15)
        assert rep.term2 == 0.0
        assert rep.term3 == pytest.approx(math.sqrt(2), rel=1e-12)
        assert rep.term4 == 0.0
        assert rep.total == pytest.approx(2.4142136, abs=1e-6)
        assert rep.holds

    def test_amsgrad_terms_coincide_when_gamma_zero(self):
        trace = amsgrad_trace(T=20, N=2, seed=9)
        rep = theorem1_bound(trace, trace.hyper, D_inf=20.0, Gbar_inf=5.0)
        assert rep.term4 == 0.0
        assert rep.amsgrad_term1 == rep.term1
        assert rep.amsgrad_term2 == rep.term2
        assert rep.amsgrad_term3 == rep.term3

    def test_box_quadratic_run_holds(self):
        rec = run(
            RunConfig(
                problem="quadratic", optimizer="coba-prp", T=1000, seed=0,
                schedule="sqrt", alpha=0.1, theory_checks=True,
            )
        )
        assert rec.summary["bound_report"]["holds"]
        assert rec.summary["theory_ok"]

    def test_unbounded_set_rejected(self):
        trace = amsgrad_trace(T=5)
        with pytest.raises(PreconditionError):
            theorem1_bound(trace, trace.hyper, D_inf=math.inf, Gbar_inf=1.0)

    def test_constant_schedule_rejected(self):
        trace = amsgrad_trace(T=5)
        bad_h = HyperParams(step=ConstantStep(0.1), beta1=ConstantBeta1(0.9))
        trace.hyper = bad_h
        with pytest.raises(PreconditionError):
            theorem1_bound(trace, bad_h, D_inf=1.0, Gbar_inf=1.0)

    def test_mu_ge_one_rejected(self):
        h = sqrt_hyper(beta1=ConstantBeta1(0.99), beta2=0.5)  # mu > 1
        trace = amsgrad_trace(T=5, hyper=h)
        with pytest.raises(PreconditionError):
            theorem1_bound(trace, h, D_inf=1.0, Gbar_inf=1.0)
