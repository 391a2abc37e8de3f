import json
import math

import numpy as np
import pytest

from clipopt.schedules import (
    RestartPlan,
    d_clipped_sgd_schedule_update,
    decayed_clipping_level,
    epoch_boundary_period,
    restart_count,
    restart_plan_sgd,
    restart_plan_sstm,
    sgd_strongly_convex_params,
    sgd_theorem_params,
    small_batch_restart_params,
    sstm_alpha,
    sstm_batch_policy,
    sstm_theorem_params,
)


# ----------------------------------------------------------------------
# coefficient sequences
# ----------------------------------------------------------------------

def test_alpha_closed_form_first_steps():
    assert sstm_alpha(0, 1.0, 1.0) == (1.0, 1.0)
    alpha2, A2 = sstm_alpha(1, 1.0, 1.0)
    assert (alpha2, A2) == (1.5, 2.5)
    # telescoping: A2 = A1 + alpha2
    assert A2 == sstm_alpha(0, 1.0, 1.0)[1] + alpha2


def test_alpha_recurrence_matches_closed_form():
    a, L = 3.7, 0.25
    A = 0.0
    for k in range(2000):
        alpha, A_cf = sstm_alpha(k, a, L)
        A += alpha
        assert A_cf == pytest.approx(A, rel=1e-12)
        assert A_cf >= a * L * alpha**2 * (1 - 1e-12)


def test_alpha_rejects_bad_inputs():
    with pytest.raises(ValueError):
        sstm_alpha(-1, 1.0, 1.0)
    with pytest.raises(ValueError):
        sstm_alpha(0, 0.0, 1.0)


# ----------------------------------------------------------------------
# accelerated theorem parameters
# ----------------------------------------------------------------------

def test_sstm_theorem_values_n100():
    sched = sstm_theorem_params(L=1.0, sigma2=0.0, R0=1.0, N=100, beta=0.05)
    ln = math.log(4 * 100 / 0.05)
    assert sched.B == pytest.approx(math.sqrt(5) / (8 * ln), rel=1e-12)
    assert sched.B == pytest.approx(0.0311, rel=1e-3)
    assert sched.a == pytest.approx(4.78e4, rel=1e-3)  # the 36(...)^2 branch
    assert sched.batch_at(0) == 1  # sigma = 0


def test_sstm_lambda_alpha_product_is_B():
    sched = sstm_theorem_params(L=2.0, sigma2=4.0, R0=3.0, N=50, beta=0.1)
    for k in (0, 1, 7, 49):
        alpha, _ = sched.alpha(k)
        assert sched.lam_at(k) * alpha == pytest.approx(sched.B, rel=1e-14)


def test_sstm_condition_ln_checked():
    with pytest.raises(ValueError, match=">= 2"):
        sstm_theorem_params(L=1.0, sigma2=0.0, R0=1.0, N=1, beta=0.9)
    with pytest.raises(ValueError):
        sstm_theorem_params(L=1.0, sigma2=0.0, R0=1.0, N=10, beta=1.5)


def test_sstm_batches_nondecreasing_and_match_direct_formula():
    sched = sstm_theorem_params(L=1.0, sigma2=9.0, R0=1.0, N=200, beta=0.05)
    ms = [sched.batch_at(k) for k in range(200)]
    assert all(b >= a for a, b in zip(ms, ms[1:]))
    # independent evaluation of the max expression
    ln = sched.ln_term
    for k in (0, 50, 199):
        alpha = (k + 2) / (2 * sched.a)
        expect = math.ceil(
            max(
                1.0,
                6000 * 9.0 * alpha**2 * 200 * ln / (5 * 1.0),
                10368 * 9.0 * alpha**2 * 200 / (5 * 1.0),
            )
        )
        assert sched.batch_at(k) == expect


def test_sstm_purity_same_inputs_same_outputs():
    a = sstm_theorem_params(L=1.0, sigma2=2.0, R0=1.5, N=64, beta=0.01)
    b = sstm_theorem_params(L=1.0, sigma2=2.0, R0=1.5, N=64, beta=0.01)
    assert a == b
    assert [a.batch_at(k) for k in range(64)] == [b.batch_at(k) for k in range(64)]


def test_medium_batch_policy_formula():
    # the corollary's explicit medium-batch expression, via direct evaluation
    # (N must be large enough that N ln(4N/beta) dominates the theorem bound)
    L, sigma2, R0, N, beta = 1.0, 1.0, 1.0, 10_000, 0.05
    sched = sstm_batch_policy("medium", L, sigma2, R0, N, beta)
    ln = sched.ln_term
    assert sched.a == pytest.approx(N * ln)
    for k in (0, 4999, 9999):
        expect = math.ceil(
            max(
                1.0,
                6000 * sigma2 * (k + 2) ** 2 / (4 * L**2 * N * 5 * R0**2 * ln),
                10368 * sigma2 * (k + 2) ** 2 / (4 * L**2 * 5 * R0**2 * N * ln**2),
            )
        )
        assert sched.batch_at(k) == expect


def test_medium_batch_sigma_zero_all_ones():
    sched = sstm_batch_policy("medium", 1.0, 0.0, 1.0, 1000, 0.05)
    assert {sched.batch_at(k) for k in (0, 10, 999)} == {1}


def test_constant_batch_policy_bounded():
    # with a0 = sigma/(L R0) the batches stay below
    # ceil(6000/(4 C^2) ((N+1)/N)^2) = O(1); direct evaluation over all k
    L, R0, N, beta = 1.0, 1.0, 1000, 0.05
    sigma = 10.0
    sched = sstm_batch_policy("constant", L, sigma**2, R0, N, beta, a0=sigma / (L * R0))
    ms = [sched.batch_at(k) for k in range(N)]
    cap = math.ceil(6000 / (4 * 5) * ((N + 1) / N) ** 2)
    assert max(ms) == ms[-1] == 301  # frozen from direct evaluation
    assert max(ms) <= cap
    assert max(ms) <= 512  # O(1) contract at desk scale


def test_combined_policy_keeps_batches_constant():
    L, R0, N, beta = 1.0, 1.0, 500, 0.05
    sigma2 = 25.0
    sched = sstm_batch_policy("combined", L, sigma2, R0, N, beta)
    assert sched.a >= sstm_theorem_params(L, sigma2, R0, N, beta).a
    ms = [sched.batch_at(k) for k in range(N)]
    assert max(ms) <= math.ceil(6000 / (4 * 5) * ((N + 1) / N) ** 2) + 1


def test_policy_fallback_when_dominance_fails():
    # tiny N: N ln(4N/beta) < theorem lower bound -> fall back with a note
    sched = sstm_batch_policy("medium", 1.0, 1.0, 1.0, 10, 0.05)
    base = sstm_theorem_params(1.0, 1.0, 1.0, 10, 0.05)
    assert sched.a == base.a
    assert sched.policy.endswith("->theorem")
    assert sched.notes


def test_unknown_policy_rejected():
    with pytest.raises(ValueError):
        sstm_batch_policy("adaptive", 1.0, 1.0, 1.0, 100, 0.05)


# ----------------------------------------------------------------------
# SGD parameters
# ----------------------------------------------------------------------

def test_sgd_theorem_values_match_hand_computation():
    sched = sgd_theorem_params(L=1.0, sigma2=0.0, R0=1.0, N=100, beta=0.05)
    ln = math.log(8000)
    assert sched.lam == pytest.approx(2 * math.sqrt(2), rel=1e-12)
    assert sched.gamma == pytest.approx(1 / (80 * ln), rel=1e-12)
    assert sched.gamma == pytest.approx(1.391e-3, rel=1e-3)
    assert sched.m == 1
    noisy = sgd_theorem_params(L=1.0, sigma2=1.0, R0=1.0, N=100, beta=0.05)
    assert noisy.m == 76  # ceil(27 N sigma^2 / (2 (C R0)^2 L^2 ln)) = ceil(75.11)
    assert noisy.output == "average"


def test_sgd_strongly_convex_schedule_shapes():
    N = 50
    sched = sgd_strongly_convex_params(L=1.0, mu=1.0, sigma2=0.0, r0=2.0, N=N, beta=0.05)
    ln = math.log(4 * N / 0.05)
    assert sched.gamma == pytest.approx(1 / (81 * ln), rel=1e-12)
    assert sched.lam_at(0) == pytest.approx(4 * math.sqrt(2.0), rel=1e-12)
    q = math.sqrt(1 - sched.gamma)
    for l in (0, 5, 20):
        assert sched.lam_at(l + 1) / sched.lam_at(l) == pytest.approx(q, rel=1e-12)
    assert all(sched.batch_at(k) == 1 for k in range(N))  # sigma = 0
    noisy = sgd_strongly_convex_params(L=1.0, mu=1.0, sigma2=30.0, r0=2.0, N=N, beta=0.05)
    ms = [noisy.batch_at(k) for k in range(N)]
    assert all(b >= a for a, b in zip(ms, ms[1:]))
    expect0 = math.ceil(max(1.0, 27 * N * 30.0 / (16 * 1.0 * 2.0 * ln)))
    assert ms[0] == expect0


def test_sgd_strongly_convex_requires_mu():
    with pytest.raises(ValueError):
        sgd_strongly_convex_params(L=1.0, mu=0.0, sigma2=1.0, r0=1.0, N=10, beta=0.05)


def test_d_clipped_update_rules():
    assert d_clipped_sgd_schedule_update(100.0, 5, 5, 0.9) == pytest.approx(90.0)
    assert d_clipped_sgd_schedule_update(100.0, 4, 5, 0.9) == 100.0
    assert d_clipped_sgd_schedule_update(100.0, 0, 5, 0.9) == 100.0
    # three boundaries: 100 * 0.9^3 = 72.9
    assert decayed_clipping_level(100.0, 15, 5, 0.9) == pytest.approx(72.9, rel=1e-12)
    with pytest.raises(ValueError):
        d_clipped_sgd_schedule_update(1.0, 1, 1, 1.5)


def test_epoch_boundary_period():
    # heart-style config: r = 270, l epochs, m = 20 -> ceil(270 l / 20)
    assert epoch_boundary_period(270, 1, 20) == 14
    assert epoch_boundary_period(270, 1000, 20) == 13500
    with pytest.raises(ValueError):
        epoch_boundary_period(270, 0, 20)


# ----------------------------------------------------------------------
# restart plans
# ----------------------------------------------------------------------

def test_restart_count_examples():
    assert restart_count(1.0, 1.0, 0.01) == 6  # ceil(log2 50)
    assert restart_count(1.0, 4.0, 1.0) == 3  # mu R^2 / (2 eps) = 8
    assert restart_count(1.0, 1.0, 10.0) == 0


def test_restart_plan_sstm_structure():
    plan = restart_plan_sstm(L=1.0, mu=1.0, sigma2=4.0, r0=8.0, epsilon=0.5, beta=0.1)
    assert plan.R == pytest.approx(4.0)
    assert plan.tau == restart_count(1.0, 4.0, 0.5)
    assert plan.ln_term == pytest.approx(math.log(4 * plan.N0 * plan.tau / 0.1), rel=1e-12)
    assert plan.N0 >= plan.C * math.sqrt(8 * plan.a)
    # B_t halves exactly: B_t * 2^t constant
    for t in range(plan.tau - 1):
        assert plan.B_t(t + 1) / plan.B_t(t) == pytest.approx(0.5, rel=1e-14)
        assert plan.B_t(t) * 2**t == pytest.approx(plan.B_t(0), rel=1e-14)
    assert plan.B_t(0) == pytest.approx(plan.C * plan.R / (8 * plan.ln_term), rel=1e-14)
    # batches double in t when the variance branch binds
    s0 = plan.stage_schedule(0)
    s1 = plan.stage_schedule(1)
    k_last = plan.N0 - 1
    if s0.batch_at(k_last) > 1:
        assert s1.batch_at(k_last) / s0.batch_at(k_last) == pytest.approx(2.0, rel=2e-2)
        assert s1.batch_at(k_last) / 2 == pytest.approx(s0.batch_at(k_last), rel=2e-2)


def test_restart_plan_sgd_structure():
    plan = restart_plan_sgd(L=1.0, mu=1.0, sigma2=1.0, r0=32.0, epsilon=4.0, beta=0.1)
    assert plan.tau == 3
    assert plan.N0 >= 320 * 2 * plan.ln_term * (1 - 1e-12)
    assert plan.gamma == pytest.approx(1 / (80 * plan.ln_term), rel=1e-12)
    # m^t doubles when the non-unit branch binds
    ms = [plan.m_t(t) for t in range(plan.tau)]
    if ms[0] > 1:
        assert ms[1] / ms[0] == pytest.approx(2.0, rel=2e-2)
    # inner clip level shrinks by sqrt(2) per stage
    assert plan.lam_t(1) / plan.lam_t(0) == pytest.approx(2 ** -0.5, rel=1e-14)
    assert plan.lam_t(0) == pytest.approx(2 * 1.0 * plan.C * plan.R, rel=1e-14)


def test_restart_plan_sgd_fixed_point_example():
    # L/mu = 10, C^2 = 2: N0 >= 6400 ln(4 N0 tau / beta), solved to a fixed
    # point; verify by direct substitution (independent oracle)
    plan = restart_plan_sgd(L=10.0, mu=1.0, sigma2=0.0, r0=8.0, epsilon=1.0, beta=0.1)
    lhs = plan.N0
    rhs = 320 * plan.C**2 * 10.0 * math.log(4 * plan.N0 * plan.tau / 0.1)
    assert lhs >= rhs * (1 - 1e-12)
    assert lhs <= rhs + 1.0  # ceil of the fixed point


def test_restart_plan_sigma_zero_unit_batches():
    plan = restart_plan_sgd(L=1.0, mu=1.0, sigma2=0.0, r0=8.0, epsilon=1.0, beta=0.1)
    assert all(plan.m_t(t) == 1 for t in range(plan.tau))
    plan2 = restart_plan_sstm(L=1.0, mu=1.0, sigma2=0.0, r0=8.0, epsilon=1.0, beta=0.1)
    sched = plan2.stage_schedule(plan2.tau - 1)
    assert sched.batch_at(plan2.N0 - 1) == 1


def test_restart_plan_tau_zero():
    plan = restart_plan_sstm(L=1.0, mu=1.0, sigma2=1.0, r0=0.5, epsilon=1.0, beta=0.1)
    assert plan.tau == 0


def test_restart_plan_rejects_bad_args():
    with pytest.raises(ValueError):
        restart_plan_sstm(L=1.0, mu=0.0, sigma2=1.0, r0=1.0, epsilon=0.1, beta=0.1)
    with pytest.raises(ValueError):
        restart_plan_sgd(L=1.0, mu=1.0, sigma2=1.0, r0=-1.0, epsilon=0.1, beta=0.1)
    plan = restart_plan_sstm(L=1.0, mu=1.0, sigma2=1.0, r0=8.0, epsilon=1.0, beta=0.1)
    with pytest.raises(ValueError):
        plan.stage_schedule(plan.tau)


# ----------------------------------------------------------------------
# small-batch restart corollary
# ----------------------------------------------------------------------

def test_small_batch_params_keep_batches_constant():
    # direct evaluation of every m_k^t from the fixed point; with unit
    # proportionality constants the bound is epsilon-independent
    plan = small_batch_restart_params(L=1.0, mu=0.1, sigma2=1.0, epsilon=0.01,
                                      beta=0.05, R=1.0)
    m_max = max(
        plan.stage_schedule(t).batch_at(k)
        for t in range(plan.tau)
        for k in (0, plan.N0 // 2, plan.N0 - 1)
    )
    assert m_max <= 200  # O(1): frozen envelope from direct evaluation (~133)
    plan_finer = small_batch_restart_params(L=1.0, mu=0.1, sigma2=1.0, epsilon=0.001,
                                            beta=0.05, R=1.0)
    m_max_finer = max(
        plan_finer.stage_schedule(t).batch_at(k)
        for t in range(plan_finer.tau)
        for k in (0, plan_finer.N0 // 2, plan_finer.N0 - 1)
    )
    assert m_max_finer <= 200  # stays bounded as epsilon shrinks 10x


def test_small_batch_n0_grows_as_epsilon_shrinks():
    coarse = small_batch_restart_params(1.0, 0.1, 1.0, 0.01, 0.05, R=1.0)
    fine = small_batch_restart_params(1.0, 0.1, 1.0, 0.001, 0.05, R=1.0)
    assert fine.N0 > coarse.N0


def test_small_batch_sigma_zero_falls_back():
    plan = small_batch_restart_params(1.0, 0.5, 0.0, 0.01, 0.05, R=2.0)
    assert "sigma = 0" in plan.provenance
    if plan.tau:
        assert plan.stage_schedule(0).batch_at(0) == 1


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def test_schedules_serialize_to_json():
    sched = sstm_theorem_params(L=1.0, sigma2=2.0, R0=1.0, N=32, beta=0.05)
    blob = json.dumps(sched.to_dict())
    d = json.loads(blob)
    assert d["kind"] == "sstm"
    assert d["a"] == sched.a
    assert d["B"] == sched.B
    plan = restart_plan_sgd(1.0, 1.0, 1.0, 8.0, 1.0, 0.1)
    d = json.loads(json.dumps(plan.to_dict()))
    assert d["kind"] == "restart-plan"
    assert len(d["stages"]) == plan.tau
    assert d["stages"][1]["m_t"] == plan.m_t(1)
