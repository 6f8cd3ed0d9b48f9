import math

import pytest
from hypothesis import given, strategies as st

from mcpmix.gradcheck import check_gates
from mcpmix.rla import (GateState, RlaConfig, assemble_loss, fixed_schedule, gate_gradients,
                        gate_step, gate_values, prior_schedules, sigmoid, tau_schedule, total_loss)

CFG = RlaConfig(tau0=0.8, total_epochs=40)


def test_gate_values_at_zero():
    rho, s = gate_values(GateState())
    assert rho == 0.25 and s == 0.35


def test_rho_monotone_to_max():
    vals = [GateState(psi=p).rho for p in (0, 1, 5, 20, 50)]
    assert vals == sorted(vals) and vals[-1] == pytest.approx(0.5)


@given(psi=st.floats(-1e6, 1e6), zeta=st.floats(-1e6, 1e6))
def test_gates_bounded(psi, zeta):
    g = GateState(psi, zeta)
    assert 0.0 <= g.rho <= g.rho_max
    assert 0.0 <= g.s <= g.s_max


def test_sigmoid_stable():
    assert sigmoid(-800) == 0.0 and sigmoid(800) == 1.0 and sigmoid(0) == 0.5


def test_tau_endpoints():
    assert tau_schedule(CFG, 0) == 0.8
    assert tau_schedule(CFG, 20) == pytest.approx(0.4, abs=1e-15)
    assert tau_schedule(CFG, 40) == 0.0
    assert tau_schedule(CFG, 60) == 0.0  # clamped past T


def test_tau_monotone():
    vals = [tau_schedule(CFG, t) for t in range(41)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_tau_uncalibrated():
    with pytest.raises(ValueError):
        tau_schedule(RlaConfig(), 0)


def test_priors():
    assert prior_schedules(CFG, 0) == (0.5, 0.7)
    assert prior_schedules(CFG, 40) == (0.0, 0.0)
    r, s = prior_schedules(CFG, 20)
    assert r == pytest.approx(0.25, abs=1e-15) and s == pytest.approx(0.35, abs=1e-15)


def test_total_matched_priors():
    t = 10
    rp, sp = prior_schedules(CFG, t)
    lb = assemble_loss(0.6, 0.9, 0.0, t, rp, sp, CFG)
    assert lb.total == (1 - rp) * 0.6 + rp * 0.9


def test_hinge_closed_at_equality():
    tau = tau_schedule(CFG, 5)
    lb = assemble_loss(0.5, 0.5, tau, 5, 0.2, 0.3, CFG)
    assert lb.penalty == 0.0


def test_hand_value_135():
    cfg = RlaConfig(tau0=0.5, mu=1.0, total_epochs=10)
    t = 5
    rp, sp = prior_schedules(cfg, t)
    tau = tau_schedule(cfg, t)
    lb = assemble_loss(1.0, 2.0, tau + 0.1, t, 0.25, sp, cfg)
    assert rp == pytest.approx(0.25)
    assert lb.total == pytest.approx(1.35, abs=1e-12)


@given(lr=st.floats(0, 5), lm=st.floats(0, 5), d=st.floats(0, 3), t=st.integers(0, 50),
       psi=st.floats(-5, 5), zeta=st.floats(-5, 5))
def test_breakdown_reconstructs(lr, lm, d, t, psi, zeta):
    g = GateState(psi, zeta)
    lb = total_loss(lr, lm, d, t, g, CFG)
    parts = (1 - lb.rho) * lb.l_real + lb.rho * lb.l_mix + lb.penalty + lb.prior_rho + lb.prior_s
    assert abs(lb.total - parts) <= 1e-12
    if d <= lb.tau:
        assert lb.penalty == 0.0


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        assemble_loss(float("nan"), 0.1, 0.1, 0, 0.1, 0.1, CFG)
    with pytest.raises(ValueError):
        gate_gradients(0.1, 0.1, float("inf"), 0, GateState(), CFG, 0.0, 0.0)


def test_psi_gradient_zero_when_losses_equal():
    # rho = rho_prior needs sigma(psi) = cosine factor; at t=0 psi -> inf, so use t=T/2 (psi=0)
    g = GateState()
    dpsi, _ = gate_gradients(0.7, 0.7, 0.1, 20, g, CFG, 0.3, 0.2)
    assert dpsi == 0.0


def test_zeta_gradient_zero_without_signal():
    g = GateState()  # s = s_prior at t = T/2
    _, dz = gate_gradients(0.7, 0.9, 0.1, 20, g, CFG, 0.0, 0.0)
    assert dz == 0.0


def test_hinge_inactive_ignores_mmd_dot():
    g = GateState(0.3, -0.4)
    a = gate_gradients(0.7, 0.9, 0.1, 5, g, CFG, 0.5, 0.0)
    b = gate_gradients(0.7, 0.9, 0.1, 5, g, CFG, 0.5, 123.0)
    assert a == b
    c = gate_gradients(0.7, 0.9, 5.0, 5, g, CFG, 0.5, 123.0)
    assert c[1] != a[1]


def test_gate_gradient_closed_form():
    g = GateState(0.4, -0.2)
    t = 7
    rp, sp = prior_schedules(CFG, t)
    dpsi, dz = gate_gradients(0.6, 0.8, 2.0, t, g, CFG, 0.3, -0.1)
    sp_psi = sigmoid(0.4) * (1 - sigmoid(0.4))
    sp_z = sigmoid(-0.2) * (1 - sigmoid(-0.2))
    assert dpsi == pytest.approx((0.2 + 2e-3 * (g.rho - rp)) * 0.5 * sp_psi, rel=1e-14)
    assert dz == pytest.approx((g.rho * 0.3 - 0.1 + 2e-3 * (g.s - sp)) * 0.7 * sp_z, rel=1e-14)


def test_gate_step():
    g = GateState()
    assert gate_step(g, (0.0, 0.0), 0.1) == g
    assert gate_step(g, (1.0, 0.0), 0.1).psi == pytest.approx(-0.1)
    assert gate_step(GateState(psi=2.0), (3.0, 0.0), 0.01).psi < 2.0
    with pytest.raises(ValueError):
        gate_step(g, (0.0, 0.0), 0.0)


def test_gates_end_to_end_fd():
    assert check_gates(seed=3, n_configs=6).max_rel_error < 1e-5


def test_cosine_schedule():
    assert fixed_schedule("cosine", 0.6, 0, 400) == 0.3
    assert fixed_schedule("cosine", 0.6, 400, 400) == 0.0
    for t in (37, 100, 200, 311):
        assert fixed_schedule("cosine", 0.6, t, 400) == 0.6 * 0.25 * (1 + math.cos(math.pi * t / 400))


def test_stepwise_schedule():
    r = 0.7
    assert fixed_schedule("stepwise", r, 0, 400) == r
    assert fixed_schedule("stepwise", r, 99, 400) == r
    assert fixed_schedule("stepwise", r, 100, 400) == pytest.approx(r - r / 7)
    assert fixed_schedule("stepwise", r, 149, 400) == pytest.approx(r - r / 7)
    assert fixed_schedule("stepwise", r, 350, 400) == pytest.approx(r / 7)
    assert fixed_schedule("stepwise", r, 400, 400) == 0.0
    assert fixed_schedule("stepwise", r, 500, 400) == 0.0
    # scaled to a shorter budget
    assert fixed_schedule("stepwise", r, 15, 60) == pytest.approx(r - r / 7)
    vals = [fixed_schedule("stepwise", r, t, 400) for t in range(401)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_schedule_errors():
    with pytest.raises(ValueError):
        fixed_schedule("linear", 0.5, 0, 10)
    with pytest.raises(ValueError):
        fixed_schedule("cosine", 1.5, 0, 10)
    with pytest.raises(ValueError):
        RlaConfig(total_epochs=0)
