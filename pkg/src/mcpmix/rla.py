"""Real-anchored learnable annealing: gates, schedules, objective and gate gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def sigmoid_prime(x: float) -> float:
    s = sigmoid(x)
    return s * (1.0 - s)


@dataclass(frozen=True)
class GateState:
    psi: float = 0.0
    zeta: float = 0.0
    rho_max: float = 0.5
    s_max: float = 0.7

    @property
    def rho(self) -> float:
        return self.rho_max * sigmoid(self.psi)

    @property
    def s(self) -> float:
        return self.s_max * sigmoid(self.zeta)


@dataclass(frozen=True)
class RlaConfig:
    """Objective hyper-parameters.

    ``tau0=None`` means "calibrate from data" (median first-epoch discrepancy);
    every function here needs it resolved to a number.
    """

    tau0: float | None = None
    mu: float = 1.0
    lambda_rho: float = 1e-3
    lambda_s: float = 1e-3
    total_epochs: int = 60
    gate_lr: float = 0.05
    rho_max: float = 0.5
    s_max: float = 0.7

    def __post_init__(self):
        if self.total_epochs < 1:
            raise ValueError("total_epochs must be >= 1")
        if not 0.0 <= self.rho_max <= 1.0 or not 0.0 <= self.s_max <= 1.0:
            raise ValueError("rho_max and s_max must lie in [0, 1]")
        if self.mu < 0 or self.lambda_rho < 0 or self.lambda_s < 0:
            raise ValueError("mu and lambdas must be non-negative")

    def initial_gates(self) -> GateState:
        return GateState(0.0, 0.0, self.rho_max, self.s_max)


@dataclass(frozen=True)
class LossBreakdown:
    l_real: float
    l_mix: float
    d: float
    tau: float
    rho: float
    s: float
    rho_prior: float
    s_prior: float
    penalty: float
    prior_rho: float
    prior_s: float
    total: float


def _cosine_factor(t: float, T: int) -> float:
    if t < 0:
        raise ValueError("epoch must be >= 0")
    # t/T first: exact at T/2 and T, so the midpoint is exactly half
    return (1.0 + math.cos(math.pi * (min(t, T) / T))) / 2.0


def gate_values(g: GateState) -> tuple[float, float]:
    return g.rho, g.s


def tau_schedule(cfg: RlaConfig, t: float) -> float:
    if cfg.tau0 is None:
        raise ValueError("tau0 is not calibrated")
    return cfg.tau0 * _cosine_factor(t, cfg.total_epochs)


def prior_schedules(cfg: RlaConfig, t: float) -> tuple[float, float]:
    """(rho_prior, s_prior): both gates' bounds scaled by the same cosine decay."""
    f = _cosine_factor(t, cfg.total_epochs)
    return cfg.rho_max * f, cfg.s_max * f


def _check_finite(*vals):
    for v in vals:
        if not math.isfinite(v):
            raise ValueError(f"non-finite loss input: {v}")


def assemble_loss(l_real, l_mix, d, t, rho, s, cfg: RlaConfig) -> LossBreakdown:
    """The full objective for given gate values (fixed-schedule modes use this directly)."""
    _check_finite(l_real, l_mix, d, rho, s)
    tau = tau_schedule(cfg, t)
    rho_p, s_p = prior_schedules(cfg, t)
    penalty = cfg.mu * max(0.0, d - tau)
    prior_rho = cfg.lambda_rho * (rho - rho_p) ** 2
    prior_s = cfg.lambda_s * (s - s_p) ** 2
    total = (1.0 - rho) * l_real + rho * l_mix + penalty + prior_rho + prior_s
    return LossBreakdown(l_real, l_mix, d, tau, rho, s, rho_p, s_p,
                         penalty, prior_rho, prior_s, total)


def total_loss(l_real, l_mix, d, t, g: GateState, cfg: RlaConfig) -> LossBreakdown:
    return assemble_loss(l_real, l_mix, d, t, g.rho, g.s, cfg)


def gate_gradients(l_real, l_mix, d, t, g: GateState, cfg: RlaConfig,
                   mix_loss_input_grad_dot: float,
                   mmd_input_grad_dot: float) -> tuple[float, float]:
    """Closed-form dL/dpsi and dL/dzeta.

    The two dot products are <dL_mix/dI_mix, I_s - I_r> and
    <dD/dI_mix, I_s - I_r> over the same batch the losses came from.
    """
    _check_finite(l_real, l_mix, d, mix_loss_input_grad_dot, mmd_input_grad_dot)
    rho, s = g.rho, g.s
    tau = tau_schedule(cfg, t)
    rho_p, s_p = prior_schedules(cfg, t)
    dl_drho = -l_real + l_mix + 2.0 * cfg.lambda_rho * (rho - rho_p)
    hinge = cfg.mu * mmd_input_grad_dot if d > tau else 0.0
    dl_ds = rho * mix_loss_input_grad_dot + hinge + 2.0 * cfg.lambda_s * (s - s_p)
    return (dl_drho * g.rho_max * sigmoid_prime(g.psi),
            dl_ds * g.s_max * sigmoid_prime(g.zeta))


def gate_step(g: GateState, grads: tuple[float, float], lr: float) -> GateState:
    if not lr > 0:
        raise ValueError("gate learning rate must be positive")
    dpsi, dzeta = grads
    return replace(g, psi=g.psi - lr * dpsi, zeta=g.zeta - lr * dzeta)


# Reduction epochs of the stepwise baseline on a 400-epoch budget; rescaled by T/400.
_STEP_POINTS = (100, 150, 200, 250, 300, 350, 400)


def fixed_schedule(kind: str, r: float, t: float, T: int) -> float:
    """Hand-crafted mixing weights used as baselines.

    stepwise: ``r`` until T/4, then minus r/7 at each of the seven points
    T/4, 3T/8, ..., T (epochs 100, 150, ..., 400 when T=400), 0 from T on.
    cosine: ``r * 0.25 * (1 + cos(pi * t / T))``, held at 0 after T.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    if kind == "stepwise":
        if t >= T:
            return 0.0
        steps = sum(1 for p in _STEP_POINTS if t >= p * T / 400)
        return r - steps * (r / 7.0)
    if kind == "cosine":
        return r * 0.25 * (1.0 + math.cos(math.pi * min(t, T) / T))
    raise ValueError(f"unknown schedule kind {kind!r}")
