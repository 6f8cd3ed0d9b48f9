"""Central finite-difference checks for every hand-written gradient.

Relative error of an analytic value ``a`` against a numeric ``n`` is
``|a - n| / max(|a|, |n|, floor)``. For arrays the floor is a fixed fraction
of the largest analytic magnitude in the suite, so entries that are zero up
to rounding do not turn FD noise into huge ratios. Gate partials are scalars
of unrelated scale; their floor is the magnitude below which a central
difference at ``STEP`` cannot resolve ``TOL`` given round-off in the loss
value (``eps * |L| / STEP``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import featspace, mixer, rla, segnet
from .core import RngStream, rng_split
from .synthgen import GenConfig, generate_triplet

STEP = 1e-6
TOL = 1e-5
FLOOR_FRACTION = 1e-3
ABS_FLOOR = 1e-12
SUITES = ("segnet_params", "segnet_input", "mmd_input", "gates")


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_rel_error: float
    worst: str  # offending coordinate, human-readable
    n_checked: int

    def passed(self, tol: float = TOL) -> bool:
        return self.max_rel_error < tol

    def line(self, tol: float = TOL) -> str:
        status = "PASS" if self.passed(tol) else "FAIL"
        return (f"{status} {self.name:<14} max_rel_err={self.max_rel_error:.3e} "
                f"n={self.n_checked} worst={self.worst}")


def rel_error(a: float, n: float, floor: float = ABS_FLOOR) -> float:
    return abs(a - n) / max(abs(a), abs(n), floor)


def fd_floor(loss: float, h: float = STEP, tol: float = TOL) -> float:
    return max(np.finfo(np.float64).eps * abs(loss) / h / tol, ABS_FLOOR)


def central_difference(f, x: float, h: float = STEP) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _worst(name, entries) -> SuiteResult:
    """entries: iterable of (coordinate label, analytic, numeric)."""
    entries = list(entries)
    scale = max((abs(a) for _, a, _ in entries), default=0.0)
    floor = max(FLOOR_FRACTION * scale, ABS_FLOOR)
    errs = [(rel_error(a, n, floor), label) for label, a, n in entries]
    err, label = max(errs, key=lambda e: e[0])
    return SuiteResult(name, err, label, len(entries))


def check_segnet_params(seed: int = 0, size: int = 6, corrupt: float = 0.0) -> SuiteResult:
    """Every weight and bias of a small model on one ``size x size x 1`` image."""
    gen = RngStream(seed, 0x5E6).generator()
    model = segnet.init_model(1, RngStream(seed, 0x5E7), hidden=4)
    model = replace(model, b1=gen.normal(0, 0.3, size=model.b1.shape),
                    b2=gen.normal(0, 0.3, size=model.b2.shape))
    img = gen.uniform(size=(size, size, 1))
    target = (gen.uniform(size=(size, size)) < 0.4).astype(np.float64)
    _, grads = segnet.backward(model, img, target, need_input=False)
    entries = []
    for name in segnet.PARAMS:
        p = getattr(model, name)
        g = getattr(grads, name) * (1.0 + corrupt)
        for idx in np.ndindex(p.shape):
            def f(v, name=name, idx=idx, p=p):
                q = p.copy()
                q[idx] = v
                return segnet.bce_loss(segnet.forward(replace(model, **{name: q}), img), target)
            entries.append((f"{name}{list(idx)}", float(g[idx]), central_difference(f, p[idx])))
    return _worst("segnet_params", entries)


def check_segnet_input(seed: int = 0, size: int = 12, n_pixels: int = 10,
                       corrupt: float = 0.0) -> SuiteResult:
    """Input gradient at ``n_pixels`` random (row, col, channel) coordinates."""
    gen = RngStream(seed, 0x1A9).generator()
    model = segnet.init_model(3, RngStream(seed, 0x1AA))
    img = gen.uniform(size=(size, size, 3))
    target = (gen.uniform(size=(size, size)) < 0.4).astype(np.float64)
    _, grads = segnet.backward(model, img, target)
    gin = grads.input * (1.0 + corrupt)
    flat = gen.choice(img.size, size=n_pixels, replace=False)
    entries = []
    for k in flat:
        idx = np.unravel_index(int(k), img.shape)

        def f(v, idx=idx):
            x = img.copy()
            x[idx] = v
            return segnet.bce_loss(segnet.forward(model, x), target)
        entries.append((f"pixel{[int(i) for i in idx]}", float(gin[idx]),
                        central_difference(f, img[idx])))
    return _worst("segnet_input", entries)


def check_mmd_input(seed: int = 0, n_images: int = 4, size: int = 8,
                    corrupt: float = 0.0) -> SuiteResult:
    """Gradient of MMD(phi(x), phi(y)) with respect to every pixel of ``x``."""
    gen = RngStream(seed, 0x3D3).generator()
    ext = featspace.make_extractor(1, seed=seed)
    x = gen.uniform(size=(n_images, size, size, 1))
    y = np.clip(gen.uniform(size=(n_images, size, size, 1)) * 0.7 + 0.3, 0, 1)
    fy = featspace.extract(ext, y)
    bw = featspace.median_bandwidth(np.concatenate([featspace.extract(ext, x), fy]))
    g = featspace.mmd_input_gradient(x, y, ext, bw) * (1.0 + corrupt)
    entries = []
    for idx in np.ndindex(x.shape):
        def f(v, idx=idx):
            xx = x.copy()
            xx[idx] = v
            return featspace.mmd(featspace.extract(ext, xx), fy, bw)
        entries.append((f"x{list(idx)}", float(g[idx]), central_difference(f, x[idx])))
    return _worst("mmd_input", entries)


@dataclass(frozen=True)
class GateProblem:
    """One end-to-end configuration: data, model, extractor and hyper-parameters."""

    real: np.ndarray
    synthetic: np.ndarray
    masks: np.ndarray
    model: segnet.SegModel
    extractor: featspace.FrozenExtractor
    bandwidth: float
    cfg: rla.RlaConfig
    t: float
    gates: rla.GateState

    def objective(self, psi: float, zeta: float) -> rla.LossBreakdown:
        """Total loss re-running mixing, both forward passes and the MMD."""
        g = replace(self.gates, psi=psi, zeta=zeta)
        mixed = mixer.mix_images(self.real, self.synthetic, g.s)
        l_real = segnet.bce_loss(segnet.forward(self.model, self.real), self.masks)
        l_mix = segnet.bce_loss(segnet.forward(self.model, mixed), self.masks)
        fr = featspace.extract(self.extractor, self.real)
        d = featspace.mmd(featspace.extract(self.extractor, mixed), fr, self.bandwidth)
        return rla.total_loss(l_real, l_mix, d, self.t, g, self.cfg)

    def analytic(self) -> tuple[float, float]:
        g = self.gates
        mixed = mixer.mix_images(self.real, self.synthetic, g.s)
        l_real, _ = segnet.backward(self.model, self.real, self.masks, need_input=False)
        l_mix, gm = segnet.backward(self.model, mixed, self.masks)
        fr = featspace.extract(self.extractor, self.real)
        d, _, gd = featspace.discrepancy(self.extractor, mixed, fr, self.bandwidth, True)
        mix_dot = segnet.mix_input_dot(gm.input, self.synthetic, self.real)
        mmd_dot = segnet.mix_input_dot(gd, self.synthetic, self.real)
        return rla.gate_gradients(l_real, l_mix, d, self.t, g, self.cfg, mix_dot, mmd_dot)


def random_gate_problem(rng: RngStream, size: int = 24, batch: int = 4) -> GateProblem:
    """Random small configuration with the hinge margin kept away from its kink."""
    streams = rng_split(rng, batch + 2)
    gen = streams[-1].generator()
    gcfg = GenConfig(size=size, lesion_radius=(size / 8, size / 3),
                     strength=float(gen.uniform(0.3, 1.0)))
    trip = [generate_triplet(gcfg, s) for s in streams[:batch]]
    real = np.stack([t.real for t in trip])
    syn = np.stack([t.synthetic for t in trip])
    masks = np.stack([t.mask for t in trip]).astype(np.float64)
    model = segnet.init_model(3, streams[-2])
    ext = featspace.make_extractor(3, seed=int(gen.integers(1 << 16)))
    bw = featspace.median_bandwidth(featspace.extract(ext, real))
    T = int(gen.integers(4, 400))
    gates = rla.GateState(float(gen.uniform(-2, 2)), float(gen.uniform(-2, 2)),
                          float(gen.uniform(0.2, 0.9)), float(gen.uniform(0.2, 0.9)))
    t = float(gen.integers(0, T + 1))
    cfg = rla.RlaConfig(tau0=1.0, mu=float(gen.uniform(0.1, 2.0)),
                        lambda_rho=float(10 ** gen.uniform(-4, -1)),
                        lambda_s=float(10 ** gen.uniform(-4, -1)), total_epochs=T,
                        rho_max=gates.rho_max, s_max=gates.s_max)
    prob = GateProblem(real, syn, masks, model, ext, bw, cfg, t, gates)
    d = prob.objective(gates.psi, gates.zeta).d
    # tau0 chosen so tau_t sits 20-80 % below or above D: hinge active or inactive
    factor = (1.0 + math.cos(math.pi * min(t, T) / T)) / 2.0
    ratio = float(gen.uniform(0.2, 0.8)) * (1 if gen.uniform() < 0.5 else -1)
    tau_target = d * (1.0 + ratio)
    tau0 = tau_target / factor if factor > 1e-3 else 1.0
    return replace(prob, cfg=replace(cfg, tau0=tau0))


def check_gates(seed: int = 0, n_configs: int = 20, corrupt: float = 0.0) -> SuiteResult:
    entries = []
    for k, stream in enumerate(rng_split(RngStream(seed, 0x6A7E), n_configs)):
        prob = random_gate_problem(stream)
        dpsi, dzeta = prob.analytic()
        g = prob.gates
        npsi = central_difference(lambda v: prob.objective(v, g.zeta).total, g.psi)
        nzeta = central_difference(lambda v: prob.objective(g.psi, v).total, g.zeta)
        floor = fd_floor(prob.objective(g.psi, g.zeta).total)
        entries.append((f"config{k}.psi", dpsi * (1.0 + corrupt), npsi, floor))
        entries.append((f"config{k}.zeta", dzeta * (1.0 + corrupt), nzeta, floor))
    worst = max(((rel_error(a, n, fl), lab) for lab, a, n, fl in entries), key=lambda e: e[0])
    return SuiteResult("gates", worst[0], worst[1], len(entries))


def run_all(seed: int = 0, corrupt: str | None = None, n_configs: int = 20) -> list[SuiteResult]:
    """Every suite; ``corrupt`` names one suite whose analytic side is skewed by 1 %."""
    if corrupt is not None and corrupt not in SUITES:
        raise ValueError(f"unknown suite {corrupt!r}; expected one of {SUITES}")

    def c(name):
        return 0.01 if corrupt == name else 0.0
    return [
        check_segnet_params(seed, corrupt=c("segnet_params")),
        check_segnet_input(seed, corrupt=c("segnet_input")),
        check_mmd_input(seed, corrupt=c("mmd_input")),
        check_gates(seed, n_configs=n_configs, corrupt=c("gates")),
    ]
