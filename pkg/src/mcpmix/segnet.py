"""Two-layer convolutional segmenter with hand-written backward pass.

conv3x3(C->h) -> tanh -> conv3x3(h->1) -> sigmoid, zero 'same' padding.
Losses are binary cross-entropy averaged over every pixel of the batch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import kernels
from .core import KIND_F32, RngStream, read_array, write_array

EPS = 1e-7
PARAMS = ("w1", "b1", "w2", "b2")


@dataclass(frozen=True)
class SegModel:
    w1: np.ndarray  # (k, k, C, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (k, k, h, 1)
    b2: np.ndarray  # (1,)

    @property
    def channels(self) -> int:
        return self.w1.shape[2]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMS}


@dataclass(frozen=True)
class Gradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    input: np.ndarray | None = None

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMS}


def init_model(channels: int, rng: RngStream, hidden: int = 8, kernel: int = 3) -> SegModel:
    gen = rng.generator()
    w1 = gen.normal(0.0, 1.0 / math.sqrt(kernel * kernel * channels),
                    size=(kernel, kernel, channels, hidden))
    w2 = gen.normal(0.0, 1.0 / math.sqrt(kernel * kernel * hidden),
                    size=(kernel, kernel, hidden, 1))
    return SegModel(w1, np.zeros(hidden), w2, np.zeros(1))


def zero_model(channels: int, hidden: int = 8, kernel: int = 3) -> SegModel:
    return SegModel(np.zeros((kernel, kernel, channels, hidden)), np.zeros(hidden),
                    np.zeros((kernel, kernel, hidden, 1)), np.zeros(1))


def _batch(img):
    x = np.asarray(img, dtype=np.float64)
    single = x.ndim == 3
    if single:
        x = x[None]
    if x.ndim != 4:
        raise ValueError(f"expected (H, W, C) or (B, H, W, C), got {x.shape}")
    return x, single


def _run(m: SegModel, x):
    if x.shape[3] != m.channels:
        raise ValueError(f"model expects {m.channels} channels, got {x.shape[3]}")
    return kernels.segnet_forward(x, m.w1, m.b1, m.w2, m.b2)


def forward(m: SegModel, img) -> np.ndarray:
    """Per-pixel foreground probabilities, shape (H, W) or (B, H, W)."""
    x, single = _batch(img)
    p, _ = _run(m, x)
    return p[0] if single else p


def bce_loss(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if pred.shape != y.shape:
        raise ValueError(f"prediction {pred.shape} and target {y.shape} differ")
    p = np.clip(pred, EPS, 1.0 - EPS)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def bce_logit_grad(pred, target) -> np.ndarray:
    """Per-pixel d(BCE)/d(logit) before averaging: p - y."""
    return np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)


def backward(m: SegModel, img, target, need_input: bool = True) -> tuple[float, Gradients]:
    """Mean BCE and its exact gradient for every parameter and the input."""
    x, single = _batch(img)
    y = np.asarray(target, dtype=np.float64)
    if single:
        y = y[None]
    if y.shape != x.shape[:3]:
        raise ValueError(f"target {y.shape} does not match input {x.shape[:3]}")
    p, cache = _run(m, x)
    loss = bce_loss(p, y)
    inside = (p > EPS) & (p < 1.0 - EPS)  # clipping kills the gradient
    gz2 = np.where(inside, p - y, 0.0) / y.size
    gw1, gb1, gw2, gb2, gin = kernels.segnet_backward(cache, m.w1, m.w2, gz2, need_input)
    if gin is not None and single:
        gin = gin[0]
    return loss, Gradients(gw1, gb1, gw2, gb2, gin)


def combine(a: Gradients, wa: float, b: Gradients, wb: float) -> Gradients:
    """Parameter gradients of wa * L_a + wb * L_b (input gradients dropped)."""
    return Gradients(*(wa * getattr(a, n) + wb * getattr(b, n) for n in PARAMS))


def sgd_step(m: SegModel, grads: Gradients, lr: float, weight_decay: float = 0.0) -> SegModel:
    if not lr > 0:
        raise ValueError("learning rate must be positive")
    return SegModel(*(getattr(m, n) - lr * (getattr(grads, n) + weight_decay * getattr(m, n))
                      for n in PARAMS))


def mix_input_dot(input_grad, synthetic, real=None) -> float:
    """<dL/dI_mix, I_s - I_r> as a flat inner product.

    Accepts a :class:`Gradients` in place of the raw input gradient and a
    triplet (anything with ``synthetic`` and ``real``) in place of the pair.
    """
    if isinstance(input_grad, Gradients):
        input_grad = input_grad.input
    if real is None:
        synthetic, real = synthetic.synthetic, synthetic.real
    g = np.asarray(input_grad, dtype=np.float64)
    diff = np.asarray(synthetic, dtype=np.float64) - np.asarray(real, dtype=np.float64)
    if g.shape != diff.shape:
        raise ValueError(f"gradient {g.shape} and image difference {diff.shape} differ")
    return float(np.dot(g.ravel(), diff.ravel()))


def save_checkpoint(m: SegModel, directory, seed: int) -> list[Path]:
    """Write each parameter as an MCPT float array plus a ``model.json`` header.

    MCPT is limited to rank 3, so 4-D kernels are stored as (k*k, C, O).
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    header = {"format": "mcpmix-segnet/1", "seed": seed, "layers": {}}
    written = []
    for name, arr in m.params().items():
        fname = f"{name}.mcpt"
        stored = arr.reshape(-1, *arr.shape[2:]) if arr.ndim == 4 else arr
        write_array(d / fname, stored, KIND_F32)
        header["layers"][name] = {"file": fname, "shape": list(arr.shape)}
        written.append(d / fname)
    (d / "model.json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    written.append(d / "model.json")
    return written


def load_checkpoint(directory) -> SegModel:
    d = Path(directory)
    header = json.loads((d / "model.json").read_text())
    arrays = {}
    for name in PARAMS:
        spec = header["layers"][name]
        _, arr = read_array(d / spec["file"])
        arrays[name] = arr.reshape(spec["shape"])
    return SegModel(**arrays)


def model_equal(a: SegModel, b: SegModel) -> bool:
    return all(np.array_equal(getattr(a, f.name), getattr(b, f.name)) for f in fields(a))
