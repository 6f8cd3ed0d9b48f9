"""Procedural mask-consistent image pairs.

A lesion mask is drawn first; the real image is rendered from it with a
random palette, low-frequency texture, illumination ramp and noise. The
synthetic counterpart is conditioned on the same mask: an alternative
rendering with a rotated palette, fresh texture phase, illumination and
noise, blended toward the real image by ``1 - strength``. Because the blend is
a convex combination of two images already in [0, 1], the per-pixel gap
``|real - synthetic|`` equals ``strength * |real - alt|`` exactly.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import RngStream, frozen, rng_split, tensor_read, tensor_write

FG_FRACTION = (0.02, 0.6)
_MAX_TRIES = 1000


class GenConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GenConfig:
    size: int = 64
    channels: int = 3
    lesion_count: tuple[int, int] = (1, 3)
    lesion_radius: tuple[float, float] = (6.0, 16.0)
    strength: float = 0.6
    noise: float = 0.03

    def validate(self) -> "GenConfig":
        lo, hi = self.lesion_count
        rlo, rhi = self.lesion_radius
        if self.size < 4 or self.channels < 1:
            raise GenConfigError("size must be >= 4 and channels >= 1")
        if not 1 <= lo <= hi:
            raise GenConfigError(f"bad lesion count range {self.lesion_count}")
        if not 0 < rlo <= rhi:
            raise GenConfigError(f"bad lesion radius range {self.lesion_radius}")
        if rhi >= self.size:
            raise GenConfigError("lesion radius must be smaller than the image size")
        if not 0.0 <= self.strength <= 1.0 or not 0.0 <= self.noise <= 1.0:
            raise GenConfigError("strength and noise must lie in [0, 1]")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "GenConfig":
        d = dict(d)
        for key in ("lesion_count", "lesion_radius"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d).validate()


@dataclass(frozen=True)
class PairedTriplet:
    real: np.ndarray
    synthetic: np.ndarray
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.real.shape != self.synthetic.shape:
            raise ValueError("real and synthetic shapes differ")
        if self.mask.shape != self.real.shape[:2]:
            raise ValueError("mask does not match image height/width")
        for name in ("real", "synthetic", "mask"):
            object.__setattr__(self, name, frozen(getattr(self, name)))


def _sample_mask(cfg: GenConfig, gen: np.random.Generator) -> np.ndarray:
    n = cfg.size
    rr, cc = _grid(n, n, 1.0)
    mask = np.zeros((n, n), dtype=bool)
    for _ in range(gen.integers(cfg.lesion_count[0], cfg.lesion_count[1] + 1)):
        cy, cx = gen.uniform(0.25 * n, 0.75 * n, size=2)
        a, b = gen.uniform(*cfg.lesion_radius, size=2)
        theta = gen.uniform(0.0, math.pi)
        amps = gen.uniform(0.0, 0.12, size=3)
        phases = gen.uniform(0.0, 2 * math.pi, size=3)
        dy, dx = rr - cy, cc - cx
        u = dx * math.cos(theta) + dy * math.sin(theta)
        v = -dx * math.sin(theta) + dy * math.cos(theta)
        radial = np.sqrt((u / a) ** 2 + (v / b) ** 2)
        ang = np.arctan2(v, u)
        edge = 1.0 + sum(amps[i] * np.cos((i + 2) * ang + phases[i]) for i in range(3))
        mask |= radial <= edge
    return mask.astype(np.uint8)


def sample_mask(cfg: GenConfig, gen: np.random.Generator) -> np.ndarray:
    """Draw a lesion mask, resampling until the foreground fraction is in bounds."""
    for _ in range(_MAX_TRIES):
        m = _sample_mask(cfg, gen)
        if FG_FRACTION[0] <= m.mean() <= FG_FRACTION[1]:
            return m
    raise GenConfigError("could not draw a mask with an admissible foreground fraction")


@lru_cache(maxsize=8)
def _grid(h: int, w: int, scale: float):
    rr, cc = np.mgrid[0:h, 0:w] / scale
    return frozen(rr), frozen(cc)


def _texture(shape, gen, amp):
    h, w = shape
    rr, cc = _grid(h, w, float(max(h, w)))
    tex = np.zeros(shape)
    for _ in range(3):
        fy, fx = gen.uniform(-6.0, 6.0, size=2)
        tex += np.sin(2 * math.pi * (fy * rr + fx * cc) + gen.uniform(0, 2 * math.pi))
    return amp * tex / 3.0


def _illumination(shape, gen):
    h, w = shape
    rr, cc = _grid(h, w, float(max(h - 1, w - 1, 1)))
    ang = gen.uniform(0.0, 2 * math.pi)
    ramp = (rr - 0.5) * math.sin(ang) + (cc - 0.5) * math.cos(ang)
    vign = (rr - 0.5) ** 2 + (cc - 0.5) ** 2
    return 1.0 + gen.uniform(0.1, 0.35) * ramp - gen.uniform(0.0, 0.5) * vign


def _render(mask, bg, fg, cfg: GenConfig, gen: np.random.Generator) -> np.ndarray:
    shape = mask.shape
    m = mask[..., None].astype(np.float64)
    img = (1.0 - m) * bg + m * fg
    tex_bg = _texture(shape, gen, 0.08)
    tex_fg = _texture(shape, gen, 0.10)
    img = img + ((1.0 - m[..., 0]) * tex_bg + m[..., 0] * tex_fg)[..., None]
    img = img * _illumination(shape, gen)[..., None]
    if cfg.noise > 0:
        img = img + gen.normal(0.0, cfg.noise, size=img.shape)
    return np.clip(img, 0.0, 1.0)


def _rotate_palette(colors: np.ndarray, angle: float) -> np.ndarray:
    c = colors.shape[-1]
    if c == 3:
        k = np.full(3, 1.0 / math.sqrt(3.0))
        kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        rot = np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * (kx @ kx)
        return np.clip(colors @ rot.T, 0.0, 1.0)
    if c == 1:
        # no hue on a single channel: reflect intensity about mid-grey, scaled by angle
        t = (1 - math.cos(angle)) / 2
        return np.clip((1 - t) * colors + t * (1.0 - colors), 0.0, 1.0)
    return np.roll(colors, 1, axis=-1)


_TISSUE = np.array([0.78, 0.50, 0.45])
_LESION_SHIFT = np.array([0.10, -0.20, -0.14])


def _real_palette(channels: int, gen: np.random.Generator):
    """Tissue-like background and a redder, darker lesion, both jittered."""
    if channels == 3:
        bg = _TISSUE + gen.uniform(-0.08, 0.08, size=3)
        fg = bg + _LESION_SHIFT * gen.uniform(0.7, 1.3)
    else:
        bg = gen.uniform(0.45, 0.65, size=channels)
        fg = bg - gen.uniform(0.15, 0.25)
    return np.clip(bg, 0.0, 1.0), np.clip(fg, 0.0, 1.0)


def synthesize(real: np.ndarray, mask: np.ndarray, cfg: GenConfig,
               rng: RngStream) -> np.ndarray:
    """Draw a synthetic counterpart of ``real`` that shares its mask."""
    gen = rng.generator()
    m = mask.astype(bool)
    bg = real[~m].mean(axis=0) if (~m).any() else real.reshape(-1, real.shape[-1]).mean(0)
    fg = real[m].mean(axis=0) if m.any() else bg
    angle = gen.uniform(math.pi / 3, math.pi)
    palette = _rotate_palette(np.stack([bg, fg]), angle)
    alt = _render(mask, palette[0], palette[1], cfg, gen)
    return (1.0 - cfg.strength) * real + cfg.strength * alt


def generate_triplet(cfg: GenConfig, rng: RngStream) -> PairedTriplet:
    cfg.validate()
    s_mask, s_real, s_syn = rng_split(rng, 3)
    mask = sample_mask(cfg, s_mask.generator())
    gen = s_real.generator()
    bg, fg = _real_palette(cfg.channels, gen)
    real = _render(mask, bg, fg, cfg, gen)
    synthetic = synthesize(real, mask, cfg, s_syn)
    return PairedTriplet(real, synthetic, mask)


def generate_dataset(cfg: GenConfig, n: int, seed: int, out_dir) -> dict:
    """Write ``n`` triplets plus ``manifest.json`` into ``out_dir``.

    Paths in the manifest are relative to the manifest's directory.
    """
    if n < 1:
        raise ValueError("dataset needs n >= 1")
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    items = []
    for i, stream in enumerate(rng_split(RngStream(seed), n)):
        t = generate_triplet(cfg, stream)
        entry = {}
        for name, arr in (("real", t.real), ("synthetic", t.synthetic), ("mask", t.mask)):
            fname = f"{i:05d}_{name}.mcpt"
            tensor_write(out / fname, arr)
            entry[name] = fname
        items.append(entry)
    manifest = {"seed": seed, "config": asdict(cfg), "items": items}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def load_manifest(path) -> tuple[dict, list[PairedTriplet]]:
    """Read a manifest and every triplet it lists."""
    path = Path(path)
    manifest = json.loads(path.read_text())
    base = path.parent
    triplets = []
    for it in manifest["items"]:
        triplets.append(PairedTriplet(
            tensor_read(base / it["real"]),
            tensor_read(base / it["synthetic"]),
            tensor_read(base / it["mask"]),
        ))
    return manifest, triplets
