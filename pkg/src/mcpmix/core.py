"""Tensor conventions, seeded random streams and the MCPT file format.

Images are float64 arrays of shape (H, W, C), row-major and channel-last,
with values in [0, 1]. Masks are uint8 arrays of shape (H, W) holding only
0 and 1. Batches stack along a leading axis.

Random streams use numpy's PCG64 seeded through ``SeedSequence``. Both are
platform independent; the distribution methods we call are stable across
numpy 1.17+ and the package pins numpy<3.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"MCPT"
KIND_F32 = 0
KIND_U8 = 1

_U64 = (1 << 64) - 1


class TensorFileError(Exception):
    """Malformed or unreadable MCPT file."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = str(path)


def as_image(a) -> np.ndarray:
    """Validate and return an (H, W, C) float64 image with values in [0, 1]."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"image must be rank 3 (H, W, C), got shape {a.shape}")
    if not np.all(np.isfinite(a)) or a.min(initial=0.0) < 0.0 or a.max(initial=0.0) > 1.0:
        raise ValueError("image values must be finite and within [0, 1]")
    return a


def as_mask(a) -> np.ndarray:
    """Validate and return an (H, W) uint8 mask with values in {0, 1}."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"mask must be rank 2 (H, W), got shape {a.shape}")
    if a.dtype == np.bool_:
        return a.astype(np.uint8)
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("mask values must be exactly 0 or 1")
    return a.astype(np.uint8)


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RngStream:
    """An addressable random stream: (seed, stream_id) fixes the sequence."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([self.seed & _U64, self.stream_id & _U64])
        return np.random.Generator(np.random.PCG64(ss))


def rng_split(parent: RngStream, n: int) -> list[RngStream]:
    """Derive ``n`` child streams with distinct ids, deterministic in (parent, n)."""
    if n < 1:
        raise ValueError("rng_split needs n >= 1")
    ids = []
    for i in range(n):
        ss = np.random.SeedSequence([parent.seed & _U64, parent.stream_id & _U64, n, i])
        ids.append(int(ss.generate_state(1, np.uint64)[0]))
    if len(set(ids)) != n:  # pragma: no cover - 64-bit collision
        raise RuntimeError("stream id collision")
    return [RngStream(parent.seed, sid) for sid in ids]


def write_array(path, a: np.ndarray, kind: int) -> None:
    """Write a rank 1-3 array in MCPT layout (float32 LE or uint8 payload)."""
    a = np.asarray(a)
    if not 1 <= a.ndim <= 3:
        raise ValueError(f"MCPT supports rank 1-3, got rank {a.ndim}")
    if kind == KIND_F32:
        payload = np.ascontiguousarray(a, dtype="<f4").tobytes()
    elif kind == KIND_U8:
        payload = np.ascontiguousarray(a, dtype=np.uint8).tobytes()
    else:
        raise ValueError(f"unknown kind tag {kind}")
    header = MAGIC + bytes([kind]) + struct.pack("<I", a.ndim)
    header += struct.pack(f"<{a.ndim}I", *a.shape)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as e:
        raise TensorFileError(path, f"write failed: {e.strerror or e}") from e


def read_array(path) -> tuple[int, np.ndarray]:
    """Read an MCPT file; returns (kind, array). Float payloads come back as float64."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise TensorFileError(path, f"read failed: {e.strerror or e}") from e
    if len(raw) < 9 or raw[:4] != MAGIC:
        raise TensorFileError(path, "bad magic")
    kind = raw[4]
    (ndim,) = struct.unpack_from("<I", raw, 5)
    if not 1 <= ndim <= 3:
        raise TensorFileError(path, f"unsupported rank {ndim}")
    off = 9 + 4 * ndim
    if len(raw) < off:
        raise TensorFileError(path, "truncated header")
    dims = struct.unpack_from(f"<{ndim}I", raw, 9)
    count = int(np.prod(dims))
    if kind == KIND_F32:
        nbytes, dtype = 4 * count, "<f4"
    elif kind == KIND_U8:
        nbytes, dtype = count, np.uint8
    else:
        raise TensorFileError(path, f"unknown kind tag {kind}")
    if len(raw) - off != nbytes:
        raise TensorFileError(path, f"payload is {len(raw) - off} bytes, expected {nbytes}")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=off).reshape(dims)
    if kind == KIND_F32:
        return kind, data.astype(np.float64)
    return kind, data.copy()


def tensor_write(path, t: np.ndarray) -> None:
    """Write an image (rank 3, float) or a mask (rank 2, {0,1})."""
    t = np.asarray(t)
    if t.ndim == 3 and np.issubdtype(t.dtype, np.floating):
        write_array(path, as_image(t), KIND_F32)
    elif t.ndim == 2:
        write_array(path, as_mask(t), KIND_U8)
    else:
        raise ValueError(f"not an image or mask: dtype {t.dtype}, shape {t.shape}")


def tensor_read(path) -> np.ndarray:
    """Inverse of :func:`tensor_write`."""
    kind, a = read_array(path)
    if kind == KIND_U8:
        if a.ndim != 2:
            raise TensorFileError(path, "mask must be rank 2")
        if not np.all(a <= 1):
            raise TensorFileError(path, "invalid mask byte (not 0 or 1)")
        return a
    if a.ndim != 3:
        raise TensorFileError(path, "image must be rank 3")
    return a


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
