import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mcpmix.core import (KIND_F32, KIND_U8, MAGIC, RngStream, TensorFileError, as_image,
                         as_mask, read_array, rng_split, tensor_read, tensor_write, write_array)


def test_one_pixel_image_is_25_bytes(tmp_path):
    p = tmp_path / "a.mcpt"
    tensor_write(p, np.full((1, 1, 1), 0.5))
    raw = p.read_bytes()
    assert len(raw) == 4 + 1 + 4 + 12 + 4
    assert raw[:4] == MAGIC and raw[4] == KIND_F32
    assert struct.unpack("<I", raw[5:9]) == (3,)
    assert struct.unpack("<3I", raw[9:21]) == (1, 1, 1)
    assert struct.unpack("<f", raw[21:]) == (0.5,)


def test_zero_mask_payload(tmp_path):
    p = tmp_path / "m.mcpt"
    tensor_write(p, np.zeros((2, 2), dtype=np.uint8))
    raw = p.read_bytes()
    assert raw[4] == KIND_U8
    assert raw[-4:] == b"\x00\x00\x00\x00"
    assert len(raw) == 4 + 1 + 4 + 8 + 4


def test_random_image_round_trip_bitwise(tmp_path, rng):
    img = rng.uniform(size=(8, 8, 3)).astype(np.float32).astype(np.float64)
    tensor_write(tmp_path / "i.mcpt", img)
    back = tensor_read(tmp_path / "i.mcpt")
    assert back.dtype == np.float64
    assert np.array_equal(back, img)


def test_bad_magic(tmp_path):
    p = tmp_path / "x.mcpt"
    tensor_write(p, np.zeros((2, 2), dtype=np.uint8))
    p.write_bytes(b"XXXX" + p.read_bytes()[4:])
    with pytest.raises(TensorFileError, match="bad magic"):
        tensor_read(p)


def test_invalid_mask_byte(tmp_path):
    p = tmp_path / "m.mcpt"
    tensor_write(p, np.zeros((2, 2), dtype=np.uint8))
    raw = bytearray(p.read_bytes())
    raw[-1] = 2
    p.write_bytes(bytes(raw))
    with pytest.raises(TensorFileError, match="invalid mask"):
        tensor_read(p)


def test_truncated_payload(tmp_path):
    p = tmp_path / "t.mcpt"
    tensor_write(p, np.zeros((3, 3, 2)))
    p.write_bytes(p.read_bytes()[:-1])
    with pytest.raises(TensorFileError, match="payload"):
        tensor_read(p)


def test_error_carries_path(tmp_path):
    missing = tmp_path / "nope.mcpt"
    with pytest.raises(TensorFileError) as ei:
        tensor_read(missing)
    assert ei.value.path == str(missing)


def test_write_into_missing_dir_reports_path(tmp_path):
    with pytest.raises(TensorFileError):
        tensor_write(tmp_path / "no" / "x.mcpt", np.zeros((2, 2), dtype=np.uint8))


def test_rank_outside_range_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_array(tmp_path / "r4.mcpt", np.zeros((1, 1, 1, 1)), KIND_F32)


def test_validators():
    with pytest.raises(ValueError):
        as_image(np.full((2, 2, 1), 1.5))
    with pytest.raises(ValueError):
        as_image(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        as_mask(np.array([[0, 2]]))
    assert as_mask(np.array([[True, False]])).dtype == np.uint8


@given(h=st.integers(1, 64), w=st.integers(1, 64), c=st.integers(1, 4),
       seed=st.integers(0, 2**32 - 1))
def test_round_trip_property(tmp_path_factory, h, w, c, seed):
    d = tmp_path_factory.mktemp("rt")
    gen = np.random.default_rng(seed)
    img = gen.uniform(size=(h, w, c)).astype(np.float32).astype(np.float64)
    mask = (gen.uniform(size=(h, w)) < 0.5).astype(np.uint8)
    tensor_write(d / "i.mcpt", img)
    tensor_write(d / "m.mcpt", mask)
    assert np.array_equal(tensor_read(d / "i.mcpt"), img)
    assert np.array_equal(tensor_read(d / "m.mcpt"), mask)
    kind, arr = read_array(d / "m.mcpt")
    assert kind == KIND_U8 and arr.shape == (h, w)


def test_split_deterministic():
    a = rng_split(RngStream(7), 2)
    b = rng_split(RngStream(7), 2)
    assert a == b
    assert a[0].stream_id != a[1].stream_id


def test_split_streams_differ():
    s0, s1 = rng_split(RngStream(7), 2)
    x0 = s0.generator().uniform(size=100)
    x1 = s1.generator().uniform(size=100)
    assert not np.array_equal(x0, x1)


def test_split_single_stream_reproducible():
    (s,) = rng_split(RngStream(3), 1)
    assert np.array_equal(s.generator().normal(size=5), s.generator().normal(size=5))
    with pytest.raises(ValueError):
        rng_split(RngStream(3), 0)


def test_pcg64_stream_pinned():
    # regression: first draws of (seed=0, stream=0) under PCG64/SeedSequence
    x = RngStream(0, 0).generator().integers(0, 2**31, size=3)
    assert x.tolist() == [1826701615, 1367864807, 1097657232]
    assert RngStream(0, 1).generator().integers(0, 2**31) != x[0]
