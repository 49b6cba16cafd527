import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given, strategies as st

from nlfctn.tensor_io import (
    load_mask,
    load_tensor,
    make_mask,
    save_mask,
    save_tensor,
)


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    t = rng.standard_normal((5, 4, 3))
    path = tmp_path / "t.npy"
    save_tensor(path, t)
    back = load_tensor(path)
    nptest.assert_array_equal(back, t)
    assert back.dtype == np.float64


def test_numpy_reads_our_files(tmp_path):
    t = np.random.default_rng(1).random((3, 7))
    path = tmp_path / "ours.npy"
    save_tensor(path, t)
    nptest.assert_array_equal(np.load(path), t)


def test_we_read_numpy_files(tmp_path):
    t = np.random.default_rng(2).random((4, 2, 6))
    path = tmp_path / "theirs.npy"
    np.save(path, t)
    nptest.assert_array_equal(load_tensor(path), t)


def test_we_read_fortran_order_files(tmp_path):
    t = np.asfortranarray(np.random.default_rng(3).random((4, 5)))
    path = tmp_path / "f.npy"
    np.save(path, t)
    back = load_tensor(path)
    nptest.assert_array_equal(back, t)
    assert back.flags["C_CONTIGUOUS"]


def test_magic_error_names_byte_offset(tmp_path):
    t = np.zeros((2, 2))
    path = tmp_path / "bad.npy"
    save_tensor(path, t)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="byte offset 0"):
        load_tensor(path)
    save_tensor(path, t)
    raw = bytearray(path.read_bytes())
    raw[3] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="byte offset 3"):
        load_tensor(path)


def test_unsupported_version_rejected(tmp_path):
    t = np.zeros((2, 2))
    path = tmp_path / "v2.npy"
    save_tensor(path, t)
    raw = bytearray(path.read_bytes())
    raw[6] = 2  # major version byte
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="version"):
        load_tensor(path)


def test_truncated_payload_rejected(tmp_path):
    t = np.random.default_rng(4).random((3, 3))
    path = tmp_path / "short.npy"
    save_tensor(path, t)
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="truncated"):
        load_tensor(path)


def test_oversized_payload_rejected(tmp_path):
    t = np.random.default_rng(5).random((3, 3))
    path = tmp_path / "long.npy"
    save_tensor(path, t)
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(ValueError, match="oversized"):
        load_tensor(path)


def test_non_float64_dtype_rejected(tmp_path):
    path = tmp_path / "f4.npy"
    np.save(path, np.zeros((2, 2), dtype="<f4"))
    with pytest.raises(ValueError, match="<f4"):
        load_tensor(path)


def test_zero_sized_mode_rejected(tmp_path):
    with pytest.raises(ValueError):
        save_tensor(tmp_path / "z.npy", np.zeros((3, 0, 2)))
    path = tmp_path / "z2.npy"
    np.save(path, np.zeros((3, 0, 2)))
    with pytest.raises(ValueError):
        load_tensor(path)


def test_scalar_rejected(tmp_path):
    with pytest.raises(ValueError):
        save_tensor(tmp_path / "s.npy", np.float64(3.0))


def test_missing_file_error(tmp_path):
    with pytest.raises((FileNotFoundError, OSError)):
        load_tensor(tmp_path / "nope.npy")


def test_garbage_file_rejected(tmp_path):
    path = tmp_path / "garbage.npy"
    path.write_bytes(b"not a tensor at all")
    with pytest.raises(ValueError):
        load_tensor(path)


def test_mask_round_trip(tmp_path):
    mask = make_mask((6, 5, 2), missing_rate=0.5, seed=0)
    path = tmp_path / "m.npy"
    save_mask(path, mask)
    back = load_mask(path)
    nptest.assert_array_equal(back, mask)
    assert back.dtype == bool


def test_load_mask_rejects_non_binary(tmp_path):
    path = tmp_path / "nb.npy"
    save_tensor(path, np.full((3, 3), 0.5))
    with pytest.raises(ValueError, match="0"):
        load_mask(path)


@pytest.mark.parametrize("shape,rate,expected_missing", [
    ((10, 10), 0.95, 95),
    ((10,), 0.7, 7),
    ((2, 4), 0.5, 4),
    ((5, 5), 0.0, 0),
    ((4, 25), 0.9, 90),
])
def test_make_mask_exact_counts(shape, rate, expected_missing):
    mask = make_mask(shape, missing_rate=rate, seed=3)
    assert mask.shape == shape
    assert mask.dtype == bool
    assert int((~mask).sum()) == expected_missing


def test_make_mask_deterministic_and_seed_sensitive():
    a = make_mask((8, 8, 3), 0.6, seed=1)
    b = make_mask((8, 8, 3), 0.6, seed=1)
    c = make_mask((8, 8, 3), 0.6, seed=2)
    nptest.assert_array_equal(a, b)
    assert (a != c).any()
    assert (~a).sum() == (~c).sum()


def test_make_mask_rate_range():
    with pytest.raises(ValueError):
        make_mask((4, 4), -0.1, seed=0)
    with pytest.raises(ValueError):
        make_mask((4, 4), 1.0, seed=0)
    none_missing = make_mask((4, 4), 0.0, seed=0)
    assert none_missing.all()


@given(
    st.tuples(st.integers(2, 6), st.integers(2, 6), st.integers(1, 4)),
    st.floats(0.0, 1.0, exclude_max=True, allow_nan=False),
    st.integers(0, 100),
)
def test_make_mask_count_property(shape, rate, seed):
    mask = make_mask(shape, rate, seed=seed)
    total = int(np.prod(shape))
    import math
    assert int((~mask).sum()) == int(math.floor(round(rate * total, 9)))
