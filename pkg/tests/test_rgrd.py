import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from igt import rgrd
from igt.errors import FormatError


def test_small_grid_layout():
    a = np.arange(6, dtype=float).reshape(2, 3)
    buf = rgrd.encode(a)
    assert len(buf) == 12 + 2 * 8 + 6 * 8 == 76
    assert buf[:4] == b"RGRD"
    assert struct.unpack_from("<HHHH", buf, 4) == (1, 0, 2, 0)
    assert struct.unpack_from("<2Q", buf, 12) == (2, 3)
    np.testing.assert_array_equal(rgrd.decode(buf), a)


def test_nan_and_signed_zero_bit_exact():
    a = np.array([np.nan, -0.0, np.inf, -np.inf, 5e-324])
    b = rgrd.decode(rgrd.encode(a))
    assert a.tobytes() == b.tobytes()


@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=1, max_dims=4, max_side=5),
                  elements=st.floats(allow_nan=True, allow_infinity=True)))
def test_roundtrip_bit_exact(a):
    assert rgrd.decode(rgrd.encode(a)).tobytes() == a.tobytes()


def test_file_roundtrip(tmp_path):
    a = np.linspace(0, 1, 24).reshape(2, 3, 4)
    rgrd.write_grid(tmp_path / "a.rgrd", a)
    assert rgrd.read_grid(tmp_path / "a.rgrd").tobytes() == a.tobytes()


@pytest.mark.parametrize("mutate", [
    lambda b: b"XGRD" + b[4:],
    lambda b: b[:4] + struct.pack("<H", 2) + b[6:],
    lambda b: b[:6] + struct.pack("<H", 1) + b[8:],
    lambda b: b[:8] + struct.pack("<H", 0) + b[10:],
    lambda b: b[:8] + struct.pack("<H", 9) + b[10:],
    lambda b: b[:-1],
    lambda b: b + b"\0" * 8,
    lambda b: b[:14],
    lambda b: b[:6],
])
def test_malformed_buffers_rejected(mutate):
    with pytest.raises(FormatError):
        rgrd.decode(mutate(rgrd.encode(np.ones((2, 3)))))


def test_format_error_is_os_error():
    assert issubclass(FormatError, OSError)


def test_scalar_rejected():
    with pytest.raises(FormatError):
        rgrd.encode(np.float64(1.0))
