import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dfrc.matio import MatrixFormatError, format_matrix, parse_matrix, read_matrix, write_matrix

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_format_example():
    assert format_matrix(np.array([[1 + 2j, 0.5]])) == "1 2\n1.0 2.0 0.5 0.0\n"


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4), st.just(2)), elements=finite))
def test_round_trip_is_exact(a):
    X = a[..., 0] + 1j * a[..., 1]
    np.testing.assert_array_equal(parse_matrix(format_matrix(X)), X)


def test_file_round_trip(tmp_path):
    X = np.arange(6).reshape(2, 3) * (1 - 0.5j)
    write_matrix(tmp_path / "m.txt", X)
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.txt"), X)


def test_numpy_scalars_are_written_as_plain_numbers():
    X = np.array([[np.float64(0.1) + 0j]])
    assert "np." not in format_matrix(X)


@pytest.mark.parametrize("text", ["", "2 2\n1 0 1 0\n", "1 1\n1\n", "a b\n", "1 1\n1 x\n", "1 1\n1 0\n2 0\n"])
def test_parse_errors(text):
    with pytest.raises(MatrixFormatError):
        parse_matrix(text)
