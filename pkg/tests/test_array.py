import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfrc.array import (ArrayGeometry, BeamSpec, DomainError, angle_grid, beam_pattern, cross_correlation,
                        desired_pattern, steering_vector)

from conftest import random_psd

angles = st.floats(-90, 90, allow_nan=False)


def test_steering_broadside_is_all_ones():
    np.testing.assert_allclose(steering_vector(ArrayGeometry(10), 0.0), np.ones(10), atol=0)


def test_steering_half_wavelength_30deg():
    np.testing.assert_allclose(steering_vector(ArrayGeometry(2, 0.5), 30.0), [1, 1j], atol=1e-15)


def test_steering_odd_in_angle():
    g = ArrayGeometry(4)
    np.testing.assert_allclose(steering_vector(g, -23.0), steering_vector(g, 23.0).conj(), atol=1e-15)


def test_steering_matrix_columns():
    g = ArrayGeometry(5)
    A = steering_vector(g, [-10.0, 20.0])
    assert A.shape == (5, 2)
    np.testing.assert_allclose(A[:, 1], steering_vector(g, 20.0))


@pytest.mark.parametrize("bad", [91.0, -90.5, np.nan, np.inf])
def test_steering_rejects_bad_angles(bad):
    with pytest.raises(DomainError):
        steering_vector(ArrayGeometry(4), bad)


@pytest.mark.parametrize("kwargs", [dict(num_elements=0), dict(num_elements=2.5), dict(num_elements=3, element_spacing=0)])
def test_geometry_validation(kwargs):
    with pytest.raises(DomainError):
        ArrayGeometry(**kwargs)


@given(st.integers(1, 16), st.floats(0.1, 2.0), angles)
def test_steering_unit_modulus(M, spacing, theta):
    a = steering_vector(ArrayGeometry(M, spacing), theta)
    assert np.max(np.abs(np.abs(a) - 1.0)) <= 1e-12


def test_pattern_of_scaled_identity_is_total_power():
    g = ArrayGeometry(10)
    R = 1.0 / 10 * np.eye(10)
    np.testing.assert_allclose(beam_pattern(g, R, np.linspace(-90, 90, 7)), 1.0, rtol=1e-12)


def test_pattern_of_matched_rank_one():
    g = ArrayGeometry(10)
    a = steering_vector(g, 25.0)
    R = 0.1 * np.outer(a, a.conj())
    assert beam_pattern(g, R, 25.0) == pytest.approx(10.0, rel=1e-12)


def test_pattern_matches_triple_sum():
    rng = np.random.default_rng(3)
    g = ArrayGeometry(3)
    R = random_psd(rng, 3)
    a = steering_vector(g, 17.0)
    ref = sum(np.conj(a[i]) * R[i, j] * a[j] for i in range(3) for j in range(3))
    assert beam_pattern(g, R, 17.0) == pytest.approx(ref.real, rel=1e-12)


def test_pattern_rejects_non_hermitian():
    with pytest.raises(ValueError):
        beam_pattern(ArrayGeometry(2), np.array([[1.0, 1.0], [0.0, 1.0]]), 0.0)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), angles)
def test_pattern_nonnegative(seed, M, theta):
    rng = np.random.default_rng(seed)
    R = random_psd(rng, M, rank=rng.integers(1, M + 1))
    assert beam_pattern(ArrayGeometry(M), R, theta) >= -1e-10


def test_cross_correlation_diagonal_is_pattern():
    rng = np.random.default_rng(4)
    g = ArrayGeometry(6)
    R = random_psd(rng, 6)
    assert cross_correlation(g, R, 12.0, 12.0) == pytest.approx(beam_pattern(g, R, 12.0), rel=1e-12)


def test_cross_correlation_identity_example():
    assert cross_correlation(ArrayGeometry(2), np.eye(2), 0.0, 30.0) == pytest.approx(1 - 1j, abs=1e-15)


def test_cross_correlation_hermitian_symmetry_100_draws():
    rng = np.random.default_rng(5)
    g = ArrayGeometry(7)
    for _ in range(100):
        R = random_psd(rng, 7)
        t1, t2 = rng.uniform(-90, 90, 2)
        assert abs(cross_correlation(g, R, t1, t2) - np.conj(cross_correlation(g, R, t2, t1))) <= 1e-10


def test_desired_pattern_examples(ref_spec):
    assert desired_pattern(ref_spec, 0.0) == 1.0
    assert desired_pattern(ref_spec, 45.0) == 1.0
    assert desired_pattern(ref_spec, -45.0) == 1.0
    assert desired_pattern(ref_spec, 20.0) == 0.0
    assert desired_pattern(ref_spec, 45.1) == 0.0


def test_desired_pattern_integral(ref_spec):
    res = 0.1
    total = np.sum(desired_pattern(ref_spec, ref_spec.grid)) * res
    assert abs(total - ref_spec.P * ref_spec.beam_width) <= res * ref_spec.P + 1e-9


def test_angle_grid_examples():
    assert angle_grid(-90, 90, 0.1).size == 1801
    np.testing.assert_allclose(angle_grid(0, 1, 0.5), [0, 0.5, 1])
    np.testing.assert_allclose(angle_grid(0, 1, 0.3), [0, 0.3, 0.6, 0.9])
    g = angle_grid(-90, 90, 0.1)
    assert g[0] == -90 and g[-1] == 90 and g[900] == 0


@pytest.mark.parametrize("lo,hi,res", [(1, 0, 0.1), (0, 1, 0), (0, 0, 0.1)])
def test_angle_grid_validation(lo, hi, res):
    with pytest.raises(DomainError):
        angle_grid(lo, hi, res)


def test_beam_spec_validation():
    grid = angle_grid(-90, 90, 1.0)
    with pytest.raises(DomainError):
        BeamSpec((), 10.0, grid)
    with pytest.raises(DomainError):
        BeamSpec((0.0,), 0.0, grid)
    with pytest.raises(DomainError):
        BeamSpec((100.0,), 10.0, grid)
    spec = BeamSpec.reference_default()
    assert (spec.P, spec.L) == (3, 1801)
