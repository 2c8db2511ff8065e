import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfrc.array import ArrayGeometry, BeamSpec, beam_pattern
from dfrc.objective import build_radar_loss, direct_loss, eval_loss, minimize_alpha

from conftest import random_psd


def test_zero_point_has_zero_loss(ref_obj):
    assert eval_loss(ref_obj, np.zeros((10, 10)), 0.0) == 0.0


def test_single_point_example():
    g = ArrayGeometry(1)
    spec = BeamSpec((0.0,), 10.0, np.array([0.0]), cross_weight=0.0)
    obj = build_radar_loss(g, spec)
    assert eval_loss(obj, np.array([[1.0]]), 2.0) == pytest.approx(1.0, rel=1e-14)


def test_quadratic_form_matches_direct_200_draws(ref_geom, ref_spec, ref_obj):
    rng = np.random.default_rng(11)
    for _ in range(200):
        R = random_psd(rng, 10, rank=rng.integers(1, 11), scale=rng.uniform(0.01, 2))
        alpha = rng.uniform(-1, 3)
        q = eval_loss(ref_obj, R, alpha)
        d = direct_loss(ref_geom, ref_spec, R, alpha)
        assert abs(q - d) <= 1e-8 * abs(d)


def test_q_is_psd(ref_obj):
    ev = np.linalg.eigvalsh(ref_obj.Q)
    assert ev.min() >= -1e-9 * ev.max()
    np.testing.assert_array_equal(ref_obj.Q, ref_obj.Q.T)


def test_cross_weight_scales_second_term():
    g = ArrayGeometry(6)
    grid = np.linspace(-90, 90, 61)
    rng = np.random.default_rng(2)
    R = random_psd(rng, 6)
    l0 = eval_loss(build_radar_loss(g, BeamSpec((-30.0, 20.0), 10.0, grid, 0.0)), R, 1.0)
    l1 = eval_loss(build_radar_loss(g, BeamSpec((-30.0, 20.0), 10.0, grid, 1.0)), R, 1.0)
    l2 = eval_loss(build_radar_loss(g, BeamSpec((-30.0, 20.0), 10.0, grid, 2.0)), R, 1.0)
    assert l2 - l0 == pytest.approx(2 * (l1 - l0), rel=1e-10)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 10.0))
def test_loss_nonnegative_and_homogeneous(seed, c):
    rng = np.random.default_rng(seed)
    g = ArrayGeometry(4)
    spec = BeamSpec((-20.0, 30.0), 10.0, np.linspace(-90, 90, 37))
    obj = build_radar_loss(g, spec)
    R = random_psd(rng, 4, rank=rng.integers(1, 5))
    alpha = rng.uniform(-2, 2)
    base = eval_loss(obj, R, alpha)
    assert base >= -1e-9
    assert eval_loss(obj, c * R, c * alpha) == pytest.approx(c**2 * base, rel=1e-9, abs=1e-12)


def test_minimize_alpha_zero_desired():
    g = ArrayGeometry(3)
    spec = BeamSpec((0.0,), 2.0, np.array([-60.0, 60.0]))
    obj = build_radar_loss(g, spec)
    alpha, _ = minimize_alpha(obj, np.eye(3))
    assert alpha == 0.0


def test_minimize_alpha_perfect_match():
    g = ArrayGeometry(1)
    spec = BeamSpec((0.0,), 10.0, np.array([-2.0, 0.0, 3.0]))
    obj = build_radar_loss(g, spec)
    alpha, loss = minimize_alpha(obj, np.array([[1.0]]))
    assert alpha == pytest.approx(1.0)
    assert loss == pytest.approx(0.0, abs=1e-15)


def test_minimize_alpha_beats_neighbours(ref_obj):
    rng = np.random.default_rng(9)
    for _ in range(20):
        R = random_psd(rng, 10, scale=0.1)
        a, loss = minimize_alpha(ref_obj, R)
        assert loss <= eval_loss(ref_obj, R, a + 0.1)
        assert loss <= eval_loss(ref_obj, R, a - 0.1)
        pat = beam_pattern(ref_obj.geom, R, ref_obj.spec.grid)
        d = ref_obj.desired
        assert a == pytest.approx(d @ pat / (d @ d), rel=1e-10)


def test_eval_loss_shape_check(ref_obj):
    with pytest.raises(ValueError):
        eval_loss(ref_obj, np.eye(3), 1.0)
