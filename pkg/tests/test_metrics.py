import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfrc.array import ArrayGeometry
from dfrc.design import Precoder
from dfrc.metrics import (TRIAL_HEADER, MissedDetection, TrialReport, angle_rmse, beampattern_mse, fairness,
                          feasibility_probability, in_out_beam_ratio, interference_power, match_angles,
                          radar_inr, reports_to_csv, sinr_closed_form, sum_rate)

from conftest import random_psd

GOLDEN_HEADER = ("method,K,gamma_db,trial,seed,status,loss,alpha,mse,fairness_db,sumrate,inr_db,wall_ms")


def test_sinr_zf_case():
    H = np.eye(2, 3)
    p = np.array([2.0, 3.0])
    Wc = np.vstack([np.diag(np.sqrt(p)), np.zeros((1, 2))])
    Wr = np.zeros((3, 3))
    Wr[2, 2] = 1.0  # radiates only where the users see nothing
    np.testing.assert_allclose(sinr_closed_form(H, (Wc, Wr), 0.5), p / 0.5)


def test_sinr_scalar_example():
    assert sinr_closed_form(np.array([[1.0]]), (np.array([[1.0]]), np.array([[1.0]])), 1.0)[0] == pytest.approx(0.5)


def test_sinr_accepts_precoder_and_matches_loop():
    rng = np.random.default_rng(0)
    K, M = 3, 5
    H = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
    pre = Precoder(rng.standard_normal((M, K)) + 0j, rng.standard_normal((M, M)) + 0j)
    got = sinr_closed_form(H, pre, 0.1)
    for k in range(K):
        sig = abs(H[k] @ pre.Wc[:, k]) ** 2
        rest = sum(abs(H[k] @ pre.Wc[:, i]) ** 2 for i in range(K) if i != k)
        rest += np.sum(np.abs(H[k] @ pre.Wr) ** 2)
        assert got[k] == pytest.approx(sig / (rest + 0.1), rel=1e-12)
    sig, itf = interference_power(H, pre)
    np.testing.assert_allclose(got, sig / (itf + 0.1))


def test_sum_rate_and_fairness_examples():
    assert sum_rate([1, 1]) == pytest.approx(2.0)
    assert sum_rate([3]) == pytest.approx(2.0)
    assert fairness([0, 5]) == 0.0
    with pytest.raises(ValueError):
        sum_rate([-1])
    with pytest.raises(ValueError):
        fairness([])


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=6), st.integers(0, 5), st.floats(0, 100))
def test_sum_rate_monotone(gamma, idx, bump):
    g = np.array(gamma)
    h = g.copy()
    h[idx % g.size] += bump
    assert sum_rate(h) >= sum_rate(g)
    assert fairness(h) >= fairness(g)


def test_mse_examples():
    rng = np.random.default_rng(1)
    g = ArrayGeometry(4)
    grid = np.linspace(-90, 90, 19)
    R, R0 = random_psd(rng, 4), random_psd(rng, 4)
    assert beampattern_mse(R0, R0, grid, g) == 0.0
    assert beampattern_mse(R, R0, grid, g) == pytest.approx(beampattern_mse(R0, R, grid, g))
    assert beampattern_mse(np.array([[3.0]]), np.array([[1.0]]), [0.0]) == pytest.approx(4.0)


def test_radar_inr():
    H = np.array([[1.0, 0.0, 0.0]])
    Wr = np.diag([0.0, 1.0, 1.0])
    assert radar_inr(H, Wr, 0.01) == 0.0
    assert radar_inr(H, np.eye(3), 0.5) == pytest.approx(2.0)


def test_match_angles_and_rmse():
    np.testing.assert_allclose(match_angles([40.2, -39.5, 0.1], [-40, 0, 40]), [-39.5, 0.1, 40.2])
    with pytest.raises(MissedDetection):
        match_angles([0.0, 10.0], [-40, 0, 40])
    with pytest.raises(MissedDetection):
        match_angles([0.0, 10.0, 40.0], [-40, 0, 40])
    res = angle_rmse([[-40.0, 0.0, 41.0], [-40.0, 1.0, 40.0], [0.0, 1.0, 2.0]], [-40, 0, 40])
    assert res.trials_used == 2 and res.missed == 1
    assert res.rmse == pytest.approx(np.sqrt(2 / 6))
    single = angle_rmse([-40.0, 0.0, 40.0], [-40, 0, 40])
    assert single.rmse == 0.0 and single.trials_used == 1


def test_feasibility_probability_counts_failures_separately():
    s = feasibility_probability(["Feasible", "Infeasible", "SolverFailure", "Optimal", "TightnessViolation"])
    assert (s.feasible, s.infeasible, s.failures, s.trials) == (2, 1, 2, 5)
    assert s.fraction == pytest.approx(0.4)
    with pytest.raises(ValueError):
        feasibility_probability([])


def test_trial_report_golden_header_and_row():
    assert ",".join(TRIAL_HEADER) == GOLDEN_HEADER
    r = TrialReport("sdr", 2, 12.0, 3, 42, "Feasible", 0.25, 2.5, float("nan"), 12.0, 8.1, -float("inf"), 1.5)
    text = reports_to_csv([r])
    assert text.splitlines()[0] == GOLDEN_HEADER
    assert text.splitlines()[1] == "sdr,2,12,3,42,Feasible,0.25,2.5,nan,12,8.1,-inf,1.5"
    assert reports_to_csv([r], with_wall=False).splitlines()[1].endswith(",-inf,")


def test_in_out_beam_ratio():
    g = ArrayGeometry(4)
    grid = np.linspace(-90, 90, 181)
    assert in_out_beam_ratio(g, np.eye(4) / 4, grid, [0.0], 10.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        in_out_beam_ratio(g, np.eye(4), grid, [0.0], 400.0)
