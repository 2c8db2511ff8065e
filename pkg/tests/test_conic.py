import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from dfrc.conic import (ConicProblem, ConicProblemError, PSDBlock, SOCBlock, SolverConfig, Status, psd_factor,
                        quadratic_epigraph, residuals, solve)
from dfrc.conic import io as cio
from dfrc.linalg import smat, svec

METHODS = ["ipm", "admm"]
R2 = 1 / np.sqrt(2)


def scalar_psd_problem():
    return ConicProblem(1, q=[1.0], psd=[PSDBlock([[1.0]], [0.0])], A=[[1.0]], b=[3.0])


def amgm_problem():
    # X = smat(z) for a 2x2 Hermitian X; Re x12 = 1, Im x12 = 0
    return ConicProblem(4, q=[1, 1, 0, 0], psd=[PSDBlock(np.eye(4), np.zeros(4))],
                        A=[[0, 0, R2, 0], [0, 0, 0, R2]], b=[1, 0])


def shifted_quadratic():
    # (x - 2)^2 with x >= 3
    return ConicProblem(1, Q=[[1.0]], q=[-4.0], c=4.0, G=[[-1.0]], h=[-3.0])


@pytest.mark.parametrize("method", METHODS)
def test_scalar_psd_with_equality(method):
    s = solve(scalar_psd_problem(), SolverConfig(method=method))
    assert s.status is Status.OPTIMAL
    assert s.x[0] == pytest.approx(3.0, abs=1e-6)
    assert s.objective == pytest.approx(3.0, abs=1e-6)


@pytest.mark.parametrize("method", METHODS)
def test_hermitian_amgm(method):
    s = solve(amgm_problem(), SolverConfig(method=method))
    assert s.status is Status.OPTIMAL
    assert s.objective == pytest.approx(2.0, abs=1e-6)
    X = smat(s.x)
    np.testing.assert_allclose(np.diag(X).real, [1, 1], atol=1e-6)


@pytest.mark.parametrize("method", METHODS)
def test_quadratic_with_halfspace(method):
    s = solve(shifted_quadratic(), SolverConfig(method=method))
    assert s.status is Status.OPTIMAL
    assert s.x[0] == pytest.approx(3.0, abs=1e-6)
    assert s.objective == pytest.approx(1.0, abs=1e-6)


def test_quadratic_via_epigraph():
    e = quadratic_epigraph(shifted_quadratic())
    s = solve(e.problem)
    assert s.status is Status.OPTIMAL
    assert e.restrict(s.x)[0] == pytest.approx(3.0, abs=1e-6)
    assert s.objective == pytest.approx(1.0, abs=1e-6)


def test_epigraph_linear_passthrough():
    p = ConicProblem(2, q=[1.0, 2.0], G=-np.eye(2), h=[0.0, 0.0])
    e = quadratic_epigraph(p)
    assert e.problem.n == 2 and not e.problem.soc


def test_epigraph_identity_example():
    p = ConicProblem(1, Q=[[1.0]], G=[[-1.0]], h=[-1.0])
    e = quadratic_epigraph(p)
    s = solve(e.problem)
    assert s.status is Status.OPTIMAL
    assert e.restrict(s.x)[0] == pytest.approx(1.0, abs=1e-6)
    assert s.objective == pytest.approx(1.0, abs=1e-6)


def test_psd_factor():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 5))
    Q = A.T @ A
    G = psd_factor(Q)
    assert G.shape == (3, 5)
    np.testing.assert_allclose(G.T @ G, Q, atol=1e-12)
    with pytest.raises(ConicProblemError):
        psd_factor(-np.eye(2))


@pytest.mark.parametrize("method", METHODS)
def test_infeasible_detected(method):
    p = ConicProblem(1, q=[1.0], G=[[-1.0], [1.0]], h=[-1.0, 0.0])
    assert solve(p, SolverConfig(method=method)).status is Status.INFEASIBLE


def test_infeasible_psd():
    # X psd with trace -1
    p = ConicProblem(4, q=[0, 0, 0, 0], psd=[PSDBlock(np.eye(4), np.zeros(4))], A=[[1, 1, 0, 0]], b=[-1.0])
    assert solve(p).status is Status.INFEASIBLE


def test_unbounded_detected():
    p = ConicProblem(1, q=[1.0], G=[[1.0]], h=[0.0])
    assert solve(p).status is Status.UNBOUNDED


def test_soc_problem():
    # min x0 s.t. ||(x1, x2)|| <= x0, x1 = 3, x2 = 4
    p = ConicProblem(3, q=[1, 0, 0], soc=[SOCBlock(np.eye(3), np.zeros(3))], A=[[0, 1, 0], [0, 0, 1]], b=[3, 4])
    for method in METHODS:
        s = solve(p, SolverConfig(method=method))
        assert s.status is Status.OPTIMAL
        assert s.objective == pytest.approx(5.0, abs=1e-6)


def test_max_iterations_reported():
    s = solve(amgm_problem(), SolverConfig(method="ipm", max_iter_ipm=2))
    assert s.status is Status.MAX_ITERATIONS


@pytest.mark.parametrize("kwargs", [
    dict(n=0),
    dict(n=2, Q=np.eye(3)),
    dict(n=2, Q=[[1.0, 1.0], [0.0, 1.0]]),
    dict(n=2, A=np.eye(2)),
    dict(n=2, A=np.eye(2), b=[1.0]),
    dict(n=2, G=np.eye(3), h=np.zeros(3)),
])
def test_problem_validation(kwargs):
    with pytest.raises(ConicProblemError):
        ConicProblem(**kwargs)


def test_block_validation():
    with pytest.raises(ConicProblemError):
        PSDBlock(np.eye(3), np.zeros(3))
    with pytest.raises(ConicProblemError):
        SOCBlock(np.eye(2), np.zeros(3))
    with pytest.raises(ConicProblemError):
        ConicProblem(2, psd=[PSDBlock(np.eye(4), np.zeros(4))])


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(abstol=0)
    with pytest.raises(ValueError):
        SolverConfig(method="newton")


# ---------------------------------------------------------------------------
# random QSDPs against a projected-gradient oracle


def _fista(Q, q, project, x0, iters=20000, tol=1e-13):
    L = 2 * np.linalg.eigvalsh(Q).max()
    x, y, t = x0.copy(), x0.copy(), 1.0
    for _ in range(iters):
        xn = project(y - (2 * Q @ y + q) / L)
        tn = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        y = xn + (t - 1) / tn * (xn - x)
        if np.linalg.norm(xn - x) <= tol * max(1.0, np.linalg.norm(xn)):
            return xn
        x, t = xn, tn
    return x


def _project_psd(z):
    lam, V = np.linalg.eigh(smat(z))
    return svec((V * np.maximum(lam, 0)) @ V.conj().T, check=False)


def random_qsdp(seed):
    """Strongly convex QP over a box (even seeds) or over the Hermitian PSD
    cone (odd seeds), with its projection operator."""
    rng = np.random.default_rng(seed)
    if seed % 2 == 0:
        n = 5
        A = rng.standard_normal((n, n))
        Q = A.T @ A / n + 0.1 * np.eye(n)
        q = rng.standard_normal(n) * 2
        lo, hi = -rng.uniform(0.2, 1, n), rng.uniform(0.2, 1, n)
        G = sp.vstack([sp.eye(n), -sp.eye(n)])
        p = ConicProblem(n, Q=Q, q=q, G=G, h=np.concatenate([hi, -lo]))
        return p, lambda z: np.clip(z, lo, hi)
    m = int(rng.integers(2, 4))
    n = m * m
    A = rng.standard_normal((n, n))
    Q = A.T @ A / n + 0.1 * np.eye(n)
    q = rng.standard_normal(n)
    p = ConicProblem(n, Q=Q, q=q, psd=[PSDBlock(np.eye(n), np.zeros(n))])
    return p, _project_psd


def test_epigraph_matches_projected_gradient_50():
    tight = SolverConfig(abstol=1e-11, reltol=1e-11, feastol=1e-11)
    for seed in range(50):
        p, proj = random_qsdp(seed)
        ref = _fista(p.Q, p.q, proj, np.zeros(p.n))
        e = quadratic_epigraph(p)
        s = solve(e.problem)
        assert s.status is Status.OPTIMAL, seed
        x = e.restrict(s.x)
        assert abs(p.objective(x) - p.objective(ref)) <= 1e-5, seed
        # rank-deficient optima pin x only to about sqrt(gap) at default tolerances
        assert np.linalg.norm(x - ref) <= 1e-4, seed
        xt = e.restrict(solve(e.problem, tight).x)
        assert np.linalg.norm(xt - ref) <= 1e-5, seed
        # solving the quadratic directly agrees as well
        d = solve(p)
        assert abs(d.objective - p.objective(ref)) <= 1e-5, seed


def test_reported_residuals_match_external_check():
    for seed in range(10):
        p, _ = random_qsdp(seed)
        s = solve(p)
        ext = residuals(p, s.x)
        for key, val in ext.items():
            assert val <= 10 * max(s.residuals.get(key, 0.0), SolverConfig().feastol), (seed, key)


def test_determinism():
    p, _ = random_qsdp(3)
    a, b = solve(p), solve(p)
    assert a.status == b.status
    assert abs(a.objective - b.objective) <= 1e-12
    np.testing.assert_array_equal(a.x, b.x)


# ---------------------------------------------------------------------------
# text dump


def test_dump_round_trip(tmp_path):
    p = ConicProblem(4, Q=np.diag([1.0, 2, 0, 0]), q=[1, 1, 0, 0], c=0.5,
                     psd=[PSDBlock(np.eye(4), np.zeros(4))], soc=[SOCBlock(np.eye(4)[:3], [1.0, 0, 0])],
                     A=[[0, 0, R2, 0]], b=[1.0], G=[[-1, 0, 0, 0]], h=[0.1])
    path = tmp_path / "p.txt"
    cio.dump(p, path)
    r = cio.load(path)
    assert r.n == p.n and r.c == p.c
    np.testing.assert_array_equal(r.Q, p.Q)
    np.testing.assert_array_equal(r.A.toarray(), p.A.toarray())
    np.testing.assert_array_equal(r.h, p.h)
    np.testing.assert_array_equal(r.psd[0].F.toarray(), p.psd[0].F.toarray())
    np.testing.assert_array_equal(r.soc[0].g, p.soc[0].g)
    assert cio.dumps(r) == cio.dumps(p)
    assert solve(r).objective == pytest.approx(solve(p).objective, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_dump_round_trip_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    A = rng.standard_normal((n, n))
    p = ConicProblem(n, Q=A.T @ A, q=rng.standard_normal(n), c=float(rng.standard_normal()),
                     G=rng.standard_normal((2, n)), h=rng.standard_normal(2))
    assert cio.dumps(cio.loads(cio.dumps(p))) == cio.dumps(p)


def test_load_rejects_garbage():
    with pytest.raises(ConicProblemError):
        cio.loads("not a problem\n")
