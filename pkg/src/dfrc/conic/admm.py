"""Operator-splitting (ADMM) solver for the same conic QP form.

Slower and less accurate than the interior-point method, but it never needs
strictly interior iterates, which makes it a useful fallback when the IPM
breaks down numerically. Iteration follows the usual relaxed ADMM scheme on

    minimize 1/2 x^T P x + q^T x   s.t.  A x + s = b,  s in {0}^p x K

with adaptive penalty rho and infeasibility detection from successive dual
iterate differences.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .cones import NonnegCone, PSDCone, SOCCone
from .problem import ConicProblem, ConicSolution, SolverConfig, Status

SIGMA = 1e-6
RELAX = 1.6
RHO_EQ_FACTOR = 1e3


def _cones(problem: ConicProblem):
    blocks, rhs, cones = [], [], []
    if problem.A.shape[0]:
        blocks.append(problem.A)
        rhs.append(problem.b)
        cones.append(None)  # zero cone
    if problem.G.shape[0]:
        blocks.append(problem.G)
        rhs.append(problem.h)
        cones.append(NonnegCone(problem.G.shape[0]))
    for blk in problem.soc:
        blocks.append(-blk.F)
        rhs.append(blk.g)
        cones.append(SOCCone(blk.g.size))
    for blk in problem.psd:
        blocks.append(-blk.F)
        rhs.append(blk.g)
        cones.append(PSDCone(blk.order))
    sizes = [B.shape[0] for B in blocks]
    offs = np.cumsum([0] + sizes)
    slices = [slice(offs[i], offs[i + 1]) for i in range(len(blocks))]
    A = sp.vstack(blocks, format="csr").toarray() if blocks else np.zeros((0, problem.n))
    b = np.concatenate(rhs) if rhs else np.zeros(0)
    return A, b, cones, slices


def solve_admm(problem: ConicProblem, cfg: SolverConfig) -> ConicSolution:
    n = problem.n
    P = 2.0 * problem.Q
    q = problem.q
    A, b, cones, slices = _cones(problem)
    m = A.shape[0]

    def project(v):
        out = np.empty_like(v)
        for c, sl in zip(cones, slices):
            out[sl] = 0.0 if c is None else c.project(v[sl])
        return out

    eq_mask = np.zeros(m, dtype=bool)
    for c, sl in zip(cones, slices):
        if c is None:
            eq_mask[sl] = True

    rho0 = 0.1

    def factor(rho_s):
        rho = np.where(eq_mask, RHO_EQ_FACTOR * rho_s, rho_s)
        K = np.zeros((n + m, n + m))
        K[:n, :n] = P + SIGMA * np.eye(n)
        K[:n, n:] = A.T
        K[n:, :n] = A
        K[n:, n:] = -np.diag(1.0 / rho)
        return rho, la.lu_factor(K, check_finite=False)

    rho_s = rho0
    rho, lu = factor(rho_s)
    x = np.zeros(n)
    s = project(b.copy())
    y = np.zeros(m)
    status = Status.MAX_ITERATIONS
    info = {}
    eps_abs, eps_rel = cfg.abstol, cfg.reltol
    it = 0
    for it in range(1, cfg.max_iter_admm + 1):
        x_prev, y_prev = x, y
        rhs = np.concatenate([SIGMA * x - q, b - s + y / rho])
        sol = la.lu_solve(lu, rhs, check_finite=False)
        xt, nu = sol[:n], sol[n:]
        st = s - (nu + y) / rho
        x = RELAX * xt + (1 - RELAX) * x
        sr = RELAX * st + (1 - RELAX) * s
        s_new = project(sr + y / rho)
        y = y + rho * (sr - s_new)
        s = s_new

        if it % 10 and it != cfg.max_iter_admm:
            continue
        Ax = A @ x
        Px = P @ x
        Aty = A.T @ y
        rp = Ax + s - b
        rd = Px + q - Aty  # stationarity with y in the polar cone
        np_, nd = np.linalg.norm(rp, np.inf), np.linalg.norm(rd, np.inf)
        sp_ = max(np.linalg.norm(Ax, np.inf), np.linalg.norm(s, np.inf), np.linalg.norm(b, np.inf))
        sd = max(np.linalg.norm(Px, np.inf), np.linalg.norm(Aty, np.inf), np.linalg.norm(q, np.inf))
        info = {"pres": float(np_), "dres": float(nd)}
        if np_ <= eps_abs + eps_rel * sp_ and nd <= eps_abs + eps_rel * sd:
            status = Status.OPTIMAL
            break
        dy = y - y_prev
        ndy = np.linalg.norm(dy, np.inf)
        if ndy > 0 and np.linalg.norm(A.T @ dy, np.inf) <= cfg.infeastol * ndy \
                and b @ dy > cfg.infeastol * ndy:
            # -dy is a certificate: A^T z = 0, b^T z < 0, z in K*
            status = Status.INFEASIBLE
            break
        dx = x - x_prev
        ndx = np.linalg.norm(dx, np.inf)
        if ndx > 0 and q @ dx < -cfg.infeastol * ndx \
                and np.linalg.norm(P @ dx, np.inf) <= cfg.infeastol * ndx \
                and np.linalg.norm(A @ dx + project(-A @ dx), np.inf) <= cfg.infeastol * ndx:
            status = Status.UNBOUNDED
            break
        if it % 50 == 0:
            ratio = np.sqrt((np_ / max(sp_, 1e-12)) / max(nd / max(sd, 1e-12), 1e-300))
            new = float(np.clip(rho_s * ratio, 1e-6, 1e6))
            if new > 5 * rho_s or new < rho_s / 5:
                rho_s = new
                rho, lu = factor(rho_s)
    obj = problem.objective(x)
    return ConicSolution(status, x, obj, info, it, y=None, z=-y, method="admm")
