"""Primal-dual interior-point method for conic QPs.

Standard form used internally:

    minimize    1/2 x^T P x + q^T x
    subject to  A x = b,   G x + s = h,   s in K

with K a product of nonnegative-orthant, second-order and Hermitian PSD cones.
The iteration runs on the homogeneous embedding (tau, kappa) so that
infeasibility and unboundedness show up as certificates instead of diverging
iterates. Search directions use Nesterov-Todd scaling with a Mehrotra
predictor-corrector. The KKT systems are dense; problems here have a few
hundred variables at most.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .cones import NonnegCone, NotInteriorError, PSDCone, SOCCone  # noqa: F401
from .problem import ConicProblem, ConicSolution, SolverConfig, Status

log = logging.getLogger(__name__)

STEP_FRACTION = 0.99


class _StandardForm:
    """Stacked cone data for one problem."""

    def __init__(self, problem: ConicProblem):
        n = problem.n
        self.n = n
        self.P = 2.0 * problem.Q
        self.q = problem.q.copy()
        self.A = problem.A.toarray()
        self.b = problem.b.copy()
        blocks, rhs, cones = [], [], []
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
        self.cones = cones
        self.Gblocks = [sp.csr_matrix(B) for B in blocks]
        self.G = sp.vstack(blocks, format="csr") if blocks else sp.csr_matrix((0, n))
        self.h = np.concatenate(rhs) if rhs else np.zeros(0)
        offs = np.cumsum([0] + [c.dim for c in cones])
        self.slices = [slice(offs[i], offs[i + 1]) for i in range(len(cones))]
        self.m = int(offs[-1])
        self.degree = sum(c.degree for c in cones)
        self.e = np.concatenate([c.identity() for c in cones]) if cones else np.zeros(0)

    def per_cone(self, fn, *vecs):
        return np.concatenate([fn(c, *(v[sl] for v in vecs)) for c, sl in zip(self.cones, self.slices)]) \
            if self.cones else np.zeros(0)

    def update_scaling(self, s, z):
        for c, sl in zip(self.cones, self.slices):
            c.update(s[sl], z[sl])

    def max_step(self, x, dx):
        step = np.inf
        for c, sl in zip(self.cones, self.slices):
            step = min(step, c.max_step(x[sl], dx[sl]))
        return step

    def shift_into_interior(self, x):
        """Return x + (1 + a) e with a the worst cone violation, if x is not interior."""
        if not self.cones:
            return x
        a = max(c.shift_into(x[sl]) for c, sl in zip(self.cones, self.slices))
        if a >= -1e-8:
            return x + (1.0 + a) * self.e
        return x


class _KKT:
    """Solver for the Newton system

        P dx + A^T dy + G^T dz = rx
        A dx               = ry
        G dx - W^T W dz    = rz

    In scaled variables u = W dz and Gs = W^{-T} G the last row reads
    Gs dx - u = W^{-T} rz, and eliminating u leaves the positive semidefinite
    block P + Gs^T Gs. Working with Gs avoids forming (W^T W)^{-1} explicitly,
    which loses all accuracy once W is badly conditioned near the solution.
    """

    def __init__(self, sf: _StandardForm, identity_scaling: bool = False):
        n, p = sf.n, sf.A.shape[0]
        self.sf = sf
        self.n, self.p = n, p
        self.identity_scaling = identity_scaling
        self.full_lu = None
        H = sf.P.copy()
        self.Gs = []
        for c, Gb in zip(sf.cones, sf.Gblocks):
            cols = np.unique(Gb.indices)
            dense = Gb[:, cols].toarray()
            Gs = dense if identity_scaling else c.scale_s_inv_cols(dense)
            self.Gs.append((cols, Gs))
            H[np.ix_(cols, cols)] += Gs.T @ Gs
        H = 0.5 * (H + H.T)
        scale = max(1.0, float(np.max(np.abs(np.diag(H))))) if n else 1.0
        self.reg = 1e-13 * scale
        K = np.zeros((n + p, n + p))
        K[:n, :n] = H
        K[:n, n:] = sf.A.T
        K[n:, :n] = sf.A
        Kreg = K.copy()
        Kreg[np.arange(n), np.arange(n)] += self.reg
        Kreg[n + np.arange(p), n + np.arange(p)] -= self.reg
        self.lu = la.lu_factor(Kreg, check_finite=False)

    def _gs(self, dx):
        return np.concatenate([Gs @ dx[cols] for cols, Gs in self.Gs]) if self.Gs else np.zeros(0)

    def _gst(self, u):
        out = np.zeros(self.n)
        for (cols, Gs), sl in zip(self.Gs, self.sf.slices):
            out[cols] += Gs.T @ u[sl]
        return out

    def _per_cone(self, name, v):
        if self.identity_scaling or not self.sf.cones:
            return v
        return np.concatenate([getattr(c, name)(v[sl]) for c, sl in zip(self.sf.cones, self.sf.slices)])

    def _reduced(self, rx, ry, rzs):
        rhs = np.concatenate([rx + self._gst(rzs), ry])
        sol = la.lu_solve(self.lu, rhs, check_finite=False)
        dx, dy = sol[:self.n], sol[self.n:]
        return dx, dy, self._gs(dx) - rzs

    def _full_factor(self):
        """LU of the unreduced scaled system [[P, A^T, Gs^T], [A, 0, 0], [Gs, 0, -I]].

        Its condition number grows like that of Gs, not its square, so it
        stays usable close to the solution where the reduced block does not.
        """
        sf = self.sf
        n, p, m = self.n, self.p, sf.m
        Gs = np.zeros((m, n))
        for (cols, B), sl in zip(self.Gs, sf.slices):
            Gs[sl, cols] = B
        K = np.zeros((n + p + m, n + p + m))
        K[:n, :n] = sf.P
        K[:n, n:n + p] = sf.A.T
        K[n:n + p, :n] = sf.A
        K[:n, n + p:] = Gs.T
        K[n + p:, :n] = Gs
        K[n + p:, n + p:] = -np.eye(m)
        delta = 1e-14 * max(1.0, float(np.max(np.abs(K))))
        K[np.arange(n), np.arange(n)] += delta
        K[n + np.arange(p), n + np.arange(p)] -= delta
        self.full_lu = la.lu_factor(K, check_finite=False)

    def _full(self, rx, ry, rzs):
        n, p = self.n, self.p
        sol = la.lu_solve(self.full_lu, np.concatenate([rx, ry, rzs]), check_finite=False)
        return sol[:n], sol[n:n + p], sol[n + p:]

    def solve(self, rx, ry, rz, refine: int = 3):
        """Return (dx, dy, dz). Iterative refinement runs on the full scaled
        system; if the reduced factorization cannot reach the target accuracy
        the unreduced system is factored and used instead."""
        sf = self.sf
        rzs = self._per_cone("scale_s_inv", rz)
        inner = self._full if self.full_lu is not None else self._reduced
        dx, dy, u = inner(rx, ry, rzs)
        norm_r = 1.0 + max(_norm(rx), _norm(ry), _norm(rzs))
        for attempt in range(2):
            for _ in range(refine + 1):
                ex = rx - (sf.P @ dx + sf.A.T @ dy + self._gst(u))
                ey = ry - sf.A @ dx
                ez = rzs - (self._gs(dx) - u)
                err = max(_norm(ex), _norm(ey), _norm(ez))
                if err <= 1e-13 * norm_r:
                    break
                cx, cy, cu = inner(ex, ey, ez)
                dx, dy, u = dx + cx, dy + cy, u + cu
            if err <= 1e-10 * norm_r or self.full_lu is not None or attempt:
                break
            self._full_factor()
            inner = self._full
            dx, dy, u = inner(rx, ry, rzs)
        return dx, dy, self._per_cone("scale_z_inv", u)


def _norm(v):
    return float(np.linalg.norm(v)) if v.size else 0.0


def solve_ipm(problem: ConicProblem, cfg: SolverConfig) -> ConicSolution:
    sf = _StandardForm(problem)
    P, q, A, b, G, h = sf.P, sf.q, sf.A, sf.b, sf.G, sf.h
    nu = sf.degree

    # starting point from the identity-scaled KKT system
    kkt0 = _KKT(sf, identity_scaling=True)
    x, y, zneg = kkt0.solve(-q, b, h)
    # with W = I the third block row reads G x - z = h, so s = h - G x = -z
    s = sf.shift_into_interior(-zneg)
    z = sf.shift_into_interior(zneg)
    tau, kappa = 1.0, 1.0

    nb, nh, nq = 1.0 + _norm(b), 1.0 + _norm(h), 1.0 + _norm(q)
    status = Status.MAX_ITERATIONS
    info = {}
    it = 0
    for it in range(cfg.max_iter_ipm + 1):
        Px = P @ x
        xPx = float(x @ Px)
        rx = Px + A.T @ y + G.T @ z + q * tau
        ry = A @ x - b * tau
        rz = G @ x + s - h * tau
        rtau = float(q @ x + b @ y + h @ z + kappa + xPx / tau)
        mu = (float(s @ z) + tau * kappa) / (nu + 1)

        xb, yb, zb, sb = x / tau, y / tau, z / tau, s / tau
        pres = max(_norm(A @ xb - b) / nb, _norm(G @ xb + sb - h) / nh)
        dres = _norm(P @ xb + A.T @ yb + G.T @ zb + q) / nq
        pobj = 0.5 * float(xb @ P @ xb) + float(q @ xb)
        dobj = -0.5 * float(xb @ P @ xb) - float(b @ yb) - float(h @ zb)
        gap = float(sb @ zb)
        info = {"pres": pres, "dres": dres, "gap": gap, "pobj": pobj, "dobj": dobj, "mu": mu,
                "tau": tau, "kappa": kappa}
        if cfg.verbose:
            log.info("it %3d pobj % .8e dobj % .8e pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e",
                     it, pobj, dobj, pres, dres, gap, tau, kappa)

        gap_ok = gap <= cfg.abstol or gap <= cfg.reltol * max(min(abs(pobj), abs(dobj)), 1e-300)
        if pres <= cfg.feastol and dres <= cfg.feastol and gap_ok:
            status = Status.OPTIMAL
            break
        # infeasibility certificates
        btz = float(b @ y + h @ z)
        if btz < 0:
            cert = _norm(A.T @ y + G.T @ z) / -btz
            if cert <= cfg.infeastol and tau < kappa:
                status = Status.INFEASIBLE
                info["certificate"] = cert
                break
        qtx = float(q @ x)
        if qtx < 0:
            cert = max(_norm(P @ x), _norm(A @ x), _norm(G @ x + s)) / -qtx
            if cert <= cfg.infeastol and tau < kappa:
                status = Status.UNBOUNDED
                info["certificate"] = cert
                break
        if it == cfg.max_iter_ipm:
            status = Status.MAX_ITERATIONS
            break

        try:
            sf.update_scaling(s, z)
            kkt = _KKT(sf)
        except (NotInteriorError, la.LinAlgError, ValueError) as exc:
            log.debug("scaling/factorization failed: %r", exc)
            status = Status.NUMERICAL_FAILURE
            break

        lam_sq = sf.per_cone(lambda c: c.lam_sq())
        x1, y1, z1 = kkt.solve(-q, b, h)
        c1 = q + 2.0 * Px / tau
        den = float(c1 @ x1 + b @ y1 + h @ z1) - kappa / tau - xPx / tau**2

        def direction(eta, ds, dk):
            w = sf.per_cone(lambda c, d: c.apply_Wt(c.lam_inv_product(d)), ds)
            x2, y2, z2 = kkt.solve(-eta * rx, -eta * ry, -eta * rz - w)
            num = -eta * rtau - dk / tau - float(c1 @ x2 + b @ y2 + h @ z2)
            dtau = num / den
            dx = x2 + dtau * x1
            dy = y2 + dtau * y1
            dz = z2 + dtau * z1
            ds_ = -eta * rz - G @ dx + h * dtau
            dkap = (dk - kappa * dtau) / tau
            return dx, dy, dz, ds_, dtau, dkap

        def step_len(dz, ds_, dtau, dkap):
            a = min(sf.max_step(s, ds_), sf.max_step(z, dz))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkap < 0:
                a = min(a, -kappa / dkap)
            return a

        # predictor
        dx, dy, dz, ds_, dtau, dkap = direction(1.0, -lam_sq, -tau * kappa)
        a_aff = min(1.0, step_len(dz, ds_, dtau, dkap))
        sigma = (1.0 - a_aff) ** 3
        # corrector
        ws = sf.per_cone(lambda c, u: c.scale_s_inv(u), ds_)
        wz = sf.per_cone(lambda c, u: c.scale_z(u), dz)
        corr = sf.per_cone(lambda c, u, v: c.jordan(u, v), ws, wz)
        ds_target = -lam_sq - corr + sigma * mu * sf.e
        dk_target = -tau * kappa - dtau * dkap + sigma * mu
        dx, dy, dz, ds_, dtau, dkap = direction(1.0 - sigma, ds_target, dk_target)
        a = min(1.0, STEP_FRACTION * step_len(dz, ds_, dtau, dkap))
        if not np.isfinite(a) or a < 1e-12:
            status = Status.NUMERICAL_FAILURE
            break
        x = x + a * dx
        y = y + a * dy
        z = z + a * dz
        s = s + a * ds_
        tau = tau + a * dtau
        kappa = kappa + a * dkap

    if status is Status.INFEASIBLE:
        xs, ys, zs = x, y / -(b @ y + h @ z), z / -(b @ y + h @ z)
    elif status is Status.UNBOUNDED:
        xs, ys, zs = x / -(q @ x), y, z
    else:
        xs, ys, zs = x / tau, y / tau, z / tau
    obj = problem.objective(xs) if status is not Status.UNBOUNDED else -np.inf
    return ConicSolution(status, xs, obj, info, it, ys, zs, method="ipm")
