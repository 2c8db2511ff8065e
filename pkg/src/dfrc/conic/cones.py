"""Symmetric cones with Nesterov-Todd scaling.

Every cone works on its own slice of the stacked slack/dual vectors. After
``update(s, z)`` the cone holds a scaling W with W z = W^{-T} s = lambda, and
exposes the handful of operations the interior-point method needs.
PSD cones act on complex Hermitian matrices in svec form.
"""

from __future__ import annotations

import numpy as np

from ..linalg import smat, svec


class NotInteriorError(ArithmeticError):
    """A point handed to ``update`` is not strictly inside the cone."""


class NonnegCone:
    degree_per_dim = 1

    def __init__(self, dim: int):
        self.dim = dim
        self.degree = dim

    def identity(self) -> np.ndarray:
        return np.ones(self.dim)

    def update(self, s, z):
        if np.any(s <= 0) or np.any(z <= 0):
            raise NotInteriorError("nonnegative orthant")
        self.w = np.sqrt(s / z)
        self.lam = np.sqrt(s * z)

    def scale_z(self, v):  # W v
        return self.w * v

    def scale_s_inv(self, v):  # W^{-T} v
        return v / self.w

    def scale_z_inv(self, v):  # W^{-1} v
        return v / self.w

    def scale_s_inv_cols(self, B):  # W^{-T} B, columnwise
        return B / self.w[:, None]

    def apply_Wt(self, v):  # W^T v
        return self.w * v

    def jordan(self, u, v):
        return u * v

    def lam_inv_product(self, d):  # solve lambda o u = d
        return d / self.lam

    def lam_sq(self):
        return self.lam * self.lam

    def max_step(self, x, dx):
        neg = dx < 0
        if not np.any(neg):
            return np.inf
        return float(np.min(-x[neg] / dx[neg]))

    def shift_into(self, x):
        """Smallest alpha with x + alpha e in the cone boundary (as -min eig)."""
        return -float(np.min(x)) if x.size else -1.0

    def project(self, x):
        return np.maximum(x, 0.0)

    def in_dual(self, x, tol=0.0):
        return bool(np.all(x >= -tol))


def _soc_jdot(u, v):
    return u[0] * v[0] - u[1:] @ v[1:]


class SOCCone:
    def __init__(self, dim: int):
        self.dim = dim
        self.degree = 1

    def identity(self):
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def update(self, s, z):
        ss = _soc_jdot(s, s)
        zz = _soc_jdot(z, z)
        if s[0] <= 0 or z[0] <= 0 or ss <= 0 or zz <= 0:
            raise NotInteriorError("second-order cone")
        sb = s / np.sqrt(ss)
        zb = z / np.sqrt(zz)
        gamma = np.sqrt((1.0 + sb @ zb) / 2.0)
        Jz = zb.copy()
        Jz[1:] *= -1
        wb = (sb + Jz) / (2.0 * gamma)
        # restore w^T J w = 1 exactly; W and W^{-1} are only inverse on that manifold
        wb[0] = np.sqrt(1.0 + wb[1:] @ wb[1:])
        beta = (ss / zz) ** 0.25
        e = self.identity()
        v = (wb + e) / np.sqrt(2.0 * (wb[0] + 1.0))
        J = np.eye(self.dim)
        J[1:, 1:] *= -1
        Jv = J @ v
        self.W = beta * (2.0 * np.outer(v, v) - J)
        self.Winv = (2.0 * np.outer(Jv, Jv) - J) / beta
        self.lam = self.W @ z

    def scale_z(self, v):
        return self.W @ v

    def scale_s_inv(self, v):
        return self.Winv @ v

    def scale_z_inv(self, v):  # W is symmetric
        return self.Winv @ v

    def scale_s_inv_cols(self, B):
        return self.Winv @ B

    def apply_Wt(self, v):
        return self.W @ v

    def jordan(self, u, v):
        out = np.empty(self.dim)
        out[0] = u @ v
        out[1:] = u[0] * v[1:] + v[0] * u[1:]
        return out

    def lam_inv_product(self, d):
        lam = self.lam
        det = _soc_jdot(lam, lam)
        u = np.empty(self.dim)
        u[0] = (lam[0] * d[0] - lam[1:] @ d[1:]) / det
        u[1:] = (d[1:] - u[0] * lam[1:]) / lam[0]
        return u

    def lam_sq(self):
        return self.jordan(self.lam, self.lam)

    def max_step(self, x, dx):
        a = _soc_jdot(dx, dx)
        b = 2.0 * _soc_jdot(x, dx)
        c = _soc_jdot(x, x)
        roots = []
        if abs(a) < 1e-300:
            if b < 0:
                roots.append(-c / b)
        else:
            disc = b * b - 4 * a * c
            if disc >= 0:
                sq = np.sqrt(disc)
                qq = -0.5 * (b + np.copysign(sq, b))
                cand = [qq / a]
                if qq != 0:
                    cand.append(c / qq)
                roots.extend(r for r in cand if r > 0)
        # the quadratic also vanishes on the negative cone; also guard the x0 sign
        if dx[0] < 0:
            roots.append(-x[0] / dx[0])
        pos = [r for r in roots if r > 0]
        return min(pos) if pos else np.inf

    def shift_into(self, x):
        return float(np.linalg.norm(x[1:]) - x[0])

    def project(self, x):
        t, u = x[0], x[1:]
        nu = np.linalg.norm(u)
        if nu <= t:
            return x.copy()
        if nu <= -t:
            return np.zeros_like(x)
        a = 0.5 * (t + nu)
        out = np.empty_like(x)
        out[0] = a
        out[1:] = a * u / nu
        return out

    def in_dual(self, x, tol=0.0):
        return bool(np.linalg.norm(x[1:]) - x[0] <= tol)


class PSDCone:
    """Cone of complex Hermitian PSD matrices of order m in svec coordinates."""

    def __init__(self, order: int):
        self.m = order
        self.dim = order * order
        self.degree = order

    def identity(self):
        return svec(np.eye(self.m), check=False)

    def update(self, s, z):
        S = smat(s)
        Z = smat(z)
        try:
            L1 = np.linalg.cholesky(S)
            L2 = np.linalg.cholesky(Z)
        except np.linalg.LinAlgError:
            raise NotInteriorError("PSD cone") from None
        U, lam, Vh = np.linalg.svd(L2.conj().T @ L1)
        if lam[-1] <= 0:
            raise NotInteriorError("PSD cone")
        isq = 1.0 / np.sqrt(lam)
        self.R = (L1 @ Vh.conj().T) * isq[None, :]
        self.Rinv = isq[:, None] * (U.conj().T @ L2.conj().T)
        self.lam = lam
        self.lam_vec = np.concatenate([lam, np.zeros(self.dim - self.m)])

    def scale_z(self, v):
        return svec(self.R.conj().T @ smat(v) @ self.R, check=False)

    def scale_s_inv(self, v):
        return svec(self.Rinv @ smat(v) @ self.Rinv.conj().T, check=False)

    def scale_z_inv(self, v):
        return svec(self.Rinv.conj().T @ smat(v) @ self.Rinv, check=False)

    def scale_s_inv_cols(self, B):
        mats = smat(np.ascontiguousarray(B.T))
        return svec(self.Rinv[None] @ mats @ self.Rinv.conj().T[None], check=False).T

    def apply_Wt(self, v):
        return svec(self.R @ smat(v) @ self.R.conj().T, check=False)

    def jordan(self, u, v):
        U, V = smat(u), smat(v)
        return svec(0.5 * (U @ V + V @ U), check=False)

    def lam_inv_product(self, d):
        lam = self.lam
        D = smat(d)
        return svec(2.0 * D / (lam[:, None] + lam[None, :]), check=False)

    def lam_sq(self):
        return np.concatenate([self.lam**2, np.zeros(self.dim - self.m)])

    def max_step(self, x, dx):
        try:
            L = np.linalg.cholesky(smat(x))
        except np.linalg.LinAlgError:
            return 0.0
        Li = np.linalg.inv(L)
        Mx = Li @ smat(dx) @ Li.conj().T
        lmin = np.linalg.eigvalsh(0.5 * (Mx + Mx.conj().T))[0]
        return np.inf if lmin >= 0 else -1.0 / lmin

    def shift_into(self, x):
        return -float(np.linalg.eigvalsh(smat(x))[0])

    def project(self, x):
        lam, V = np.linalg.eigh(smat(x))
        lam = np.maximum(lam, 0.0)
        return svec((V * lam) @ V.conj().T, check=False)

    def in_dual(self, x, tol=0.0):
        return bool(np.linalg.eigvalsh(smat(x))[0] >= -tol)
