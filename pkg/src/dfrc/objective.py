"""Radar loss as an explicit PSD quadratic form over z = [svec(R), alpha].

The beampattern-matching term and the cross-correlation term are both linear
in (R, alpha) before squaring, so the loss is ||B z||^2 for a real matrix B
whose rows are

* sqrt(1/L) [svec(a_l a_l^H), -d_l]                       (one per grid angle)
* sqrt(w_c c_P) [Re / Im functional of a_q^H R a_p, 0]    (one pair per p < q)

with c_P = 2 / (P^2 - P). Q = B^T B is therefore PSD by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array import ArrayGeometry, BeamSpec, DomainError, steering_vector
from .linalg import inner_functional, smat, svec  # noqa: F401  (re-exported)

__all__ = [
    "RadarObjective",
    "build_radar_loss",
    "eval_loss",
    "direct_loss",
    "minimize_alpha",
    "svec",
    "smat",
]


@dataclass(frozen=True)
class RadarObjective:
    """Loss(R, alpha) = z^T Q z + q^T z + c with z = [svec(R), alpha]."""

    geom: ArrayGeometry
    spec: BeamSpec
    Q: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    c: float
    # rows of the beampattern part: pattern_rows @ svec(R) = P(theta_l; R)
    pattern_rows: np.ndarray = field(repr=False)
    desired: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def M(self) -> int:
        return self.geom.M

    def pack(self, R: np.ndarray, alpha: float) -> np.ndarray:
        return np.append(svec(R), float(alpha))

    def value(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(z @ self.Q @ z + self.q @ z + self.c)


def _cross_rows(geom: ArrayGeometry, spec: BeamSpec) -> np.ndarray:
    A = steering_vector(geom, np.asarray(spec.target_directions))
    rows = []
    for p in range(spec.P):
        for qq in range(p + 1, spec.P):
            # a_q^H R a_p = tr(R a_p a_q^H)
            X = np.outer(A[:, p], A[:, qq].conj())
            rows.append(inner_functional(X))
            rows.append(inner_functional(-1j * X))
    if not rows:
        return np.zeros((0, geom.M**2))
    return np.array(rows)


def build_radar_loss(geom: ArrayGeometry, spec: BeamSpec) -> RadarObjective:
    if spec.P < 1:
        raise DomainError("at least one target direction is required")
    M = geom.M
    A = steering_vector(geom, spec.grid)  # (M, L)
    outer = np.einsum("ml,nl->lmn", A, A.conj())
    pattern_rows = svec(outer, check=False)  # (L, M^2)
    d = spec.desired()
    L = spec.L

    B1 = np.hstack([pattern_rows, -d[:, None]]) / np.sqrt(L)
    blocks = [B1]
    if spec.P > 1 and spec.cross_weight > 0:
        cP = 2.0 / (spec.P**2 - spec.P)
        C = _cross_rows(geom, spec) * np.sqrt(spec.cross_weight * cP)
        blocks.append(np.hstack([C, np.zeros((C.shape[0], 1))]))
    B = np.vstack(blocks)
    Q = B.T @ B
    Q = 0.5 * (Q + Q.T)
    n = M * M + 1
    for arr in (Q, pattern_rows, d):
        arr.setflags(write=False)
    return RadarObjective(geom, spec, Q, np.zeros(n), 0.0, pattern_rows, d)


def eval_loss(obj: RadarObjective, R: np.ndarray, alpha: float) -> float:
    R = np.asarray(R)
    if R.shape != (obj.M, obj.M):
        raise ValueError(f"R has shape {R.shape}, expected {(obj.M, obj.M)}")
    return obj.value(obj.pack(R, alpha))


def direct_loss(geom: ArrayGeometry, spec: BeamSpec, R: np.ndarray, alpha: float) -> float:
    """Loss by direct summation over the grid and target pairs; independent of
    the quadratic-form assembly and used to cross-check it."""
    A = steering_vector(geom, spec.grid)
    pat = np.real(np.einsum("ml,mn,nl->l", A.conj(), R, A))
    d = spec.desired()
    l1 = np.mean((alpha * d - pat) ** 2)
    if spec.P < 2:
        return float(l1)
    T = steering_vector(geom, np.asarray(spec.target_directions))
    acc = 0.0
    for p in range(spec.P - 1):
        for qq in range(p + 1, spec.P):
            acc += abs(T[:, qq].conj() @ R @ T[:, p]) ** 2
    return float(l1 + spec.cross_weight * 2.0 / (spec.P**2 - spec.P) * acc)


def minimize_alpha(obj: RadarObjective, R: np.ndarray) -> tuple[float, float]:
    """Closed-form optimal scaling alpha* for fixed R and the resulting loss."""
    pat = obj.pattern_rows @ svec(R)
    d = obj.desired
    den = float(d @ d)
    alpha = float(d @ pat) / den if den > 0 else 0.0
    return alpha, eval_loss(obj, R, alpha)
