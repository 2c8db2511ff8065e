"""Problem and result containers for the conic QP solver.

A problem is

    minimize    z^T Q z + q^T z + c
    subject to  A z == b
                G z <= h
                smat(F_j z + g_j) is PSD (Hermitian)     for every PSD block
                F_k z + g_k lies in the second-order cone  for every SOC block
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..linalg import svec_order


class ConicProblemError(ValueError):
    """The problem data are dimensionally inconsistent or not convex."""


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"

    def __str__(self) -> str:
        return self.value


def _as_csr(F, n: int, name: str) -> sp.csr_matrix:
    F = sp.csr_matrix(F, dtype=float)
    if F.shape[1] != n:
        raise ConicProblemError(f"{name} has {F.shape[1]} columns, expected {n}")
    return F


@dataclass
class PSDBlock:
    """Constraint smat(F z + g) >= 0 for an M x M Hermitian matrix."""

    F: sp.csr_matrix
    g: np.ndarray
    order: int = 0

    def __post_init__(self):
        self.F = sp.csr_matrix(self.F, dtype=float)
        self.g = np.asarray(self.g, dtype=float).ravel()
        if self.F.shape[0] != self.g.size:
            raise ConicProblemError("PSD block: F and g row counts differ")
        try:
            m = svec_order(self.g.size)
        except ValueError as exc:
            raise ConicProblemError(f"PSD block: {exc}") from None
        if self.order and self.order != m:
            raise ConicProblemError("PSD block: order does not match svec length")
        self.order = m


@dataclass
class SOCBlock:
    """Constraint (F z + g) in {(u0, u1): ||u1|| <= u0}."""

    F: sp.csr_matrix
    g: np.ndarray

    def __post_init__(self):
        self.F = sp.csr_matrix(self.F, dtype=float)
        self.g = np.asarray(self.g, dtype=float).ravel()
        if self.F.shape[0] != self.g.size or self.g.size < 1:
            raise ConicProblemError("SOC block: F and g row counts differ or are empty")


@dataclass
class ConicProblem:
    n: int
    Q: np.ndarray | None = None
    q: np.ndarray | None = None
    c: float = 0.0
    psd: list[PSDBlock] = field(default_factory=list)
    soc: list[SOCBlock] = field(default_factory=list)
    A: sp.csr_matrix | None = None
    b: np.ndarray | None = None
    G: sp.csr_matrix | None = None
    h: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise ConicProblemError("decision vector must have positive dimension")
        self.n = n
        self.Q = np.zeros((n, n)) if self.Q is None else np.asarray(self.Q, dtype=float)
        if self.Q.shape != (n, n):
            raise ConicProblemError(f"Q has shape {self.Q.shape}, expected {(n, n)}")
        if not np.allclose(self.Q, self.Q.T, atol=1e-12 * max(1.0, np.abs(self.Q).max())):
            raise ConicProblemError("Q must be symmetric")
        self.Q = 0.5 * (self.Q + self.Q.T)
        self.q = np.zeros(n) if self.q is None else np.asarray(self.q, dtype=float).ravel()
        if self.q.size != n:
            raise ConicProblemError("q has the wrong length")
        self.c = float(self.c)
        self.A, self.b = self._pair(self.A, self.b, "A", "b")
        self.G, self.h = self._pair(self.G, self.h, "G", "h")
        for blk in self.psd:
            _as_csr(blk.F, n, "PSD block F")
        for blk in self.soc:
            _as_csr(blk.F, n, "SOC block F")
        if np.any(~np.isfinite(self.Q)) or np.any(~np.isfinite(self.q)):
            raise ConicProblemError("objective data must be finite")

    def _pair(self, M, v, mname, vname):
        n = self.n
        if M is None and v is None:
            return sp.csr_matrix((0, n)), np.zeros(0)
        if M is None or v is None:
            raise ConicProblemError(f"{mname} and {vname} must be given together")
        M = _as_csr(M, n, mname)
        v = np.asarray(v, dtype=float).ravel()
        if M.shape[0] != v.size:
            raise ConicProblemError(f"{mname} has {M.shape[0]} rows but {vname} has {v.size}")
        return M, v

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(z @ self.Q @ z + self.q @ z + self.c)


@dataclass
class SolverConfig:
    abstol: float = 1e-8
    reltol: float = 1e-8
    feastol: float = 1e-8
    infeastol: float = 1e-8
    max_iter_ipm: int = 200
    max_iter_admm: int = 50000
    method: str = "auto"  # "ipm", "admm" or "auto" (ipm, then admm on numerical failure)
    verbose: bool = False

    def __post_init__(self):
        for name in ("abstol", "reltol", "feastol", "infeastol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.method not in ("auto", "ipm", "admm"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class ConicSolution:
    status: Status
    x: np.ndarray
    objective: float
    residuals: dict
    iterations: int
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    method: str = "ipm"

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def residuals(problem: ConicProblem, x: np.ndarray) -> dict:
    """Primal constraint violations of ``x`` evaluated directly from the data.

    Keys: ``eq`` (max |Az - b|), ``ineq`` (max positive part of Gz - h),
    ``psd`` (largest negative eigenvalue over PSD blocks, as a positive number),
    ``soc`` (largest ||u1|| - u0 over SOC blocks, clipped at 0).
    """
    from ..linalg import smat

    x = np.asarray(x, dtype=float)
    out = {"eq": 0.0, "ineq": 0.0, "psd": 0.0, "soc": 0.0}
    if problem.A.shape[0]:
        out["eq"] = float(np.max(np.abs(problem.A @ x - problem.b)))
    if problem.G.shape[0]:
        out["ineq"] = float(max(0.0, np.max(problem.G @ x - problem.h)))
    for blk in problem.psd:
        lam = np.linalg.eigvalsh(smat(blk.F @ x + blk.g))
        out["psd"] = max(out["psd"], float(max(0.0, -lam[0])))
    for blk in problem.soc:
        u = blk.F @ x + blk.g
        out["soc"] = max(out["soc"], float(max(0.0, np.linalg.norm(u[1:]) - u[0])))
    return out
