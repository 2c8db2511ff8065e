"""Second-order-cone epigraph of a convex quadratic objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .problem import ConicProblem, ConicProblemError, PSDBlock, SOCBlock


@dataclass
class EpigraphProblem:
    problem: ConicProblem
    n_orig: int

    def restrict(self, x: np.ndarray) -> np.ndarray:
        """Original decision vector from a solution of the reformulated problem."""
        return np.asarray(x)[: self.n_orig]


def psd_factor(Q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """G with G^T G = Q via eigendecomposition; tiny negative eigenvalues are
    clipped, larger ones rejected."""
    Q = 0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T)
    lam, V = np.linalg.eigh(Q)
    scale = max(float(np.max(np.abs(lam))), 0.0) if lam.size else 0.0
    if lam.size and lam[0] < -tol * max(scale, 1.0):
        raise ConicProblemError(f"Q is indefinite (min eigenvalue {lam[0]:.3e})")
    keep = lam > tol * scale if scale > 0 else np.zeros(lam.shape, dtype=bool)
    return np.sqrt(lam[keep])[:, None] * V[:, keep].T


def quadratic_epigraph(problem: ConicProblem) -> EpigraphProblem:
    """Rewrite min z^T Q z + q^T z + c as min t + q^T z + c with ||G z||^2 <= t.

    The bound is the rotated cone 4||Gz||^2 <= (t+1)^2 - (t-1)^2, written as
    (t + 1, t - 1, 2 G z) in the second-order cone. Q = 0 passes through.
    """
    Gf = psd_factor(problem.Q)
    n = problem.n
    if Gf.shape[0] == 0:
        return EpigraphProblem(ConicProblem(
            n, None, problem.q, problem.c, list(problem.psd), list(problem.soc),
            problem.A, problem.b, problem.G, problem.h), n)
    r = Gf.shape[0]
    pad = lambda M: sp.hstack([sp.csr_matrix(M), sp.csr_matrix((M.shape[0], 1))], format="csr")  # noqa: E731
    t_row = np.zeros((1, n + 1))
    t_row[0, n] = 1.0
    F = sp.vstack([sp.csr_matrix(t_row), sp.csr_matrix(t_row),
                   sp.hstack([sp.csr_matrix(2.0 * Gf), sp.csr_matrix((r, 1))])], format="csr")
    g = np.concatenate([[1.0, -1.0], np.zeros(r)])
    soc = [SOCBlock(pad(blk.F), blk.g) for blk in problem.soc] + [SOCBlock(F, g)]
    psd = [PSDBlock(pad(blk.F), blk.g) for blk in problem.psd]
    q = np.append(problem.q, 1.0)
    A = pad(problem.A) if problem.A.shape[0] else None
    G = pad(problem.G) if problem.G.shape[0] else None
    new = ConicProblem(n + 1, None, q, problem.c, psd, soc,
                       A, problem.b if A is not None else None,
                       G, problem.h if G is not None else None)
    return EpigraphProblem(new, n)
