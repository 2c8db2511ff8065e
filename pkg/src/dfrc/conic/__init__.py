"""Conic QP solver: Hermitian PSD, second-order and nonnegative cones with a
convex quadratic objective."""

from __future__ import annotations

import logging

from .admm import solve_admm
from .epigraph import EpigraphProblem, psd_factor, quadratic_epigraph
from .ipm import solve_ipm
from .problem import (ConicProblem, ConicProblemError, ConicSolution, PSDBlock, SOCBlock,
                      SolverConfig, Status, residuals)

log = logging.getLogger(__name__)

__all__ = [
    "ConicProblem", "ConicProblemError", "ConicSolution", "EpigraphProblem", "PSDBlock",
    "SOCBlock", "SolverConfig", "Status", "psd_factor", "quadratic_epigraph", "residuals",
    "solve", "solve_admm", "solve_ipm",
]


def solve(problem: ConicProblem, cfg: SolverConfig | None = None) -> ConicSolution:
    """Solve ``problem`` with the configured method.

    ``method="auto"`` runs the interior-point method and retries with ADMM only
    when the IPM reports a numerical failure.
    """
    cfg = cfg or SolverConfig()
    if cfg.method == "admm":
        return solve_admm(problem, cfg)
    sol = solve_ipm(problem, cfg)
    if cfg.method == "auto" and sol.status is Status.NUMERICAL_FAILURE:
        log.info("interior-point method failed numerically, falling back to ADMM")
        alt = solve_admm(problem, cfg)
        if alt.status is not Status.MAX_ITERATIONS:
            return alt
    return sol
