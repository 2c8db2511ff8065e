"""Closed-form communication and radar metrics plus sweep aggregates.

All quantities are linear; dB conversion happens only where results are
written out.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .array import ArrayGeometry, beam_pattern


class MissedDetection(ValueError):
    """Estimated peaks could not be matched one-to-one with the true angles."""


def _as_precoder_parts(W):
    if hasattr(W, "Wc") and hasattr(W, "Wr"):
        return np.asarray(W.Wc), np.asarray(W.Wr)
    Wc, Wr = W
    return np.atleast_2d(np.asarray(Wc, dtype=complex)), np.atleast_2d(np.asarray(Wr, dtype=complex))


def sinr_closed_form(H: np.ndarray, W, noise_power: float) -> np.ndarray:
    """Per-user SINR gamma_k for precoder W = (W_c, W_r).

    gamma_k = |F_c[k,k]|^2 / (sum_{i != k} |F_c[k,i]|^2 + sum_i |F_r[k,i]|^2 + s2)
    with F_c = H W_c and F_r = H W_r.
    """
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    Wc, Wr = _as_precoder_parts(W)
    Fc = H @ Wc
    Fr = H @ Wr
    sig = np.abs(np.diagonal(Fc)) ** 2
    interf = np.sum(np.abs(Fc) ** 2, axis=1) - sig + np.sum(np.abs(Fr) ** 2, axis=1)
    return sig / (np.maximum(interf, 0.0) + noise_power)


def interference_power(H: np.ndarray, W) -> tuple[np.ndarray, np.ndarray]:
    """(signal power, inter-user plus radar interference power) per user."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    Wc, Wr = _as_precoder_parts(W)
    Fc, Fr = H @ Wc, H @ Wr
    sig = np.abs(np.diagonal(Fc)) ** 2
    off = Fc - np.diag(np.diagonal(Fc))
    return sig, np.sum(np.abs(off) ** 2, axis=1) + np.sum(np.abs(Fr) ** 2, axis=1)


def sum_rate(gamma) -> float:
    """sum_k log2(1 + gamma_k) in bits per symbol."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SINR values must be nonnegative")
    return float(np.sum(np.log2(1.0 + g)))


def fairness(gamma) -> float:
    """Minimum SINR over users."""
    g = np.asarray(gamma, dtype=float)
    if g.size == 0 or np.any(g < 0):
        raise ValueError("need at least one nonnegative SINR value")
    return float(np.min(g))


def beampattern_mse(R: np.ndarray, R0: np.ndarray, grid, geom: ArrayGeometry | None = None) -> float:
    """(1/L) sum_l |P(theta_l; R0) - P(theta_l; R)|^2 on the design grid."""
    R = np.asarray(R)
    geom = geom or ArrayGeometry(R.shape[0])
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    diff = beam_pattern(geom, R0, grid) - beam_pattern(geom, R, grid)
    return float(np.mean(np.abs(diff) ** 2))


def radar_inr(H: np.ndarray, Wr: np.ndarray, noise_power: float, k: int = 0) -> float:
    """Radar interference-to-noise ratio sum_i |[H W_r]_{k,i}|^2 / s2 at user k."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    Fr = H[k] @ np.asarray(Wr, dtype=complex)
    return float(np.sum(np.abs(Fr) ** 2) / noise_power)


def match_angles(estimates, truths, gate: float = 5.0) -> np.ndarray:
    """Pair each true angle with a distinct estimate within ``gate`` degrees.

    Matching is greedy on the globally closest remaining pair. Returns the
    matched estimates in the order of ``truths``.

    Raises
    ------
    MissedDetection
        If the counts differ or some truth has no estimate within the gate.
    """
    est = np.atleast_1d(np.asarray(estimates, dtype=float))
    tru = np.atleast_1d(np.asarray(truths, dtype=float))
    if est.size != tru.size:
        raise MissedDetection(f"{est.size} peaks for {tru.size} targets")
    dist = np.abs(est[:, None] - tru[None, :])
    out = np.full(tru.size, np.nan)
    used_e, used_t = set(), set()
    for flat in np.argsort(dist, axis=None, kind="stable"):
        i, j = np.unravel_index(flat, dist.shape)
        if i in used_e or j in used_t or dist[i, j] > gate:
            continue
        out[j] = est[i]
        used_e.add(i)
        used_t.add(j)
    if np.any(np.isnan(out)):
        raise MissedDetection("some targets have no peak within the gate")
    return out


@dataclass
class RMSEResult:
    rmse: float
    trials_used: int
    missed: int


def angle_rmse(estimates: Sequence, truths, gate: float = 5.0) -> RMSEResult:
    """Root-mean-square angle error over targets and trials.

    ``estimates`` is one sequence of peak angles per trial (a flat sequence
    is treated as a single trial). Trials whose peaks cannot be matched are
    excluded and counted in ``missed``.
    """
    if len(estimates) and np.ndim(estimates[0]) == 0:
        estimates = [estimates]
    tru = np.atleast_1d(np.asarray(truths, dtype=float))
    errs, missed = [], 0
    for est in estimates:
        try:
            m = match_angles(est, tru, gate)
        except MissedDetection:
            missed += 1
            continue
        errs.append(m - tru)
    if not errs:
        return RMSEResult(float("nan"), 0, missed)
    e = np.concatenate(errs)
    return RMSEResult(float(np.sqrt(np.mean(e**2))), len(errs), missed)


@dataclass
class FeasibilitySummary:
    fraction: float
    feasible: int
    infeasible: int
    failures: int
    trials: int


def feasibility_probability(statuses: Iterable) -> FeasibilitySummary:
    """Share of trials whose design status is Feasible (solver Optimal).

    Solver failures are counted separately, never as infeasible.
    """
    st = [str(s) for s in statuses]
    if not st:
        raise ValueError("need at least one trial")
    feas = sum(s in ("Feasible", "Optimal") for s in st)
    inf = sum(s == "Infeasible" for s in st)
    return FeasibilitySummary(feas / len(st), feas, inf, len(st) - feas - inf, len(st))


@dataclass
class TrialReport:
    method: str
    K: int
    gamma_db: float
    trial: int
    seed: int
    status: str
    loss: float
    alpha: float
    mse: float
    fairness_db: float
    sumrate: float
    inr_db: float
    wall_ms: float

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list[str]:
        out = []
        for k, v in asdict(self).items():
            if isinstance(v, float):
                out.append("nan" if np.isnan(v) else ("inf" if np.isposinf(v) else
                                                      "-inf" if np.isneginf(v) else f"{v:.10g}"))
            else:
                out.append(str(v))
        return out


TRIAL_HEADER = TrialReport.header()


def reports_to_csv(reports: Iterable[TrialReport], with_wall: bool = True) -> str:
    """CSV text with the fixed header. ``with_wall=False`` blanks the timing
    column so that output is byte-identical across runs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIAL_HEADER)
    for r in reports:
        row = r.row()
        if not with_wall:
            row[-1] = ""
        w.writerow(row)
    return buf.getvalue()


def in_out_beam_ratio(geom: ArrayGeometry, R: np.ndarray, grid, targets, beam_width: float) -> float:
    """Mean transmit power inside the ideal beams over mean power outside."""
    grid = np.asarray(grid, dtype=float)
    pat = beam_pattern(geom, R, grid)
    inside = np.zeros(grid.size, dtype=bool)
    for t in targets:
        inside |= np.abs(grid - t) <= beam_width / 2
    if not inside.any() or inside.all():
        raise ValueError("grid must contain points both inside and outside the beams")
    return float(np.mean(pat[inside]) / np.mean(pat[~inside]))
