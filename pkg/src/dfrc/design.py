"""Joint radar-communication transmit beamformer design.

Three designs share one radar loss and the per-antenna power constraint
diag(R) = P_t / M:

* ``radar_only``: minimize the loss over R alone.
* ``sdr_beamform``: semidefinite relaxation of the SINR-constrained problem,
  followed by rank-one extraction of the user precoders and a triangular
  factor of the remaining radar covariance.
* ``zf_beamform``: interference-nulling design in which H R H^H is forced to
  be diagonal, followed by a QR/Cholesky construction of the precoder.

All SDPs are assembled as :class:`dfrc.conic.ConicProblem` instances over a
real decision vector made of svec blocks plus the scalar alpha.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .array import ArrayGeometry, BeamSpec
from .conic import ConicProblem, ConicSolution, PSDBlock, SolverConfig, Status, solve
from .linalg import herm_part, inner_functional, lower_factor, row_qr, smat
from .matio import format_matrix, parse_matrix, read_matrix, write_matrix
from .objective import RadarObjective, build_radar_loss, eval_loss


class DesignError(RuntimeError):
    """Base class for design-stage failures."""


class SolverFailure(DesignError):
    def __init__(self, message: str, solution: ConicSolution | None = None):
        super().__init__(message)
        self.solution = solution


class DegenerateExtraction(DesignError):
    """h^H R_k h is numerically zero, so the rank-one extraction is undefined."""


class TightnessViolation(DesignError):
    """The extracted precoders do not reproduce a valid relaxed solution."""


class PreconditionViolation(DesignError):
    """Inputs to the ZF construction do not satisfy H R H^H = F F^H."""


class DegenerateUser(DesignError):
    """A user receives zero power, so the target F is rank deficient."""


class DesignStatus(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    SOLVER_FAILURE = "SolverFailure"

    def __str__(self) -> str:
        return self.value


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class DesignConfig:
    """Power budget, noise and SINR thresholds (linear) for one design.

    ``sinr`` is a scalar broadcast to every user or a per-user sequence.
    """

    total_power: float = 1.0
    noise_power: float = 0.01
    sinr: float | Sequence[float] = 0.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    allow_degenerate: bool = False  # zero precoder for users whose R_k is inactive
    sinr_tol: float = 1e-6
    # relative tightening of the SINR right-hand sides; absorbs solver
    # feasibility error, which the map to SINR amplifies by (1 + G) / s2
    sinr_margin: float = 1e-5
    zf_reuse_unconstrained: bool = True

    def __post_init__(self):
        if not self.total_power > 0:
            raise ValueError("total_power must be positive")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        g = np.atleast_1d(np.asarray(self.sinr, dtype=float))
        if np.any(g < 0) or np.any(np.isnan(g)):
            raise ValueError("SINR thresholds must be nonnegative")

    def thresholds(self, K: int) -> np.ndarray:
        g = np.atleast_1d(np.asarray(self.sinr, dtype=float))
        if g.size == 1:
            return np.full(K, float(g[0]))
        if g.size != K:
            raise ValueError(f"{g.size} SINR thresholds given for {K} users")
        return g.copy()

    def with_sinr(self, sinr) -> "DesignConfig":
        from dataclasses import replace

        return replace(self, sinr=sinr)


@dataclass(frozen=True)
class Channel:
    """K x M channel; row k is h_k^H."""

    H: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=complex))
        object.__setattr__(self, "H", H)
        K, M = H.shape
        if K < 1:
            raise ValueError("at least one user is required")
        if K >= M:
            raise ValueError(f"need fewer users than antennas (K={K}, M={M})")

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def M(self) -> int:
        return self.H.shape[1]

    def h(self, k: int) -> np.ndarray:
        """Column vector h_k (so that h_k^H is row k of H)."""
        return self.H[k].conj()


@dataclass(frozen=True)
class Precoder:
    Wc: np.ndarray  # M x K
    Wr: np.ndarray  # M x M

    def __post_init__(self):
        Wc = np.asarray(self.Wc, dtype=complex)
        Wr = np.asarray(self.Wr, dtype=complex)
        if Wc.ndim == 1:
            Wc = Wc[:, None]
        object.__setattr__(self, "Wc", Wc)
        object.__setattr__(self, "Wr", Wr)
        if Wr.shape != (Wr.shape[0], Wr.shape[0]) or Wc.shape[0] != Wr.shape[0]:
            raise ValueError(f"inconsistent precoder shapes {Wc.shape}, {Wr.shape}")

    @property
    def M(self) -> int:
        return self.Wr.shape[0]

    @property
    def K(self) -> int:
        return self.Wc.shape[1]

    @property
    def W(self) -> np.ndarray:
        return np.hstack([self.Wc, self.Wr])

    def covariance(self) -> np.ndarray:
        W = self.W
        return herm_part(W @ W.conj().T)

    def to_text(self) -> str:
        """W = [W_c, W_r] in the text matrix format."""
        return format_matrix(self.W)

    @classmethod
    def from_matrix(cls, W: np.ndarray) -> "Precoder":
        W = np.asarray(W, dtype=complex)
        M = W.shape[0]
        K = W.shape[1] - M
        if K < 0:
            raise ValueError(f"W has {W.shape[1]} columns, need at least M = {M}")
        return cls(W[:, :K], W[:, K:])

    @classmethod
    def from_text(cls, text: str) -> "Precoder":
        return cls.from_matrix(parse_matrix(text))

    def save(self, path) -> None:
        write_matrix(path, self.W)

    @classmethod
    def load(cls, path) -> "Precoder":
        return cls.from_matrix(read_matrix(path))


@dataclass(frozen=True)
class DesignOutcome:
    status: DesignStatus
    method: str
    R: np.ndarray | None = None
    precoder: Precoder | None = None
    alpha: float = float("nan")
    loss: float = float("nan")
    gamma: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status is DesignStatus.FEASIBLE


def _status_of(sol: ConicSolution) -> DesignStatus:
    if sol.status is Status.OPTIMAL:
        return DesignStatus.FEASIBLE
    if sol.status is Status.INFEASIBLE:
        return DesignStatus.INFEASIBLE
    return DesignStatus.SOLVER_FAILURE


# ---------------------------------------------------------------------------
# problem assembly


class _Layout:
    """Column offsets of Hermitian svec blocks followed by alpha."""

    def __init__(self, M: int, nblocks: int):
        self.M = M
        self.d = M * M
        self.nblocks = nblocks
        self.n = nblocks * self.d + 1
        self.alpha = self.n - 1

    def block(self, i: int) -> slice:
        return slice(i * self.d, (i + 1) * self.d)

    def select(self, coeffs: dict[int, float]) -> sp.csr_matrix:
        """Map z -> sum_i coeffs[i] * svec(block i)."""
        d = self.d
        rows, cols, vals = [], [], []
        for i, c in coeffs.items():
            rows.append(np.arange(d))
            cols.append(i * d + np.arange(d))
            vals.append(np.full(d, float(c)))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(d, self.n))

    def objective(self, obj: RadarObjective) -> np.ndarray:
        """Embed the loss Q (over [svec(R), alpha]) with R = block 0."""
        idx = np.r_[np.arange(self.d), self.alpha]
        Q = np.zeros((self.n, self.n))
        Q[np.ix_(idx, idx)] = obj.Q
        return Q

    def power_rows(self, total_power: float) -> tuple[sp.csr_matrix, np.ndarray]:
        M = self.M
        A = sp.csr_matrix((np.ones(M), (np.arange(M), np.arange(M))), shape=(M, self.n))
        return A, np.full(M, total_power / M)

    def row(self, block: int, c: np.ndarray) -> np.ndarray:
        r = np.zeros(self.n)
        r[self.block(block)] = c
        return r


def _solve_or_fail(problem: ConicProblem, cfg: DesignConfig) -> ConicSolution:
    return solve(problem, cfg.solver)


def _diag_info(sol: ConicSolution, t0: float) -> dict:
    return {"solver_status": str(sol.status), "iterations": sol.iterations, "method": sol.method,
            "wall_s": time.perf_counter() - t0, **{k: float(v) for k, v in sol.residuals.items()}}


# ---------------------------------------------------------------------------
# radar only


def radar_problem(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig,
                  obj: RadarObjective | None = None) -> tuple[ConicProblem, _Layout]:
    obj = obj or build_radar_loss(geom, spec)
    lay = _Layout(geom.M, 1)
    A, b = lay.power_rows(cfg.total_power)
    prob = ConicProblem(lay.n, lay.objective(obj), psd=[PSDBlock(lay.select({0: 1.0}), np.zeros(lay.d))],
                        A=A, b=b)
    return prob, lay


def radar_only(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig | None = None,
               obj: RadarObjective | None = None) -> tuple[np.ndarray, float, float]:
    """Radar-only covariance R0, scaling alpha0 and loss0.

    Raises
    ------
    SolverFailure
        If the conic solver does not return an optimal point.
    """
    cfg = cfg or DesignConfig()
    obj = obj or build_radar_loss(geom, spec)
    prob, lay = radar_problem(geom, spec, cfg, obj)
    sol = _solve_or_fail(prob, cfg)
    if not sol.optimal:
        raise SolverFailure(f"radar-only problem: {sol.status}", sol)
    R0 = smat(sol.x[lay.block(0)])
    alpha0 = float(sol.x[lay.alpha])
    return R0, alpha0, eval_loss(obj, R0, alpha0)


# ---------------------------------------------------------------------------
# semidefinite relaxation


@dataclass(frozen=True)
class SDRSolution:
    status: DesignStatus
    R: np.ndarray | None
    Rk: list[np.ndarray]
    alpha: float
    loss: float
    solution: ConicSolution


def sdr_problem(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, ch: Channel,
                obj: RadarObjective | None = None) -> tuple[ConicProblem, _Layout]:
    """Relaxed problem over (R, R_1, ..., R_K, alpha).

    The SINR constraint (1 + 1/G) h^H R_k h >= h^H R h + s2 is written as
    h^H R_k h - g h^H R h >= g s2 with g = G / (1 + G), which stays well scaled
    for G = 0 and for huge G. R >= 0 is implied by R - sum R_k >= 0 and
    R_k >= 0, so it is not imposed separately.
    """
    obj = obj or build_radar_loss(geom, spec)
    K, M = ch.K, geom.M
    if ch.M != M:
        raise ValueError(f"channel has {ch.M} antennas, array has {M}")
    lay = _Layout(M, K + 1)
    A, b = lay.power_rows(cfg.total_power)
    zero = np.zeros(lay.d)
    psd = [PSDBlock(lay.select({0: 1.0, **{k + 1: -1.0 for k in range(K)}}), zero)]
    psd += [PSDBlock(lay.select({k + 1: 1.0}), zero) for k in range(K)]
    Gam = cfg.thresholds(K)
    g = Gam / (1.0 + Gam)
    G = np.zeros((K, lay.n))
    h = np.zeros(K)
    for k in range(K):
        hk = ch.h(k)
        c = inner_functional(np.outer(hk, hk.conj()))  # c @ svec(X) = h^H X h
        G[k] = lay.row(0, g[k] * c) - lay.row(k + 1, c)
        h[k] = -g[k] * cfg.noise_power * (1.0 + cfg.sinr_margin)
    prob = ConicProblem(lay.n, lay.objective(obj), psd=psd, A=A, b=b, G=G, h=h)
    return prob, lay


def sdr_solve(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, H,
              obj: RadarObjective | None = None) -> SDRSolution:
    ch = H if isinstance(H, Channel) else Channel(H)
    obj = obj or build_radar_loss(geom, spec)
    prob, lay = sdr_problem(geom, spec, cfg, ch, obj)
    sol = _solve_or_fail(prob, cfg)
    status = _status_of(sol)
    if status is not DesignStatus.FEASIBLE:
        return SDRSolution(status, None, [], float("nan"), float("nan"), sol)
    R = smat(sol.x[lay.block(0)])
    Rk = [smat(sol.x[lay.block(k + 1)]) for k in range(ch.K)]
    alpha = float(sol.x[lay.alpha])
    return SDRSolution(status, R, Rk, alpha, eval_loss(obj, R, alpha), sol)


def rank_one_extract(Rk: np.ndarray, h: np.ndarray, eps: float | None = None) -> np.ndarray:
    """w = R_k h / sqrt(h^H R_k h).

    The result satisfies h^H w w^H h = h^H R_k h and R_k - w w^H >= 0.

    Raises
    ------
    DegenerateExtraction
        If h^H R_k h <= eps (default 1e-12 ||R_k|| ||h||^2).
    """
    Rk = np.asarray(Rk, dtype=complex)
    h = np.asarray(h, dtype=complex).ravel()
    if eps is None:
        eps = 1e-12 * np.linalg.norm(Rk, 2) * float(np.vdot(h, h).real)
    Rh = Rk @ h
    den = float(np.real(np.vdot(h, Rh)))
    if not den > eps:
        raise DegenerateExtraction(f"h^H R_k h = {den:.3e} is not above {eps:.3e}")
    return Rh / np.sqrt(den)


def radar_precoder_completion(R: np.ndarray, ws: Sequence[np.ndarray] | np.ndarray,
                              clip: float = 1e-9, tol: float = 1e-6) -> np.ndarray:
    """Lower-triangular W_r with W_r W_r^H = R - sum_k w_k w_k^H.

    Eigenvalues of the residual below ``clip * lambda_max`` are set to zero
    before factoring.

    Raises
    ------
    TightnessViolation
        If the residual has an eigenvalue below ``-tol * lambda_max``.
    """
    R = herm_part(np.asarray(R, dtype=complex))
    Wc = np.asarray(ws, dtype=complex)
    if Wc.size == 0:
        Wc = np.zeros((R.shape[0], 0), dtype=complex)
    elif Wc.ndim == 1:
        Wc = Wc[:, None]
    elif Wc.shape[0] != R.shape[0]:
        Wc = Wc.T  # a list of vectors stacks as rows
    D = herm_part(R - Wc @ Wc.conj().T)
    lam = np.linalg.eigvalsh(D)
    lmax = max(float(lam[-1]), float(np.linalg.eigvalsh(R)[-1]), 0.0)
    if lam[0] < -tol * lmax:
        raise TightnessViolation(f"residual covariance has eigenvalue {lam[0]:.3e} "
                                 f"(lambda_max {lmax:.3e})")
    return lower_factor(D, clip)


def sdr_beamform(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, H,
                 obj: RadarObjective | None = None) -> DesignOutcome:
    """Relax, extract the user precoders, complete the radar precoder."""
    from .metrics import sinr_closed_form

    t0 = time.perf_counter()
    ch = H if isinstance(H, Channel) else Channel(H)
    obj = obj or build_radar_loss(geom, spec)
    rel = sdr_solve(geom, spec, cfg, ch, obj)
    diag = _diag_info(rel.solution, t0)
    if rel.status is not DesignStatus.FEASIBLE:
        return DesignOutcome(rel.status, "sdr", diagnostics=diag)
    ws = []
    for k in range(ch.K):
        try:
            ws.append(rank_one_extract(rel.Rk[k], ch.h(k)))
        except DegenerateExtraction:
            if not cfg.allow_degenerate:
                raise
            ws.append(np.zeros(ch.M, dtype=complex))
    Wc = np.column_stack(ws)
    Wr = radar_precoder_completion(rel.R, Wc)
    pre = Precoder(Wc, Wr)
    Rt = pre.covariance()
    gamma = sinr_closed_form(ch.H, pre, cfg.noise_power)
    Gam = cfg.thresholds(ch.K)
    if np.any(gamma < Gam - cfg.sinr_tol):
        raise TightnessViolation(f"extracted SINR {gamma} below thresholds {Gam}")
    loss = eval_loss(obj, Rt, rel.alpha)
    diag.update(relaxed_loss=rel.loss, wall_s=time.perf_counter() - t0)
    return DesignOutcome(DesignStatus.FEASIBLE, "sdr", Rt, pre, rel.alpha, loss, gamma, diag)


# ---------------------------------------------------------------------------
# zero forcing


@dataclass(frozen=True)
class ZFSolution:
    status: DesignStatus
    R: np.ndarray | None
    p: np.ndarray | None
    alpha: float
    loss: float
    solution: ConicSolution


def zf_problem(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, ch: Channel,
               obj: RadarObjective | None = None) -> tuple[ConicProblem, _Layout]:
    """Problem over (R, alpha) with H R H^H diagonal and diag(H R H^H) >= G s2."""
    obj = obj or build_radar_loss(geom, spec)
    K, M = ch.K, geom.M
    if ch.M != M:
        raise ValueError(f"channel has {ch.M} antennas, array has {M}")
    lay = _Layout(M, 1)
    A0, b0 = lay.power_rows(cfg.total_power)
    rows = []
    for i in range(K):
        for j in range(i + 1, K):
            X = np.outer(ch.h(j), ch.h(i).conj())  # tr(R X) = h_i^H R h_j
            rows.append(lay.row(0, inner_functional(X)))
            rows.append(lay.row(0, inner_functional(-1j * X)))
    if rows:
        A = sp.vstack([A0, sp.csr_matrix(np.array(rows))], format="csr")
        b = np.concatenate([b0, np.zeros(len(rows))])
    else:
        A, b = A0, b0
    Gam = cfg.thresholds(K)
    G = np.array([-lay.row(0, inner_functional(np.outer(ch.h(k), ch.h(k).conj()))) for k in range(K)])
    h = -Gam * cfg.noise_power * (1.0 + cfg.sinr_margin)
    psd = [PSDBlock(lay.select({0: 1.0}), np.zeros(lay.d))]
    return ConicProblem(lay.n, lay.objective(obj), psd=psd, A=A, b=b, G=G, h=h), lay


def zf_solve(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, H,
             obj: RadarObjective | None = None) -> ZFSolution:
    ch = H if isinstance(H, Channel) else Channel(H)
    obj = obj or build_radar_loss(geom, spec)
    prob, lay = zf_problem(geom, spec, cfg, ch, obj)
    sol = _solve_or_fail(prob, cfg)
    status = _status_of(sol)
    if status is not DesignStatus.FEASIBLE:
        return ZFSolution(status, None, None, float("nan"), float("nan"), sol)
    R = smat(sol.x[lay.block(0)])
    p = np.real(np.einsum("km,mn,kn->k", ch.H, R, ch.H.conj()))
    alpha = float(sol.x[lay.alpha])
    return ZFSolution(status, R, p, alpha, eval_loss(obj, R, alpha), sol)


def zf_construct_precoder(R: np.ndarray, F: np.ndarray, H: np.ndarray, rtol: float = 1e-8,
                          clip: float = 1e-9) -> np.ndarray:
    """W (M x (K+M)) with W W^H = R and H W = F, given H R H^H = F F^H.

    With H L_r = [L_h, 0] Q_h and F = [L_f, 0] Q_f (row QRs with positive real
    diagonals) the Gram condition forces L_h = L_f, and W = L_r Q_h^H Q_f[:M]
    satisfies both identities.

    Raises
    ------
    PreconditionViolation
        If ||H R H^H - F F^H||_F > rtol ||F F^H||_F.
    DegenerateUser
        If F does not have full row rank.
    """
    R = herm_part(np.asarray(R, dtype=complex))
    F = np.atleast_2d(np.asarray(F, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    K, M = H.shape
    if R.shape != (M, M) or F.shape != (K, K + M):
        raise ValueError(f"shapes R {R.shape}, F {F.shape}, H {H.shape} do not conform")
    FF = F @ F.conj().T
    gram = H @ R @ H.conj().T
    if np.linalg.norm(gram - FF) > rtol * max(np.linalg.norm(FF), np.finfo(float).tiny):
        raise PreconditionViolation("H R H^H does not match F F^H")
    L_f, Q_f = row_qr(F)
    d = np.abs(np.diagonal(L_f))
    if np.any(d <= 1e-12 * max(float(np.max(d)), np.finfo(float).tiny)):
        raise DegenerateUser("F is rank deficient (a user receives no power)")
    L_r = lower_factor(R, clip)
    _, Q_h = row_qr(H @ L_r)
    return L_r @ Q_h.conj().T @ Q_f[:M]


def gamma_II(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, H,
             obj: RadarObjective | None = None) -> float:
    """Fairness SINR min(p) / s2 of the ZF problem without SINR constraints."""
    sol = zf_solve(geom, spec, cfg.with_sinr(0.0), H, obj)
    if sol.status is not DesignStatus.FEASIBLE:
        raise SolverFailure(f"unconstrained ZF problem returned {sol.status}", sol.solution)
    return float(np.min(sol.p) / cfg.noise_power)


def zf_beamform(geom: ArrayGeometry, spec: BeamSpec, cfg: DesignConfig, H,
                obj: RadarObjective | None = None) -> DesignOutcome:
    """ZF design with target F = [diag(sqrt(p)), 0].

    When ``cfg.zf_reuse_unconstrained`` is set the problem without SINR
    constraints is solved first; if its solution already meets every
    threshold it is optimal for the constrained problem too and is used as is,
    so the design is identical for all thresholds up to Gamma_II.
    """
    from .metrics import sinr_closed_form

    t0 = time.perf_counter()
    ch = H if isinstance(H, Channel) else Channel(H)
    obj = obj or build_radar_loss(geom, spec)
    Gam = cfg.thresholds(ch.K)
    res = None
    reused = False
    if cfg.zf_reuse_unconstrained and np.any(Gam > 0):
        free = zf_solve(geom, spec, cfg.with_sinr(0.0), ch, obj)
        # relative slack keeps Gamma == Gamma_II (up to rounding) on the plateau
        if free.status is DesignStatus.FEASIBLE and np.all(free.p >= Gam * cfg.noise_power * (1 - 1e-9)):
            res, reused = free, True
    if res is None:
        res = zf_solve(geom, spec, cfg, ch, obj)
    diag = _diag_info(res.solution, t0)
    diag["reused_unconstrained"] = reused
    if res.status is not DesignStatus.FEASIBLE:
        return DesignOutcome(res.status, "zf", diagnostics=diag)
    K, M = ch.K, ch.M
    p = np.maximum(res.p, 0.0)
    F = np.hstack([np.diag(np.sqrt(p)), np.zeros((K, M))])
    W = zf_construct_precoder(res.R, F, ch.H, rtol=1e-6)
    pre = Precoder(W[:, :K], W[:, K:])
    gamma = sinr_closed_form(ch.H, pre, cfg.noise_power)
    diag.update(p=p.tolist(), wall_s=time.perf_counter() - t0)
    return DesignOutcome(DesignStatus.FEASIBLE, "zf", pre.covariance(), pre, res.alpha,
                         eval_loss(obj, pre.covariance(), res.alpha), gamma, diag)
