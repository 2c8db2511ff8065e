"""Waveform-level Monte Carlo verification of a precoder.

Covers Rayleigh channel draws, QPSK radar and communication streams, the
transmit block X = W_r S + W_c C, the downlink and radar receive models, range
compression by matched filtering and the Capon spatial spectrum.

Random streams come from ``numpy.random.Generator`` (PCG64). Per-trial
generators are seeded with ``(master_seed, trial)`` through
:func:`trial_rng`, so sweeps are reproducible regardless of execution order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .array import ArrayGeometry, steering_vector
from .design import Channel, Precoder
from .matio import write_matrix


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one trial, keyed by (master_seed, *key)."""
    return np.random.default_rng([int(master_seed), *map(int, key)])


def rayleigh_channel(K: int, M: int, rng: np.random.Generator) -> Channel:
    """K x M matrix of i.i.d. CN(0, 1) entries."""
    if K >= M:
        raise ValueError(f"need K < M, got K={K}, M={M}")
    H = (rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))) / np.sqrt(2.0)
    return Channel(H)


_QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


def gen_qpsk(rows: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """rows x N matrix of unit-modulus QPSK symbols (+-1 +-j) / sqrt(2)."""
    if N < 1 or rows < 0:
        raise ValueError("need N >= 1 and rows >= 0")
    return _QPSK[rng.integers(0, 4, size=(rows, N))]


@dataclass(frozen=True)
class WaveformBlock:
    S: np.ndarray  # M x N radar waveform
    C: np.ndarray  # K x N communication symbols
    X: np.ndarray  # M x N transmit block

    @property
    def N(self) -> int:
        return self.X.shape[1]

    def sample_covariance(self) -> np.ndarray:
        return self.X @ self.X.conj().T / self.N

    def save(self, path) -> None:
        write_matrix(path, self.X)


@dataclass(frozen=True)
class RadarTarget:
    amplitude: complex
    delay: int
    angle: float

    def __post_init__(self):
        if int(self.delay) != self.delay or self.delay < 0:
            raise ValueError("delay must be a nonnegative integer")


@dataclass(frozen=True)
class NoiseModel:
    comm_var: float = 0.01
    radar_var: float = 1.0

    def __post_init__(self):
        if self.comm_var < 0 or self.radar_var < 0:
            raise ValueError("noise variances must be nonnegative")


def _cn(shape, var: float, rng: np.random.Generator) -> np.ndarray:
    if var == 0:
        return np.zeros(shape, dtype=complex)
    return np.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def transmit(W: Precoder, S: np.ndarray, C: np.ndarray) -> np.ndarray:
    """X = W_r S + W_c C."""
    S = np.asarray(S)
    C = np.asarray(C)
    if S.shape[0] != W.Wr.shape[1] or C.shape[0] != W.Wc.shape[1] or S.shape[1] != C.shape[1]:
        raise ValueError(f"shapes do not conform: Wr {W.Wr.shape}, S {S.shape}, "
                         f"Wc {W.Wc.shape}, C {C.shape}")
    return W.Wr @ S + W.Wc @ C


def waveform_block(W: Precoder, N: int, rng: np.random.Generator) -> WaveformBlock:
    S = gen_qpsk(W.M, N, rng)
    C = gen_qpsk(W.K, N, rng)
    return WaveformBlock(S, C, transmit(W, S, C))


def comm_receive(H, X: np.ndarray, noise: NoiseModel | float, rng: np.random.Generator) -> np.ndarray:
    """Y = H X + V with V i.i.d. CN(0, s2)."""
    H = H.H if isinstance(H, Channel) else np.atleast_2d(np.asarray(H, dtype=complex))
    var = noise.comm_var if isinstance(noise, NoiseModel) else float(noise)
    Y = H @ X
    return Y + _cn(Y.shape, var, rng)


def empirical_sinr(H, W: Precoder, block: WaveformBlock, Y: np.ndarray) -> np.ndarray:
    """Per-user SINR estimated from received samples.

    The useful part of row k is the projection of Y_k on the known stream
    C_k (least-squares gain); everything else counts as interference plus
    noise.
    """
    C = block.C
    N = block.N
    g = np.sum(Y * C.conj(), axis=1) / np.sum(np.abs(C) ** 2, axis=1)
    useful = g[:, None] * C
    sig = np.sum(np.abs(useful) ** 2, axis=1) / N
    rest = np.sum(np.abs(Y - useful) ** 2, axis=1) / N
    return sig / rest


def radar_receive(geom: ArrayGeometry, targets, X: np.ndarray, noise: NoiseModel | float,
                  rng: np.random.Generator) -> np.ndarray:
    """r[n] = sum_t beta_t a^c(theta_t) a^H(theta_t) x[n - n_t] + v[n].

    Delays are zero-padded shifts; samples shifted past the block end are lost.
    """
    X = np.asarray(X)
    M, N = X.shape
    var = noise.radar_var if isinstance(noise, NoiseModel) else float(noise)
    r = np.zeros((M, N), dtype=complex)
    for t in targets:
        if t.delay >= N:
            raise ValueError(f"delay {t.delay} outside block of length {N}")
        a = steering_vector(geom, t.angle)
        y = t.amplitude * np.outer(a.conj(), a.conj() @ X)
        r[:, t.delay:] += y[:, : N - t.delay]
    return r + _cn(r.shape, var, rng)


def range_compress(received: np.ndarray, X: np.ndarray, max_delay: int | None = None) -> np.ndarray:
    """Matched filter against the known transmit block for each delay.

    Returns an array of shape (D, M, M) whose slice d is
    Z(d) = (1/N) sum_n r[n] x[n - d]^H. A target at delay d with amplitude
    beta contributes beta a^c a^H (1/N) sum x x^H, so the energy of Z peaks at
    the target delays.
    """
    r = np.asarray(received)
    X = np.asarray(X)
    M, N = r.shape
    D = N if max_delay is None else min(int(max_delay) + 1, N)
    out = np.empty((D, M, X.shape[0]), dtype=complex)
    for d in range(D):
        out[d] = r[:, d:] @ X[:, : N - d].conj().T / N
    return out


def range_profile(Z: np.ndarray, geom: ArrayGeometry | None = None, theta=None) -> np.ndarray:
    """Per-delay energy ||Z(d)||_F^2, or |a^T(theta) Z(d) a(theta)|^2 toward ``theta``."""
    if theta is None:
        return np.sum(np.abs(Z) ** 2, axis=(1, 2))
    a = steering_vector(geom, theta)
    return np.abs(np.einsum("m,dmn,n->d", a, Z, a)) ** 2


def bin_covariance(Z_d: np.ndarray) -> np.ndarray:
    """Spatial covariance of one range bin in steering-vector orientation.

    Returns in the radar model carry a^c(theta), so the bin's column space is
    conjugated before forming the covariance.
    """
    Zc = np.conj(Z_d)
    return Zc @ Zc.conj().T / Z_d.shape[1]


def capon_spectrum(Rhat: np.ndarray, geom: ArrayGeometry, grid, loading: float = 1e-3) -> np.ndarray:
    """1 / (a^H (R + delta tr(R)/M I)^{-1} a) over ``grid`` degrees."""
    Rhat = np.asarray(Rhat, dtype=complex)
    M = Rhat.shape[0]
    Rl = 0.5 * (Rhat + Rhat.conj().T) + loading * np.real(np.trace(Rhat)) / M * np.eye(M)
    if not np.real(np.trace(Rl)) > 0:
        Rl = Rl + np.eye(M)
    A = steering_vector(geom, np.atleast_1d(np.asarray(grid, dtype=float)))
    sol = np.linalg.solve(Rl, A)
    return 1.0 / np.real(np.sum(A.conj() * sol, axis=0))


def find_peaks(values: np.ndarray, count: int, axis_values=None) -> np.ndarray:
    """Positions of the ``count`` largest local maxima (ties at plateaus kept once)."""
    v = np.asarray(values, dtype=float)
    x = np.arange(v.size) if axis_values is None else np.asarray(axis_values)
    left = np.r_[-np.inf, v[:-1]]
    right = np.r_[v[1:], -np.inf]
    idx = np.flatnonzero((v > left) & (v >= right))
    top = idx[np.argsort(v[idx], kind="stable")[::-1][:count]]
    return np.sort(x[top])


REFERENCE_TARGETS = (
    RadarTarget(1.0, 10, 0.0),
    RadarTarget(1.0, 20, -40.0),
    RadarTarget(1.0, 20, 0.0),
    RadarTarget(1.0, 20, 40.0),
    RadarTarget(1.0, 30, 0.0),
)


def series_csv(x, y, header=("x", "value")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for a, b in zip(np.asarray(x).ravel(), np.asarray(y).ravel()):
        w.writerow([f"{float(a):.10g}", f"{float(b):.10g}"])
    return buf.getvalue()
