"""Uniform linear array geometry, steering vectors and transmit beam patterns.

Angles are given in degrees at every public entry point and converted to
radians internally. The steering phase convention is

    a_m(theta) = exp(+j * 2 * pi * spacing * m * sin(theta)),  m = 0, ..., M-1

Any consistent convention gives identical beam patterns, so this one is fixed
and used everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


@dataclass(frozen=True)
class ArrayGeometry:
    num_elements: int
    element_spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise DomainError(f"num_elements must be a positive integer, got {self.num_elements}")
        if not self.element_spacing > 0:
            raise DomainError(f"element_spacing must be positive, got {self.element_spacing}")

    @property
    def M(self) -> int:
        return int(self.num_elements)


@dataclass(frozen=True)
class BeamSpec:
    """Desired radar beampattern: ideal beams of width ``beam_width`` centred
    on ``target_directions``, sampled on ``grid`` (all in degrees).

    ``cross_weight`` weights the mean-squared cross-correlation term of the
    radar loss.
    """

    target_directions: tuple[float, ...]
    beam_width: float
    grid: np.ndarray = field(repr=False)
    cross_weight: float = 1.0

    def __post_init__(self):
        targets = tuple(float(t) for t in np.atleast_1d(self.target_directions))
        grid = np.asarray(self.grid, dtype=float).ravel()
        object.__setattr__(self, "target_directions", targets)
        object.__setattr__(self, "grid", grid)
        grid.setflags(write=False)
        if len(targets) < 1:
            raise DomainError("at least one target direction is required")
        if not self.beam_width > 0:
            raise DomainError("beam_width must be positive")
        if self.cross_weight < 0:
            raise DomainError("cross_weight must be nonnegative")
        if grid.size < 1 or np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be nonempty and strictly increasing")
        for ang in (*targets, grid[0], grid[-1]):
            _check_angle(ang)

    @property
    def P(self) -> int:
        return len(self.target_directions)

    @property
    def L(self) -> int:
        return self.grid.size

    def desired(self) -> np.ndarray:
        """Desired pattern d(theta_l) on the grid."""
        return desired_pattern(self, self.grid)

    @classmethod
    def reference_default(cls, resolution: float = 0.1) -> "BeamSpec":
        """Three 10-degree beams at -40, 0 and 40 degrees on a [-90, 90] grid."""
        return cls((-40.0, 0.0, 40.0), 10.0, angle_grid(-90.0, 90.0, resolution), 1.0)


def _check_angle(theta) -> None:
    th = np.asarray(theta, dtype=float)
    if np.any(np.abs(th) > 90.0 + 1e-9) or np.any(~np.isfinite(th)):
        raise DomainError(f"angles must lie in [-90, 90] degrees, got {theta}")


def steering_vector(geom: ArrayGeometry, theta) -> np.ndarray:
    """Steering vector(s) toward ``theta`` degrees.

    A scalar angle gives a length-M vector; an array of L angles gives an
    (M, L) matrix whose columns are the steering vectors.
    """
    _check_angle(theta)
    th = np.deg2rad(np.asarray(theta, dtype=float))
    m = np.arange(geom.M)
    phase = 2.0 * np.pi * geom.element_spacing * np.multiply.outer(m, np.sin(th))
    return np.exp(1j * phase)


def _check_hermitian(R: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    scale = max(1.0, float(np.max(np.abs(R)))) if R.size else 1.0
    if np.max(np.abs(R - R.conj().T), initial=0.0) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return R


def beam_pattern(geom: ArrayGeometry, R: np.ndarray, theta) -> np.ndarray | float:
    """Transmit power a(theta)^H R a(theta) toward ``theta`` (scalar or array)."""
    R = _check_hermitian(R)
    A = steering_vector(geom, np.atleast_1d(theta))
    val = np.einsum("ml,mn,nl->l", A.conj(), R, A)
    re = val.real
    if np.any(np.abs(val.imag) > 1e-10 * np.abs(re) + 1e-12 * max(1.0, np.abs(R).max())):
        raise ValueError("beam pattern has a non-negligible imaginary part")
    return float(re[0]) if np.ndim(theta) == 0 else re


def cross_correlation(geom: ArrayGeometry, R: np.ndarray, theta1, theta2) -> complex:
    """Cross-correlation pattern a(theta2)^H R a(theta1)."""
    R = _check_hermitian(R)
    a1 = steering_vector(geom, theta1)
    a2 = steering_vector(geom, theta2)
    return complex(a2.conj() @ R @ a1)


def desired_pattern(spec: BeamSpec, theta) -> np.ndarray | float:
    """Ideal 0/1 beampattern; beam edges are included."""
    th = np.asarray(theta, dtype=float)
    half = spec.beam_width / 2.0
    # small slack so grid points that land on an edge up to round-off count as inside
    eps = 1e-9 * max(1.0, spec.beam_width)
    inside = np.zeros(th.shape, dtype=bool)
    for c in spec.target_directions:
        inside |= (th >= c - half - eps) & (th <= c + half + eps)
    out = inside.astype(float)
    return float(out) if out.ndim == 0 else out


def angle_grid(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Uniform grid from ``lo`` in steps of ``resolution``, last point <= hi."""
    if not resolution > 0:
        raise DomainError("resolution must be positive")
    if not lo < hi:
        raise DomainError("lo must be smaller than hi")
    n = int(np.floor((hi - lo) / resolution + 1e-9)) + 1
    # integer multiples avoid drift from repeated addition
    grid = lo + resolution * np.arange(n)
    return np.round(grid, 12)
