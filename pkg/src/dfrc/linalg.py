"""Real parametrization of complex Hermitian matrices and PSD factor helpers.

``svec`` maps an M x M Hermitian matrix to a real vector of length M**2: the M
diagonal entries first, then for every strictly upper entry (i < j, row-major)
the pair (sqrt(2) Re x_ij, sqrt(2) Im x_ij). The map is an isometry between the
real inner product Re tr(A^H B) and the Euclidean one.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


class NotHermitianError(ValueError):
    pass


@lru_cache(maxsize=64)
def _upper_index(m: int) -> tuple[np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(m, k=1)
    return iu, ju


def svec_dim(m: int) -> int:
    return m * m


def svec_order(n: int) -> int:
    """Matrix order M with M**2 == n."""
    m = int(round(np.sqrt(n)))
    if m * m != n:
        raise ValueError(f"{n} is not a perfect square")
    return m


def svec(X: np.ndarray, check: bool = True) -> np.ndarray:
    """Hermitian matrix (or stack of matrices, shape (..., M, M)) to real vectors."""
    X = np.asarray(X)
    m = X.shape[-1]
    if X.shape[-2] != m:
        raise ValueError("expected square matrices")
    if check:
        scale = max(1.0, float(np.max(np.abs(X)))) if X.size else 1.0
        if np.max(np.abs(X - np.swapaxes(X, -1, -2).conj()), initial=0.0) > 1e-10 * scale:
            raise NotHermitianError("svec requires a Hermitian matrix")
    iu, ju = _upper_index(m)
    diag = np.real(np.diagonal(X, axis1=-2, axis2=-1))
    up = X[..., iu, ju]
    pairs = np.stack([up.real, up.imag], axis=-1).reshape(*X.shape[:-2], -1) * SQRT2
    return np.concatenate([diag, pairs], axis=-1)


def smat(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`svec`; accepts a stack of vectors (..., M**2)."""
    v = np.asarray(v, dtype=float)
    m = svec_order(v.shape[-1])
    iu, ju = _upper_index(m)
    X = np.zeros((*v.shape[:-1], m, m), dtype=complex)
    idx = np.arange(m)
    X[..., idx, idx] = v[..., :m]
    pairs = v[..., m:].reshape(*v.shape[:-1], -1, 2) / SQRT2
    up = pairs[..., 0] + 1j * pairs[..., 1]
    X[..., iu, ju] = up
    X[..., ju, iu] = up.conj()
    return X


@lru_cache(maxsize=16)
def svec_basis(m: int) -> np.ndarray:
    """Hermitian matrices smat(e_i) for the M**2 unit vectors, shape (M**2, M, M)."""
    B = smat(np.eye(m * m))
    B.setflags(write=False)
    return B


def herm_part(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + np.swapaxes(X, -1, -2).conj())


def inner_functional(X: np.ndarray) -> np.ndarray:
    """Real row vector c with c @ svec(R) == Re tr(R X) for every Hermitian R."""
    return svec(herm_part(np.asarray(X, dtype=complex)), check=False)


def psd_sqrt_factor(R: np.ndarray, clip: float = 1e-9) -> np.ndarray:
    """Square factor B with B B^H = R after clipping eigenvalues below
    ``clip * lambda_max`` to zero."""
    R = herm_part(np.asarray(R, dtype=complex))
    lam, V = np.linalg.eigh(R)
    lmax = max(float(lam[-1]), 0.0) if lam.size else 0.0
    lam = np.where(lam < clip * lmax, 0.0, lam)
    return V * np.sqrt(lam)


def lower_factor(R: np.ndarray, clip: float = 1e-9) -> np.ndarray:
    """Lower-triangular L with L L^H = R for a (possibly singular) PSD R.

    Uses an eigen square root followed by a QR of its adjoint, which is stable
    for semidefinite input where a plain Cholesky breaks down. Diagonal of L
    is real and nonnegative.
    """
    B = psd_sqrt_factor(R, clip)
    if B.size == 0:
        return B
    _, U = np.linalg.qr(B.conj().T)
    L = U.conj().T
    d = np.diagonal(L)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return L * ph.conj()[None, :]


def row_qr(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row QR: A (m x n, m <= n) = [L, 0] Q with L lower triangular having a
    real positive diagonal (where nonzero) and Q an n x n unitary matrix."""
    A = np.asarray(A, dtype=complex)
    m, n = A.shape
    if m > n:
        raise ValueError("row QR needs at least as many columns as rows")
    P, U = np.linalg.qr(A.conj().T, mode="complete")  # A^H = P U
    d = np.diagonal(U[:m, :m]).copy()
    ph = np.ones(n, dtype=complex)
    nz = np.abs(d) > 0
    ph[:m][nz] = d[nz] / np.abs(d[nz])
    # A^H = (P D)(D^H U), D = diag(ph)
    P = P * ph[None, :]
    U = ph.conj()[:, None] * U
    L = U[:m, :m].conj().T
    return L, P.conj().T
