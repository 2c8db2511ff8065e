"""Text matrix format shared by precoders, covariances and waveform blocks.

Line 1 holds ``rows cols``; each following line holds one matrix row as
space-separated ``re im`` pairs, so a row has ``2 * cols`` numbers. Values are
written with ``repr`` precision and read back bit-for-bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class MatrixFormatError(ValueError):
    pass


def format_matrix(X: np.ndarray) -> str:
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    if X.ndim != 2:
        raise MatrixFormatError("only 2-D arrays can be written")
    rows, cols = X.shape
    lines = [f"{rows} {cols}"]
    for row in X:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise MatrixFormatError("header must be 'rows cols'")
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError:
        raise MatrixFormatError(f"bad header {lines[0]!r}") from None
    if rows < 0 or cols < 0 or len(lines) - 1 != rows:
        raise MatrixFormatError(f"expected {rows} data rows, found {len(lines) - 1}")
    out = np.empty((rows, cols), dtype=complex)
    for i, ln in enumerate(lines[1:]):
        try:
            vals = np.array(ln.split(), dtype=float)
        except ValueError:
            raise MatrixFormatError(f"row {i}: non-numeric entry") from None
        if vals.size != 2 * cols:
            raise MatrixFormatError(f"row {i}: expected {2 * cols} numbers, got {vals.size}")
        out[i] = vals[0::2] + 1j * vals[1::2]
    return out


def write_matrix(path, X: np.ndarray) -> None:
    Path(path).write_text(format_matrix(X))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())
