"""Plain-text dump of a ConicProblem for cross-checking with other solvers.

Layout (whitespace separated, one record per line)::

    conic 1
    n <n>
    Q <n> <n>            followed by n rows
    q <n>                followed by one row
    c <value>
    A <p> <n>            followed by p rows, then
    b <p>                followed by one row (omitted rows when p = 0)
    G <m> <n> / h <m>    same layout as A / b
    psd <count>          then per block: "block <order> <rows>", F rows, g row
    soc <count>          then per block: "block <rows>", F rows, g row

All matrices are dense and row-major; numbers use repr-exact formatting.
"""

from __future__ import annotations

import io as _io
from pathlib import Path

import numpy as np

from .problem import ConicProblem, ConicProblemError, PSDBlock, SOCBlock


def _fmt_row(v) -> str:
    return " ".join(repr(float(x)) for x in np.ravel(v))


def _write_matrix(out, tag, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    out.write(f"{tag} {M.shape[0]} {M.shape[1]}\n")
    for row in M:
        out.write(_fmt_row(row) + "\n")


def _write_vector(out, tag, v):
    v = np.asarray(v, dtype=float).ravel()
    out.write(f"{tag} {v.size}\n{_fmt_row(v)}\n")


def dumps(problem: ConicProblem) -> str:
    out = _io.StringIO()
    n = problem.n
    out.write("conic 1\n")
    out.write(f"n {n}\n")
    _write_matrix(out, "Q", problem.Q)
    _write_vector(out, "q", problem.q)
    out.write(f"c {problem.c!r}\n")
    for M, v, mt, vt in ((problem.A, problem.b, "A", "b"), (problem.G, problem.h, "G", "h")):
        dense = M.toarray().reshape(-1, n)
        out.write(f"{mt} {dense.shape[0]} {n}\n")
        for row in dense:
            out.write(_fmt_row(row) + "\n")
        _write_vector(out, vt, v)
    out.write(f"psd {len(problem.psd)}\n")
    for blk in problem.psd:
        F = blk.F.toarray()
        out.write(f"block {blk.order} {F.shape[0]}\n")
        for row in F:
            out.write(_fmt_row(row) + "\n")
        out.write(_fmt_row(blk.g) + "\n")
    out.write(f"soc {len(problem.soc)}\n")
    for blk in problem.soc:
        F = blk.F.toarray()
        out.write(f"block {F.shape[0]}\n")
        for row in F:
            out.write(_fmt_row(row) + "\n")
        out.write(_fmt_row(blk.g) + "\n")
    return out.getvalue()


class _Reader:
    def __init__(self, text: str):
        self.lines = [ln for ln in text.splitlines()]
        self.i = 0

    def line(self) -> list[str]:
        if self.i >= len(self.lines):
            raise ConicProblemError("unexpected end of problem file")
        toks = self.lines[self.i].split()
        self.i += 1
        return toks

    def header(self, tag: str) -> list[int]:
        toks = self.line()
        if not toks or toks[0] != tag:
            raise ConicProblemError(f"expected '{tag}' on line {self.i}, got {' '.join(toks)!r}")
        return toks[1:]

    def row(self, width: int) -> np.ndarray:
        toks = self.line() if width else []
        if width == 0 and self.i < len(self.lines) and not self.lines[self.i].strip():
            self.i += 1
        vals = np.array([float(t) for t in toks])
        if vals.size != width:
            raise ConicProblemError(f"line {self.i}: expected {width} numbers, got {vals.size}")
        return vals

    def rows(self, count: int, width: int) -> np.ndarray:
        return np.array([self.row(width) for _ in range(count)]).reshape(count, width)


def loads(text: str) -> ConicProblem:
    r = _Reader(text)
    if r.header("conic") != ["1"]:
        raise ConicProblemError("unsupported problem file version")
    n = int(r.header("n")[0])
    qr, qc = map(int, r.header("Q"))
    Q = r.rows(qr, qc)
    q = r.row(int(r.header("q")[0]))
    c = float(r.header("c")[0])
    pair = {}
    for mt, vt in (("A", "b"), ("G", "h")):
        p, nn = map(int, r.header(mt))
        M = r.rows(p, nn)
        v = r.row(int(r.header(vt)[0]))
        pair[mt] = (M, v) if p else (None, None)
    psd = []
    for _ in range(int(r.header("psd")[0])):
        order, rows = map(int, r.header("block"))
        F = r.rows(rows, n)
        psd.append(PSDBlock(F, r.row(rows), order))
    soc = []
    for _ in range(int(r.header("soc")[0])):
        rows = int(r.header("block")[0])
        F = r.rows(rows, n)
        soc.append(SOCBlock(F, r.row(rows)))
    (A, b), (G, h) = pair["A"], pair["G"]
    return ConicProblem(n, Q, q, c, psd, soc, A, b, G, h)


def dump(problem: ConicProblem, path) -> None:
    Path(path).write_text(dumps(problem))


def load(path) -> ConicProblem:
    return loads(Path(path).read_text())
