"""Plain-text fixed-layout LP dump for fixture replay.

Layout (one record per line, fields right-aligned, numbers in ``%.17e``
so values round-trip exactly; ``inf``/``-inf`` for infinite bounds)::

    LPDUMP 1
    SENSE max
    SIZE    <rows> <cols> <nonzeros>
    COST    <col> <value>            (one line per column)
    BOUND   <col> <lo> <hi>          (one line per column)
    ROW     <row> <sense> <rhs>      (one line per row; sense is L, E or G)
    COEF    <row> <col> <value>      (one line per nonzero, row-major)
    END
"""

import numpy as np
import scipy.sparse as sp

from . import EQ, GE, LE, LinearProgram, StructureError

_CODE = {LE: "L", EQ: "E", GE: "G"}
_SENSE = {v: k for k, v in _CODE.items()}


def _num(v):
    return f"{v:>25.17e}" if np.isfinite(v) else f"{('inf' if v > 0 else '-inf'):>25}"


def dumps(lp):
    A = sp.csr_matrix(lp.A)
    m, n = A.shape
    out = ["LPDUMP 1", f"SENSE {lp.sense}", f"SIZE  {m:>8d} {n:>8d} {A.nnz:>10d}"]
    out += [f"COST  {j:>8d} {_num(v)}" for j, v in enumerate(lp.c)]
    out += [f"BOUND {j:>8d} {_num(a)} {_num(b)}" for j, (a, b) in enumerate(zip(lp.lo, lp.hi))]
    out += [f"ROW   {i:>8d} {_CODE[s]} {_num(r)}" for i, (s, r) in enumerate(zip(lp.senses, lp.b))]
    for i in range(m):
        for p in range(A.indptr[i], A.indptr[i + 1]):
            out.append(f"COEF  {i:>8d} {A.indices[p]:>8d} {_num(A.data[p])}")
    out.append("END")
    return "\n".join(out) + "\n"


def loads(text):
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != ["LPDUMP", "1"]:
        raise StructureError("not an LPDUMP 1 file")
    if lines[-1] != ["END"]:
        raise StructureError("truncated LP dump")
    sense = lines[1][1]
    m, n, nnz = (int(v) for v in lines[2][1:])
    c = np.zeros(n)
    lo = np.zeros(n)
    hi = np.zeros(n)
    b = np.zeros(m)
    senses = [None] * m
    rows, cols, vals = [], [], []
    for rec in lines[3:-1]:
        tag = rec[0]
        if tag == "COST":
            c[int(rec[1])] = float(rec[2])
        elif tag == "BOUND":
            lo[int(rec[1])] = float(rec[2])
            hi[int(rec[1])] = float(rec[3])
        elif tag == "ROW":
            i = int(rec[1])
            senses[i] = _SENSE[rec[2]]
            b[i] = float(rec[3])
        elif tag == "COEF":
            rows.append(int(rec[1]))
            cols.append(int(rec[2]))
            vals.append(float(rec[3]))
        else:
            raise StructureError(f"unknown record {tag!r}")
    if len(vals) != nnz or any(s is None for s in senses):
        raise StructureError("LP dump is inconsistent with its SIZE line")
    A = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    return LinearProgram(c, A, tuple(senses), b, lo, hi, sense)


def dump(path, lp):
    with open(path, "w") as fh:
        fh.write(dumps(lp))


def load(path):
    with open(path) as fh:
        return loads(fh.read())
