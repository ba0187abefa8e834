"""Fixed-format MPS export for cross-checking with external solvers.

Names are written as ``R<i>`` / ``C<j>``; long model names do not fit the
8-character fields. A name map is returned so callers can translate back.
"""
from __future__ import annotations

import math

from .program import EQ, GE, LE, LinearProgram

_SENSE = {LE: "L", GE: "G", EQ: "E"}


def _num(v: float) -> str:
    # most significant digits that still fit the 12-character field
    s = repr(float(v))
    prec = 12
    while len(s) > 12 and prec > 1:
        s = f"{v:.{prec}g}"
        prec -= 1
    return s


def to_mps(lp: LinearProgram) -> tuple[str, dict[str, str]]:
    rows = [f"R{i}" for i in range(lp.n_rows)]
    cols = [f"C{j}" for j in range(lp.n_cols)]
    names = {**dict(zip(rows, lp.row_names)), **dict(zip(cols, lp.col_names))}
    by_col: list[list[tuple[int, float]]] = [[] for _ in cols]
    for i in range(lp.n_rows):
        for j, v in lp.row_entries(i):
            by_col[j].append((i, v))

    out = [f"NAME          {lp.name[:8]}", "ROWS", " N  COST"]
    out += [f" {_SENSE[s]:<2} {r}" for s, r in zip(lp.senses, rows)]
    out.append("COLUMNS")
    for j, cname in enumerate(cols):
        entries = [("COST", lp.cost[j])] if lp.cost[j] else []
        entries += [(rows[i], v) for i, v in by_col[j]]
        if not entries:
            entries = [("COST", 0.0)]
        for rname, v in entries:
            out.append(f"    {cname:<8}  {rname:<8}  {_num(v):>12}")
    out.append("RHS")
    for i, r in enumerate(rows):
        if lp.rhs[i]:
            out.append(f"    RHS       {r:<8}  {_num(lp.rhs[i]):>12}")
    out.append("BOUNDS")
    for j, cname in enumerate(cols):
        lo, up = lp.lower[j], lp.upper[j]
        if lo == up:
            out.append(f" FX BND       {cname:<8}  {_num(lo):>12}")
            continue
        if math.isinf(lo) and math.isinf(up):
            out.append(f" FR BND       {cname:<8}")
            continue
        if math.isinf(lo):
            out.append(f" MI BND       {cname:<8}")
        elif lo != 0:
            out.append(f" LO BND       {cname:<8}  {_num(lo):>12}")
        if not math.isinf(up):
            out.append(f" UP BND       {cname:<8}  {_num(up):>12}")
    out.append("ENDATA")
    return "\n".join(out) + "\n", names


def write_mps(lp: LinearProgram, path) -> dict[str, str]:
    text, names = to_mps(lp)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)
    return names
