"""Adapter for scipy's HiGHS backend, exposing the reference solver's contract."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .program import EQ, GE, LE, LinearProgram, LpSolution, Tolerances

_STATUS = {0: "optimal", 2: "infeasible", 3: "unbounded"}


def solve_highs(lp: LinearProgram, tolerances: Tolerances = Tolerances()) -> LpSolution:
    A, c, lo, up, senses, b = lp.arrays()
    A = A.tocsr()
    le, ge, eq = senses == LE, senses == GE, senses == EQ
    ub_rows = np.flatnonzero(le | ge)
    sign = np.where(ge[ub_rows], -1.0, 1.0)
    A_ub = A[ub_rows].multiply(sign[:, None]).tocsr() if len(ub_rows) else None
    b_ub = b[ub_rows] * sign if len(ub_rows) else None
    eq_rows = np.flatnonzero(eq)
    A_eq = A[eq_rows] if len(eq_rows) else None
    b_eq = b[eq_rows] if len(eq_rows) else None
    bounds = list(zip(np.where(np.isfinite(lo), lo, None), np.where(np.isfinite(up), up, None)))
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": tolerances.feas,
                                           "dual_feasibility_tolerance": tolerances.feas})
    status = _STATUS.get(res.status, "numerical")
    if status != "optimal":
        return LpSolution(status, lp=lp, message=res.message)
    y = np.zeros(lp.n_rows)
    if len(ub_rows):
        y[ub_rows] = res.ineqlin.marginals * sign
    if len(eq_rows):
        y[eq_rows] = res.eqlin.marginals
    d = c - (A.T @ y if lp.n_rows else 0.0)
    return LpSolution("optimal", objective=float(res.fun), x=np.asarray(res.x), duals=y,
                      reduced_costs=d, iterations=int(res.nit), lp=lp)
