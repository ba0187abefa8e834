"""Optimality certificates and finite-difference checks on LP duals."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .program import EQ, GE, LE, LinearProgram, LpSolution, Tolerances


@dataclass(frozen=True)
class KktReport:
    primal_infeasibility: float
    dual_infeasibility: float
    complementarity: float
    gap: float  # relative
    primal_objective: float
    dual_objective: float

    def ok(self, tol: Tolerances = Tolerances(), scale: float = 1.0) -> bool:
        return (self.primal_infeasibility <= tol.feas * scale
                and self.dual_infeasibility <= tol.feas * scale
                and self.complementarity <= tol.cs * scale
                and self.gap <= tol.gap)


def kkt_report(lp: LinearProgram, sol: LpSolution) -> KktReport:
    """Residuals of the optimality conditions at ``sol``.

    Primal and complementarity residuals are absolute; the gap is relative to
    ``1 + |objective|``.
    """
    A, c, lo, up, senses, b = lp.arrays()
    x, y, d = sol.x, sol.duals, sol.reduced_costs
    act = A @ x if lp.n_rows else np.zeros(0)
    row_viol = np.where(senses == LE, np.maximum(act - b, 0),
                        np.where(senses == GE, np.maximum(b - act, 0), np.abs(act - b)))
    bound_viol = np.maximum(lo - x, 0) + np.maximum(x - up, 0)
    primal = max(row_viol.max(initial=0.0), bound_viol.max(initial=0.0))

    d_check = c - (A.T @ y if lp.n_rows else 0.0)
    dual_viol = [np.abs(d_check - d).max(initial=0.0)]
    # sign of row duals for a minimization
    dual_viol.append(np.where(senses == LE, np.maximum(y, 0),
                              np.where(senses == GE, np.maximum(-y, 0), 0)).max(initial=0.0))
    # reduced cost sign against the bound each column can move away from
    free_lo = ~np.isfinite(lo)
    free_up = ~np.isfinite(up)
    dual_viol.append(np.where(free_lo, np.maximum(d, 0), 0).max(initial=0.0))
    dual_viol.append(np.where(free_up, np.maximum(-d, 0), 0).max(initial=0.0))

    slack = act - b
    cs_rows = np.abs(y * slack).max(initial=0.0)
    dist = np.where(d > 0, x - lo, np.where(d < 0, up - x, 0.0))
    dist = np.where(np.isfinite(dist), dist, 0.0)
    cs_cols = np.abs(d * dist).max(initial=0.0)

    pobj = float(c @ x)
    bound = np.where(d > 0, lo, np.where(d < 0, up, 0.0))
    finite = np.isfinite(bound)
    # a reduced cost against an infinite bound is dual infeasibility; tiny ones are noise
    if np.any(~finite & (np.abs(d) > 1e-9)):
        dobj = float("inf")
    else:
        dobj = float(b @ y + np.sum(d[finite] * bound[finite]))
    gap = abs(pobj - dobj) / (1.0 + abs(pobj))
    return KktReport(primal, max(dual_viol), max(cs_rows, cs_cols), gap, pobj, dobj)


Solver = Callable[[LinearProgram], LpSolution]


@dataclass(frozen=True)
class PerturbationResult:
    row: str
    epsilon: float
    numeric: float
    reported: float
    agrees: bool
    message: str = ""


def dual_perturbation_check(lp: LinearProgram, row, epsilon: float,
                            solver: Optional[Solver] = None,
                            tolerances: Tolerances = Tolerances(),
                            base: Optional[LpSolution] = None) -> PerturbationResult:
    """Re-solve with ``rhs[row] += epsilon`` and compare dObjective/epsilon to the dual."""
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    if solver is None:
        from .simplex import solve as solver
    i = lp.row(row) if isinstance(row, str) else int(row)
    if base is None:
        base = solver(lp)
    if not base.optimal:
        raise ValueError(f"base problem is {base.status}")
    bumped = lp.copy()
    bumped.set_rhs(i, lp.rhs[i] + epsilon)
    after = solver(bumped)
    name = lp.row_names[i]
    reported = float(base.duals[i])
    if not after.optimal:
        return PerturbationResult(name, epsilon, float("nan"), reported, False,
                                  f"perturbed problem is {after.status}")
    numeric = (after.objective - base.objective) / epsilon
    agrees = abs(numeric - reported) <= tolerances.dual * max(1.0, abs(reported))
    return PerturbationResult(name, epsilon, numeric, reported, agrees)
