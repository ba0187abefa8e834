from .checks import KktReport, PerturbationResult, dual_perturbation_check, kkt_report
from .highs import solve_highs
from .mps import to_mps, write_mps
from .program import EQ, GE, INF, LE, LinearProgram, LpSolution, Tolerances
from .simplex import solve

SOLVERS = {"simplex": solve, "highs": solve_highs}


def get_solver(name: str):
    try:
        return SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None


__all__ = [
    "EQ", "GE", "INF", "LE", "KktReport", "LinearProgram", "LpSolution",
    "PerturbationResult", "SOLVERS", "Tolerances", "dual_perturbation_check",
    "get_solver", "kkt_report", "solve", "solve_highs", "to_mps", "write_mps",
]
