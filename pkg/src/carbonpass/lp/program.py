"""Sparse linear programs with named rows and columns."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "<=", "=", ">="
SENSES = (LE, EQ, GE)
INF = math.inf


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-7
    gap: float = 1e-6  # relative
    dual: float = 1e-4  # perturbation agreement
    cs: float = 1e-6
    opt: float = 1e-9
    pivot: float = 1e-9
    max_iter: int = 200_000


class LinearProgram:
    """A minimization LP: min c'x s.t. rows (<=, =, >=), lower <= x <= upper.

    Rows store their coefficients sparsely as (column index, value) pairs.
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self.col_names: list[str] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.cost: list[float] = []
        self.row_names: list[str] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self._row_cols: list[list[int]] = []
        self._row_vals: list[list[float]] = []
        self._col_index: dict[str, int] = {}
        self._row_index: dict[str, int] = {}
        self._matrix = None

    # construction ---------------------------------------------------------
    def add_column(self, name: str, lower: float = 0.0, upper: float = INF,
                   cost: float = 0.0) -> int:
        if name in self._col_index:
            raise ValueError(f"duplicate column name {name!r}")
        j = len(self.col_names)
        self._col_index[name] = j
        self.col_names.append(name)
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.cost.append(float(cost))
        self._matrix = None
        return j

    def add_row(self, name: str, coefs: Union[Mapping[int, float], Iterable[tuple[int, float]]],
                sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise ValueError(f"row {name!r}: unknown sense {sense!r}")
        if name in self._row_index:
            raise ValueError(f"duplicate row name {name!r}")
        items = coefs.items() if isinstance(coefs, Mapping) else coefs
        merged: dict[int, float] = {}
        for j, v in items:
            merged[j] = merged.get(j, 0.0) + float(v)
        i = len(self.row_names)
        self._row_index[name] = i
        self.row_names.append(name)
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self._row_cols.append(list(merged))
        self._row_vals.append(list(merged.values()))
        self._matrix = None
        return i

    def set_cost(self, j: int, value: float) -> None:
        self.cost[j] = float(value)

    def set_rhs(self, i: int, value: float) -> None:
        self.rhs[i] = float(value)

    def copy(self) -> "LinearProgram":
        new = LinearProgram(self.name)
        for attr in ("col_names", "lower", "upper", "cost", "row_names", "senses", "rhs"):
            setattr(new, attr, list(getattr(self, attr)))
        new._row_cols = [list(r) for r in self._row_cols]
        new._row_vals = [list(r) for r in self._row_vals]
        new._col_index = dict(self._col_index)
        new._row_index = dict(self._row_index)
        return new

    # access ---------------------------------------------------------------
    @property
    def n_cols(self) -> int:
        return len(self.col_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def col(self, name: str) -> int:
        return self._col_index[name]

    def row(self, name: str) -> int:
        return self._row_index[name]

    def row_entries(self, i: int) -> list[tuple[int, float]]:
        return list(zip(self._row_cols[i], self._row_vals[i]))

    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            indptr = np.zeros(self.n_rows + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(r) for r in self._row_cols])
            idx = np.fromiter((j for r in self._row_cols for j in r), dtype=np.int64,
                              count=int(indptr[-1]))
            val = np.fromiter((v for r in self._row_vals for v in r), dtype=float,
                              count=int(indptr[-1]))
            self._matrix = sp.csr_matrix((val, idx, indptr), shape=(self.n_rows, self.n_cols))
        return self._matrix

    def arrays(self):
        """(A, c, lower, upper, senses, rhs) as numpy/scipy objects."""
        return (self.matrix(), np.array(self.cost), np.array(self.lower),
                np.array(self.upper), np.array(self.senses), np.array(self.rhs))

    def validate(self) -> list[str]:
        out = []
        for j, name in enumerate(self.col_names):
            if self.lower[j] > self.upper[j]:
                out.append(f"column {name}: lower {self.lower[j]} > upper {self.upper[j]}")
            if math.isnan(self.cost[j]) or math.isinf(self.cost[j]):
                out.append(f"column {name}: non-finite cost")
        for i, name in enumerate(self.row_names):
            for j in self._row_cols[i]:
                if not 0 <= j < self.n_cols:
                    out.append(f"row {name}: references missing column {j}")
            if not math.isfinite(self.rhs[i]):
                out.append(f"row {name}: non-finite rhs")
        return out


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | numerical
    objective: float = math.nan
    x: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0
    message: str = ""
    lp: Optional[LinearProgram] = field(default=None, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, name: str) -> float:
        return float(self.x[self.lp.col(name)])

    def dual(self, name: str) -> float:
        return float(self.duals[self.lp.row(name)])
