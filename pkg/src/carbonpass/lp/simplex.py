"""Two-phase bounded-variable revised simplex.

Every row i gets a logical (slack) variable s_i with A_i x + s_i = b_i, whose
bounds encode the row sense. Rows whose slack cannot absorb the residual of
the starting point get an artificial variable; phase 1 minimizes their sum.

The basis is held as a sparse LU (SuperLU via scipy) followed by a product-form
eta file, refactorized every ``REFACTOR_EVERY`` pivots. Pricing is Dantzig's
rule with a two-pass Harris ratio test; after a run of degenerate pivots the
method switches to Bland's rule until the objective moves again.

Row duals satisfy B'y = c_B, so dual[i] is the derivative of the optimal
objective with respect to rhs[i].
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .program import EQ, GE, LE, LinearProgram, LpSolution, Tolerances

BASIC, AT_LOWER, AT_UPPER, AT_ZERO = 0, 1, 2, 3
REFACTOR_EVERY = 64
DEGENERATE_RUN = 40
HARRIS = 1e-9


class _Factor:
    def __init__(self, B: sp.csc_matrix):
        self.lu = splu(B, permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray, np.ndarray, float]] = []

    def ftran(self, a: np.ndarray) -> np.ndarray:
        x = self.lu.solve(a)
        for r, idx, vals, piv in self.etas:
            xr = x[r] / piv
            if xr != 0.0:
                x[idx] -= vals * xr
            x[r] = xr
        return x

    def btran(self, c: np.ndarray) -> np.ndarray:
        v = np.array(c, dtype=float)
        for r, idx, vals, piv in reversed(self.etas):
            s = vals @ v[idx] - piv * v[r]
            v[r] = (v[r] - s) / piv
        return self.lu.solve(v, trans="T")

    def push(self, r: int, alpha: np.ndarray) -> None:
        idx = np.flatnonzero(alpha)
        self.etas.append((r, idx, alpha[idx].copy(), float(alpha[r])))


class SimplexFailure(RuntimeError):
    pass


class _Simplex:
    def __init__(self, lp: LinearProgram, tol: Tolerances):
        self.lp = lp
        self.tol = tol
        A, c, lo, up, senses, b = lp.arrays()
        m, n = A.shape
        self.m, self.n = m, n
        self.b = b.astype(float)

        sl_lo = np.where(senses == GE, -np.inf, 0.0)
        sl_up = np.where(senses == LE, np.inf, 0.0)

        x0 = np.where(np.isfinite(lo), lo, np.where(np.isfinite(up), up, 0.0))
        resid = self.b - A @ x0 if n else self.b.copy()
        clipped = np.clip(resid, sl_lo, sl_up)
        excess = resid - clipped
        art_rows = np.flatnonzero(excess != 0.0)
        self.n_art = len(art_rows)
        sigma = np.sign(excess[art_rows])

        art = sp.csc_matrix((sigma, (art_rows, np.arange(self.n_art))), shape=(m, self.n_art))
        self.K = sp.hstack([A.tocsc(), sp.identity(m, format="csc"), art], format="csc")
        self.KT = self.K.T.tocsr()
        N = n + m + self.n_art
        self.N = N
        self.lo = np.concatenate([lo, sl_lo, np.zeros(self.n_art)])
        self.up = np.concatenate([up, sl_up, np.full(self.n_art, np.inf)])
        self.c2 = np.concatenate([c, np.zeros(m + self.n_art)])
        self.art = np.arange(n + m, N)

        x = np.concatenate([x0, clipped, np.abs(excess[art_rows])])
        status = np.empty(N, dtype=np.int8)
        for j in range(N):
            if np.isfinite(self.lo[j]) and x[j] == self.lo[j]:
                status[j] = AT_LOWER
            elif np.isfinite(self.up[j]) and x[j] == self.up[j]:
                status[j] = AT_UPPER
            else:
                status[j] = AT_ZERO
        basis = np.arange(n, n + m)
        basis[art_rows] = self.art
        status[basis] = BASIC
        self.x, self.status, self.basis = x, status, basis
        self.iterations = 0
        self.scale_b = 1.0 + (np.abs(self.b).max() if m else 0.0)
        self._refactor()

    # linear algebra -------------------------------------------------------
    def _column(self, j: int) -> np.ndarray:
        K = self.K
        a = np.zeros(self.m)
        s, e = K.indptr[j], K.indptr[j + 1]
        a[K.indices[s:e]] = K.data[s:e]
        return a

    def _refactor(self) -> None:
        B = self.K[:, self.basis].tocsc()
        try:
            self.F = _Factor(B)
        except RuntimeError as exc:
            raise SimplexFailure(f"singular basis: {exc}") from None
        nonbasic = self.status != BASIC
        rhs = self.b - self.K[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.F.ftran(rhs)

    # main loop ------------------------------------------------------------
    def _optimize(self, cost: np.ndarray) -> str:
        tol = self.tol
        opt_tol = tol.opt * max(1.0, np.abs(cost).max(initial=0.0))
        movable = self.up > self.lo
        degenerate = 0
        bland = False
        clean_exit = False
        while True:
            if self.iterations >= tol.max_iter:
                return "numerical"
            if len(self.F.etas) >= REFACTOR_EVERY:
                self._refactor()
            y = self.F.btran(cost[self.basis])
            d = cost - self.KT @ y
            st = self.status
            elig = movable & (
                ((st == AT_LOWER) & (d < -opt_tol))
                | ((st == AT_UPPER) & (d > opt_tol))
                | ((st == AT_ZERO) & (np.abs(d) > opt_tol)))
            cand = np.flatnonzero(elig)
            if len(cand) == 0:
                if clean_exit:
                    return "optimal"
                # confirm on a fresh factorization before declaring optimality
                self._refactor()
                clean_exit = True
                continue
            clean_exit = False
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.F.ftran(self._column(q))
            step = self._ratio(q, alpha, direction, bland)
            if step is None:
                return "unbounded"
            theta, r = step
            self.iterations += 1
            if theta <= 1e-12 * self.scale_b:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
                bland = False
            self._update(q, alpha, direction, theta, r)

    def _ratio(self, q, alpha, direction, bland):
        piv = self.tol.pivot
        delta = direction * alpha
        xb = self.x[self.basis]
        lb = self.lo[self.basis]
        ub = self.up[self.basis]
        flip = self.up[q] - self.lo[q]

        dec = delta > piv
        inc = delta < -piv
        with np.errstate(divide="ignore", invalid="ignore"):
            exact = np.full(self.m, np.inf)
            exact[dec] = (xb[dec] - lb[dec]) / delta[dec]
            exact[inc] = (ub[inc] - xb[inc]) / -delta[inc]
        exact = np.maximum(exact, 0.0)
        finite = np.isfinite(exact)
        if not finite.any():
            if math.isinf(flip):
                return None
            return flip, -1

        if bland:
            theta = exact[finite].min()
            if flip <= theta:
                return flip, -1
            ties = np.flatnonzero(exact <= theta)
            r = int(ties[np.argmin(self.basis[ties])])
            return theta, r

        with np.errstate(divide="ignore", invalid="ignore"):
            relaxed = np.full(self.m, np.inf)
            relaxed[dec] = (xb[dec] - lb[dec] + HARRIS) / delta[dec]
            relaxed[inc] = (ub[inc] + HARRIS - xb[inc]) / -delta[inc]
        theta_max = relaxed.min()
        if flip <= theta_max and flip <= exact.min():
            return flip, -1
        cands = np.flatnonzero(exact <= theta_max)
        r = int(cands[np.argmax(np.abs(delta[cands]))])
        theta = exact[r]
        if flip <= theta:
            return flip, -1
        return theta, r

    def _update(self, q, alpha, direction, theta, r):
        basis = self.basis
        if theta:
            self.x[basis] -= (direction * theta) * alpha
        if r < 0:
            if self.status[q] == AT_LOWER or (self.status[q] == AT_ZERO and direction > 0):
                self.x[q] = self.up[q]
                self.status[q] = AT_UPPER
            else:
                self.x[q] = self.lo[q]
                self.status[q] = AT_LOWER
            return
        self.x[q] += direction * theta
        p = basis[r]
        if direction * alpha[r] > 0:
            self.x[p] = self.lo[p]
            self.status[p] = AT_LOWER
        else:
            self.x[p] = self.up[p]
            self.status[p] = AT_UPPER
        basis[r] = q
        self.status[q] = BASIC
        self.F.push(r, alpha)

    # driver ---------------------------------------------------------------
    def run(self) -> LpSolution:
        lp, tol = self.lp, self.tol
        try:
            if self.n_art:
                c1 = np.zeros(self.N)
                c1[self.art] = 1.0
                state = self._optimize(c1)
                if state != "optimal":
                    return LpSolution("numerical", iterations=self.iterations, lp=lp,
                                      message=f"phase 1 ended with status {state}")
                infeas = self.x[self.art].sum()
                if infeas > tol.feas * self.scale_b:
                    return LpSolution("infeasible", iterations=self.iterations, lp=lp,
                                      message=f"phase 1 infeasibility {infeas:.3g}")
                self.up[self.art] = 0.0
                # nonbasic artificials are fixed at zero from here on
                nb = self.status[self.art] != BASIC
                self.x[self.art[nb]] = 0.0
                self.status[self.art[nb]] = AT_LOWER
            state = self._optimize(self.c2)
        except SimplexFailure as exc:
            return LpSolution("numerical", iterations=self.iterations, lp=lp, message=str(exc))
        if state != "optimal":
            return LpSolution(state, iterations=self.iterations, lp=lp)

        x = self.x
        viol = np.maximum(self.lo - x, 0.0) + np.maximum(x - self.up, 0.0)
        if viol.max(initial=0.0) > tol.feas * self.scale_b:
            return LpSolution("numerical", iterations=self.iterations, lp=lp,
                              message=f"bound violation {viol.max():.3g} after refactorization")
        y = self.F.btran(self.c2[self.basis])
        d = self.c2 - self.KT @ y
        n = self.n
        xs = x[:n].copy()
        return LpSolution(
            "optimal",
            objective=float(self.c2[:n] @ xs),
            x=xs,
            duals=y,
            reduced_costs=d[:n],
            iterations=self.iterations,
            lp=lp,
        )


def solve(lp: LinearProgram, tolerances: Tolerances = Tolerances()) -> LpSolution:
    """Solve ``lp`` with the reference simplex."""
    problems = lp.validate()
    if problems:
        raise ValueError("invalid linear program: " + "; ".join(problems[:5]))
    if lp.n_rows == 0:
        return _solve_bounds_only(lp)
    return _Simplex(lp, tolerances).run()


def _solve_bounds_only(lp: LinearProgram) -> LpSolution:
    c = np.array(lp.cost)
    lo, up = np.array(lp.lower), np.array(lp.upper)
    x = np.where(c > 0, lo, np.where(c < 0, up, np.where(np.isfinite(lo), lo,
                                                          np.where(np.isfinite(up), up, 0.0))))
    if not np.all(np.isfinite(x)):
        return LpSolution("unbounded", lp=lp)
    return LpSolution("optimal", objective=float(c @ x), x=x, duals=np.zeros(0),
                      reduced_costs=c.copy(), lp=lp)
