"""Dense bounded-variable primal simplex with warm starts.

Minimizes c'v subject to rows over v with senses <=, >=, ==, and per-variable
bounds lb <= v <= ub (either side may be infinite).  Every row is held as an
equality  row'v + s = rhs  with a logical slack s whose bounds encode the
sense (<=: s >= 0, >=: s <= 0, ==: s = 0), so the basis always has one column
per row and the all-slack basis is available from scratch.

Feasibility is restored by a composite (artificial-free) phase I that
minimizes the total bound violation of the basic variables; it runs from any
basis, which is what makes warm starts after bound changes, objective changes,
and row additions cheap.  The basis inverse is kept explicitly and updated by
elementary row operations, with periodic refactorization.

Bland's rule takes over after a run of degenerate pivots so termination is
guaranteed in exact arithmetic and, in experience with the test corpus, in
floating point too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

PRIMAL_TOL = 1e-7
DUAL_TOL = 1e-9
RATIO_TOL = 1e-9          # tolerance slack in ratio-test comparisons
PIVOT_TOL = 1e-8          # smallest acceptable pivot element
REFACTOR_EVERY = 100
BLAND_AFTER = 500         # consecutive degenerate pivots before Bland's rule
MAX_ITER_BASE = 20000

INF = math.inf


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class NumericalError(RuntimeError):
    """Raised when refactorization cannot rescue a failing pivot sequence."""


# variable status codes
_AT_LB = 0
_AT_UB = 1
_BASIC = 2
_FREE_NB = 3


@dataclass
class LpResult:
    status: LpStatus
    value: float = math.nan
    x: Optional[np.ndarray] = None        # structural variable values
    duals: Optional[np.ndarray] = None    # one multiplier per row
    iterations: int = 0


class LpState:
    """A mutable LP: columns with bounds and objective, rows with senses.

    Mutation methods (set_bound, set_objective_coeff, add_row) keep the last
    basis so the next solve() is warm.
    """

    def __init__(self, objective, lower, upper):
        self.obj = np.asarray(objective, dtype=float).copy()
        self.lb = np.asarray(lower, dtype=float).copy()
        self.ub = np.asarray(upper, dtype=float).copy()
        if not (self.lb.shape == self.ub.shape == self.obj.shape):
            raise ValueError("objective and bounds must share a length")
        self.ncols = len(self.obj)
        self.A = np.zeros((0, self.ncols))
        self.rhs = np.zeros(0)
        self.senses: list = []
        self.slack_lb = np.zeros(0)
        self.slack_ub = np.zeros(0)
        self.basis: Optional[np.ndarray] = None
        self.vstat: Optional[np.ndarray] = None
        self.binv: Optional[np.ndarray] = None
        self.solution: Optional[LpResult] = None
        self._pivots_since_refactor = 0

    # ------------------------------------------------------------------ rows

    @property
    def nrows(self) -> int:
        return self.A.shape[0]

    @property
    def ntot(self) -> int:
        return self.ncols + self.nrows

    def add_row(self, coefs, sense: str, rhs: float) -> None:
        coefs = np.asarray(coefs, dtype=float)
        if coefs.shape != (self.ncols,):
            raise ValueError("row length must equal the column count")
        if sense not in ("<=", ">=", "=="):
            raise ValueError("bad sense")
        had_basis = self.basis is not None and len(self.basis) == self.nrows
        self.A = np.vstack([self.A, coefs[None, :]])
        self.rhs = np.append(self.rhs, float(rhs))
        self.senses.append(sense)
        if sense == "<=":
            slo, shi = 0.0, INF
        elif sense == ">=":
            slo, shi = -INF, 0.0
        else:
            slo, shi = 0.0, 0.0
        self.slack_lb = np.append(self.slack_lb, slo)
        self.slack_ub = np.append(self.slack_ub, shi)
        if had_basis:
            # Slack indices shift up by one position is avoided because slacks
            # are numbered ncols..ncols+nrows-1 in row order and the new row is
            # appended last; existing entries keep their meaning.  The new
            # slack enters the basis: B' = [[B, 0], [a_B', 1]] whose inverse is
            # [[B^-1, 0], [-a_B' B^-1, 1]].
            r = self.nrows
            ext = np.zeros((r, r))
            ext[: r - 1, : r - 1] = self.binv
            row_on_basics = np.array(
                [coefs[j] if j < self.ncols else 0.0 for j in self.basis]
            )
            ext[r - 1, : r - 1] = -row_on_basics @ self.binv
            ext[r - 1, r - 1] = 1.0
            self.binv = ext
            self.basis = np.append(self.basis, self.ntot - 1)
            self.vstat = np.append(self.vstat, _BASIC)
        self.solution = None

    # --------------------------------------------------------------- columns

    def set_bound(self, col: int, lower: float, upper: float) -> None:
        self.lb[col] = lower
        self.ub[col] = upper
        if self.vstat is not None and self.vstat[col] != _BASIC:
            if self.vstat[col] == _AT_LB and not math.isfinite(lower):
                self.vstat[col] = _AT_UB if math.isfinite(upper) else _FREE_NB
            elif self.vstat[col] == _AT_UB and not math.isfinite(upper):
                self.vstat[col] = _AT_LB if math.isfinite(lower) else _FREE_NB
            elif self.vstat[col] == _FREE_NB and math.isfinite(lower):
                self.vstat[col] = _AT_LB
        self.solution = None

    def set_objective_coeff(self, col: int, coef: float) -> None:
        self.obj[col] = float(coef)
        self.solution = None

    # ------------------------------------------------------------- internals

    def _column(self, j: int) -> np.ndarray:
        if j < self.ncols:
            return self.A[:, j]
        e = np.zeros(self.nrows)
        e[j - self.ncols] = 1.0
        return e

    def _all_lb(self) -> np.ndarray:
        return np.concatenate([self.lb, self.slack_lb])

    def _all_ub(self) -> np.ndarray:
        return np.concatenate([self.ub, self.slack_ub])

    def _all_obj(self) -> np.ndarray:
        return np.concatenate([self.obj, np.zeros(self.nrows)])

    def _default_basis(self) -> None:
        """All-slack basis; structural variables at their nearest finite bound."""
        self.vstat = np.empty(self.ntot, dtype=int)
        for j in range(self.ncols):
            if math.isfinite(self.lb[j]):
                self.vstat[j] = _AT_LB
            elif math.isfinite(self.ub[j]):
                self.vstat[j] = _AT_UB
            else:
                self.vstat[j] = _FREE_NB
        self.vstat[self.ncols:] = _BASIC
        self.basis = np.arange(self.ncols, self.ntot)
        self.binv = np.eye(self.nrows)
        self._pivots_since_refactor = 0

    def _refactorize(self) -> None:
        if self.nrows == 0:
            self.binv = np.zeros((0, 0))
            return
        B = np.empty((self.nrows, self.nrows))
        for k, j in enumerate(self.basis):
            B[:, k] = self._column(j)
        try:
            self.binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular basis during refactorization") from exc
        self._pivots_since_refactor = 0

    def _compute_point(self) -> np.ndarray:
        lb, ub = self._all_lb(), self._all_ub()
        v = np.zeros(self.ntot)
        at_lb = self.vstat == _AT_LB
        at_ub = self.vstat == _AT_UB
        v[at_lb] = lb[at_lb]
        v[at_ub] = ub[at_ub]
        v[self.basis] = 0.0
        if self.nrows:
            rhs_eff = self.rhs - self.A @ v[: self.ncols] - v[self.ncols:]
            v[self.basis] = self.binv @ rhs_eff
        return v

    # ----------------------------------------------------------------- solve

    def solve(self) -> LpResult:
        if (
            self.basis is None
            or len(self.basis) != self.nrows
            or self.vstat is None
            or len(self.vstat) != self.ntot
        ):
            self._default_basis()
        try:
            return self._solve_inner()
        except NumericalError:
            self._default_basis()
            return self._solve_inner()

    def _solve_inner(self) -> LpResult:
        lb, ub = self._all_lb(), self._all_ub()
        if np.any(lb > ub + 1e-12):
            self.solution = LpResult(LpStatus.INFEASIBLE)
            return self.solution
        # The inverse survives pivots (elementary updates) and add_row (block
        # extension), so a warm solve only refactorizes on the usual drift
        # cadence — rebuilding an r x r inverse per solve dominates everything
        # else once cut rows accumulate.
        if (
            self.binv is None
            or self.binv.shape != (self.nrows, self.nrows)
            or self._pivots_since_refactor >= REFACTOR_EVERY
        ):
            self._refactorize()
        max_iter = MAX_ITER_BASE + 50 * self.ntot

        feasible, it1 = self._phase1(lb, ub, max_iter)
        if not feasible:
            self.solution = LpResult(LpStatus.INFEASIBLE, iterations=it1)
            return self.solution
        status, it2 = self._phase2(lb, ub, max_iter)
        iters = it1 + it2
        if status is LpStatus.UNBOUNDED:
            self.solution = LpResult(LpStatus.UNBOUNDED, iterations=iters)
            return self.solution
        v = self._compute_point()
        value = float(self._all_obj() @ v)
        duals = (
            np.asarray(self._all_obj()[self.basis] @ self.binv)
            if self.nrows
            else np.zeros(0)
        )
        self.solution = LpResult(
            LpStatus.OPTIMAL, value, v[: self.ncols].copy(), duals, iters
        )
        return self.solution

    # ---- phase I: composite minimization of total bound violation

    def _phase1(self, lb, ub, max_iter):
        iters = 0
        degenerate_run = 0
        feas_tol = PRIMAL_TOL * max(1.0, math.sqrt(max(self.nrows, 1)))
        while True:
            if iters > max_iter:
                raise NumericalError("phase I iteration cap exceeded")
            v = self._compute_point()
            xb = v[self.basis]
            blo = lb[self.basis]
            bhi = ub[self.basis]
            viol_lo = blo - xb
            viol_hi = xb - bhi
            infeas = np.maximum(viol_lo, 0.0).sum() + np.maximum(viol_hi, 0.0).sum()
            if infeas <= feas_tol:
                return True, iters
            g = np.where(viol_lo > PRIMAL_TOL, -1.0, 0.0) + np.where(
                viol_hi > PRIMAL_TOL, 1.0, 0.0
            )
            lam = g @ self.binv
            entering, direction = self._price_phase1(lam, degenerate_run > BLAND_AFTER)
            if entering is None:
                return False, iters  # minimum of the composite objective > 0
            step = self._ratio_phase1(entering, direction, lb, ub, v)
            if step is None:
                self._refactorize()
                v = self._compute_point()
                step = self._ratio_phase1(entering, direction, lb, ub, v)
                if step is None:
                    raise NumericalError("phase I ratio test found no block")
            moved = self._apply_step(entering, direction, step, lb, ub, v)
            degenerate_run = 0 if moved else degenerate_run + 1
            iters += 1
            if self._pivots_since_refactor >= REFACTOR_EVERY:
                self._refactorize()

    def _price_phase1(self, lam, bland: bool):
        # Moving nonbasic j by t changes the violation sum at rate -lam.a_j,
        # so j improves when lam.a_j > 0 (increase from lb) or < 0 (decrease
        # from ub).
        d_struct = lam @ self.A if self.nrows else np.zeros(self.ncols)
        thresh = 1e-9
        best, best_score, best_dir = None, thresh, 0
        for j in range(self.ntot):
            st = self.vstat[j]
            if st == _BASIC:
                continue
            dj = d_struct[j] if j < self.ncols else lam[j - self.ncols]
            if st in (_AT_LB, _FREE_NB) and dj > thresh:
                score, direction = dj, +1
            elif st in (_AT_UB, _FREE_NB) and dj < -thresh:
                score, direction = -dj, -1
            else:
                continue
            if bland:
                return j, direction
            if score > best_score:
                best, best_score, best_dir = j, score, direction
        return best, best_dir

    def _ratio_phase1(self, j, direction, lb, ub, v):
        """First breakpoint of the composite objective.

        A basic variable blocks only when the step would take it from the
        feasible side across a bound (standard block) or from the infeasible
        side onto the bound it violates (it turns feasible there and the
        gradient changes).  Basics moving deeper into infeasibility never
        block; their worsening is already priced into the gradient.
        """
        w = self.binv @ self._column(j)
        rng = ub[j] - lb[j]
        best_t = rng if math.isfinite(rng) else INF
        best_i = -1
        xb = v[self.basis]
        for i in range(self.nrows):
            rate = -direction * w[i]
            if abs(rate) < PIVOT_TOL:
                continue
            val = xb[i]
            blo = lb[self.basis[i]]
            bhi = ub[self.basis[i]]
            if rate > 0:
                if val < blo - PRIMAL_TOL:
                    tgt = blo            # infeasible below, moving up: block at lb
                elif math.isfinite(bhi) and val <= bhi + PRIMAL_TOL:
                    tgt = bhi            # feasible, moving up: block at ub
                else:
                    continue             # infeasible above and worsening, or no cap
            else:
                if val > bhi + PRIMAL_TOL:
                    tgt = bhi
                elif math.isfinite(blo) and val >= blo - PRIMAL_TOL:
                    tgt = blo
                else:
                    continue
            t = (tgt - val) / rate
            if t < 0.0:
                t = 0.0
            if t < best_t - RATIO_TOL:
                best_t = t
                best_i = i
        if not math.isfinite(best_t):
            return None
        return best_t, best_i

    # ---- phase II: standard bounded-variable primal iteration

    def _phase2(self, lb, ub, max_iter):
        iters = 0
        degenerate_run = 0
        while True:
            if iters > max_iter:
                raise NumericalError("phase II iteration cap exceeded")
            if self._pivots_since_refactor >= REFACTOR_EVERY:
                self._refactorize()
            obj = self._all_obj()
            lam = obj[self.basis] @ self.binv if self.nrows else np.zeros(0)
            entering, direction = self._price_phase2(obj, lam, degenerate_run > BLAND_AFTER)
            if entering is None:
                return LpStatus.OPTIMAL, iters
            v = self._compute_point()
            step = self._ratio_phase2(entering, direction, lb, ub, v)
            if step is None:
                return LpStatus.UNBOUNDED, iters
            moved = self._apply_step(entering, direction, step, lb, ub, v)
            degenerate_run = 0 if moved else degenerate_run + 1
            iters += 1

    def _price_phase2(self, obj, lam, bland: bool):
        d_struct = obj[: self.ncols] - (lam @ self.A if self.nrows else 0.0)
        best, best_score, best_dir = None, DUAL_TOL, 0
        for j in range(self.ntot):
            st = self.vstat[j]
            if st == _BASIC:
                continue
            dj = d_struct[j] if j < self.ncols else -lam[j - self.ncols]
            if st in (_AT_LB, _FREE_NB) and dj < -DUAL_TOL:
                score, direction = -dj, +1
            elif st in (_AT_UB, _FREE_NB) and dj > DUAL_TOL:
                score, direction = dj, -1
            else:
                continue
            if bland:
                return j, direction
            if score > best_score:
                best, best_score, best_dir = j, score, direction
        return best, best_dir

    def _ratio_phase2(self, j, direction, lb, ub, v):
        w = self.binv @ self._column(j)
        rng = ub[j] - lb[j]
        best_t = rng if math.isfinite(rng) else INF
        best_i = -1
        xb = v[self.basis]
        for i in range(self.nrows):
            rate = -direction * w[i]
            if abs(rate) < PIVOT_TOL:
                continue
            tgt = ub[self.basis[i]] if rate > 0 else lb[self.basis[i]]
            if not math.isfinite(tgt):
                continue
            t = (tgt - xb[i]) / rate
            if t < 0.0:
                t = 0.0
            if t < best_t - RATIO_TOL:
                best_t = t
                best_i = i
        if not math.isfinite(best_t):
            return None
        return best_t, best_i

    # ---- shared pivot application

    def _apply_step(self, j, direction, step, lb, ub, v) -> bool:
        t, blocking = step
        t = max(t, 0.0)
        if blocking < 0:
            # bound flip: the entering variable crosses its own range
            self.vstat[j] = _AT_UB if direction > 0 else _AT_LB
            return t > RATIO_TOL
        w = self.binv @ self._column(j)
        piv = w[blocking]
        if abs(piv) < PIVOT_TOL:
            self._refactorize()
            w = self.binv @ self._column(j)
            piv = w[blocking]
            if abs(piv) < PIVOT_TOL:
                raise NumericalError("vanishing pivot element")
        leaving = self.basis[blocking]
        left_val = v[leaving] + (-direction * piv) * t
        d_lo = abs(left_val - lb[leaving]) if math.isfinite(lb[leaving]) else INF
        d_hi = abs(left_val - ub[leaving]) if math.isfinite(ub[leaving]) else INF
        self.vstat[leaving] = _AT_LB if d_lo <= d_hi else _AT_UB
        self.vstat[j] = _BASIC
        self.basis[blocking] = j
        # elementary update of the explicit inverse
        self.binv[blocking, :] /= piv
        w_other = w.copy()
        w_other[blocking] = 0.0
        self.binv -= np.outer(w_other, self.binv[blocking, :])
        self._pivots_since_refactor += 1
        return t > RATIO_TOL


# ----------------------------------------------------------------- functions


def solve(state: LpState) -> LpResult:
    """Solve (or re-solve) the LP from its current basis."""
    return state.solve()


def resolve_after_bound_and_objective_change(
    state: LpState,
    bound_changes: Sequence = (),
    objective_changes: Sequence = (),
) -> LpResult:
    """Apply (col, lb, ub) bound changes and (col, coef) objective changes,
    then re-solve warm.  The result matches a cold solve; the pivot count is
    what the warm start saves."""
    for col, lo, hi in bound_changes:
        state.set_bound(col, lo, hi)
    for col, coef in objective_changes:
        state.set_objective_coeff(col, coef)
    return state.solve()


def add_row(state: LpState, coefs, sense: str, rhs: float) -> LpState:
    """Append a row; the new slack enters the basis so the next solve is warm."""
    state.add_row(coefs, sense, rhs)
    return state
