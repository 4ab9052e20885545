"""Outer approximation of the conic relaxation, solved as a growing LP.

Each cone block splits into two norm cones once an auxiliary epigraph
scalar s_k is introduced:

    A_k:   ||(sqrt(sigma), sqrt(c_i) x_i, ...)||_2          <= s_k
    B_k:   ||(s_k, sqrt(d_j) y_j, ..., r_l(x), ...)||_2     <= t_k

where t_k is the block's comparison form.  Rotated blocks append a W - Z
component to B_k's vector and compare against W + Z, the standard linear
rewrite of  s^2 + ... <= 4 W Z.  On binary x the squared A_k norm equals
sigma + c'x because x_i^2 = x_i, so the split is exact where it matters;
fourth-root blocks use the 4-norm with components (16 c_i)^(1/4) x_i whose
norm is 2 (sum_i c_i x_i^4)^(1/4), again exact on binaries.

The cones are enforced lazily.  Starting from a small set of always-valid
supporting rows, the loop solves the LP, adds the normalized supporting
hyperplane of every cone violated by more than OA_TOL, and repeats.  Every
added row has unit dual norm (Cauchy-Schwarz, or Hoelder for the 4-norm),
so it never cuts a cone-feasible point and remains valid after bound
changes.  Two special start rows keep the first LP bounded whenever the
instance is: a "pull" row aligned with the unbounded reward directions of a
block (its slope reproduces the sqrt(1 - beta) discount of the closed-form
reduction), and, for rotated blocks priced through dedicated (w, z)
variables, a balanced support under which raising s costs exactly
sqrt(omega_w * omega) per unit.

`Relaxation` keeps the LP alive between calls: branch-and-bound can flip
variable bounds, add cut rows, and re-solve warm; rows accumulated at one
node stay valid at every other node.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .cuts import DegeneratePoint, _af_sum, cut_violation, gradient_linearize
from .oracle import Unbounded, _inner_minimum
from .model import (
    AffineForm,
    Cone,
    ConeBlock,
    CutKind,
    CutSurface,
    Point,
    ProblemInstance,
    W_VAR,
    Z_VAR,
)
from .simplex import PRIMAL_TOL, LpState, LpStatus

__all__ = [
    "OA_TOL",
    "MAX_OA_ROUNDS",
    "ConeRow",
    "RelaxStatus",
    "RelaxResult",
    "Relaxation",
    "solve_relaxation",
]

OA_TOL = 1e-7          # norm violation that triggers a new supporting row
MAX_OA_ROUNDS = 500    # LP solves per call before reporting Stalled
APEX_TOL = 1e-9        # ||u|| below this counts as the cone apex
APEX_NUDGE = 1e-8      # component shift used to leave the apex


class RelaxStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    STALLED = "stalled"
    CUTOFF = "cutoff"    # early exit: LP value crossed the caller's cutoff


@dataclass
class ConeRow:
    """One cone constraint  ||u(p)||_power <= t(p)  with affine u and t.

    `u` is the componentwise affine map, `t` the comparison form, and
    `block` the index into all_blocks() that the forms' s slot refers to.
    `linearizations` counts the supporting rows the separation loop has
    generated for this cone (the static start rows are not counted).
    """

    u: tuple
    t: AffineForm
    block: int
    power: int = 2
    linearizations: int = 0


@dataclass(frozen=True)
class RelaxResult:
    """Outcome of one relaxation solve.

    `value` is a valid lower bound in every terminal state: the LP optimum
    for OPTIMAL and STALLED, +inf for INFEASIBLE (the node is pruned) and
    -inf for UNBOUNDED.  `max_violation` is the worst cone violation at the
    reported point (0 means all cones hold to tolerance).
    """

    value: float
    point: Optional[Point]
    status: RelaxStatus
    rounds: int = 0
    max_violation: float = 0.0


_S_VAR = AffineForm(s=1.0)


class Relaxation:
    """Warm-startable LP outer approximation of one instance.

    Columns are x (unit box), y (their boxes), the dedicated w and/or z
    epigraph variables when the instance prices them, and one s_k per cone
    block.  `set_x_bounds` and `add_cut` mutate the LP in place; `solve`
    runs the separation loop from the current basis.
    """

    def __init__(
        self,
        inst: ProblemInstance,
        cuts: Iterable[CutSurface] = (),
        fixings: Optional[Mapping[int, int]] = None,
    ):
        self.inst = inst
        self.n, self.m = inst.n, inst.m
        self.blocks = inst.all_blocks()
        self._has_primary = inst.has_primary_cone()
        self._use_w = inst.uses_w_var()
        self._use_z = inst.uses_z_var()
        base = self.n + self.m
        self._wcol = base if self._use_w else -1
        self._zcol = base + int(self._use_w) if self._use_z else -1
        self._s0 = base + int(self._use_w) + int(self._use_z)
        ncols = self._s0 + len(self.blocks)

        obj = np.zeros(ncols)
        lb = np.zeros(ncols)
        ub = np.full(ncols, math.inf)
        obj[: self.n] = inst.a
        ub[: self.n] = 1.0
        obj[self.n : base] = inst.b
        ub[self.n : base] = inst.y_upper
        if self._use_w:
            obj[self._wcol] = 0.0 if inst.omega_w is None else inst.omega_w
        if self._use_z:
            obj[self._zcol] = inst.omega
        for k, blk in enumerate(self.blocks):
            if blk.power == 2 and blk.sigma > 0.0:
                lb[self._s0 + k] = math.sqrt(blk.sigma)
        self.state = LpState(obj, lb, ub)

        self._cones: list = []            # ConeRow objects
        self._dense: list = []            # (U, uconst, trow, tconst) per cone
        self._managed: list = []          # cut surfaces linearized on demand
        self._degenerate: set = set()     # managed-cut indices past the apex
        self._guides: list = []           # (bci, aci, coords, weight, wz)
        self._perm: list = []             # structural rows, kept on rebuild
        self._tangents: list = []         # separation rows, pruned on rebuild
        self._last_x: Optional[np.ndarray] = None
        # A single plain block with no rows at all admits a closed-form
        # optimum; add_cut clears the flag.
        self._pure = (
            len(self.blocks) == 1
            and not inst.linear_constraints
            and inst.cardinality is None
        )

        for row in inst.linear_constraints:
            coefs = np.zeros(ncols)
            coefs[: self.n] = row.x
            if self.m:
                coefs[self.n : base] = row.y
            self._push_row(coefs, row.sense, row.rhs)
        if inst.cardinality is not None:
            coefs = np.zeros(ncols)
            coefs[: self.n] = 1.0
            self._push_row(coefs, "<=", float(inst.cardinality))

        for k, blk in enumerate(self.blocks):
            self._build_block(k, blk)
        for cut in cuts:
            self.add_cut(cut)
        if fixings:
            for i, v in fixings.items():
                self.set_x_bounds(i, float(v), float(v))

    # ------------------------------------------------------------- columns

    def xcol(self, i: int) -> int:
        return i

    def ycol(self, j: int) -> int:
        return self.n + j

    def scol(self, block: int) -> int:
        return self._s0 + block

    def _af_cols(self, af: AffineForm, block: int) -> np.ndarray:
        """Dense column coefficients of an affine form (constant excluded)."""
        v = np.zeros(self.state.ncols)
        for i, c in af.x.items():
            v[i] += c
        for j, c in af.y.items():
            v[self.n + j] += c
        if af.w:
            if self._wcol < 0:
                raise ValueError("form references w but the instance has no w")
            v[self._wcol] += af.w
        if af.z:
            if self._zcol < 0:
                raise ValueError("form references z but the instance has no z")
            v[self._zcol] += af.z
        if af.s:
            v[self._s0 + block] += af.s
        return v

    def _push_row(
        self, coefs: np.ndarray, sense: str, rhs: float, perm: bool = True
    ) -> None:
        """Add one LP row, remembering it for rebuilds.

        Structural rows (perm) survive every rebuild; separation tangents
        are pruned once they go slack so the LP cannot grow without bound
        over a long search.
        """
        if perm:
            self._perm.append((coefs, sense, rhs))
        else:
            self._tangents.append((coefs, rhs))
        self.state.add_row(coefs, sense, rhs)

    def _rebuild_lp(self) -> None:
        """Recreate the LP keeping structural rows and binding tangents."""
        xfull = self._last_x
        kept = []
        for coefs, rhs in self._tangents:
            if xfull is None or rhs - float(coefs @ xfull) <= 1e-6:
                kept.append((coefs, rhs))
        state = LpState(self.state.obj, self.state.lb, self.state.ub)
        for coefs, sense, rhs in self._perm:
            state.add_row(coefs, sense, rhs)
        for coefs, rhs in kept:
            state.add_row(coefs, "<=", rhs)
        self._tangents = kept
        self.state = state

    def _af_row(self, af: AffineForm, block: int, perm: bool = True) -> None:
        """Append the row  af(p) <= 0."""
        self._push_row(self._af_cols(af, block), "<=", -af.const, perm)

    def _cone_row(self, ci: int, terms) -> None:
        """Append  sum of weighted forms <= 0  on behalf of cone ci."""
        self._af_row(_af_sum(terms), self._cones[ci].block)

    # --------------------------------------------------------- cone set-up

    def _register(self, cone: ConeRow) -> int:
        ncols = self.state.ncols
        if cone.u:
            U = np.stack([self._af_cols(f, cone.block) for f in cone.u])
            uc = np.array([f.const for f in cone.u])
        else:
            U = np.zeros((0, ncols))
            uc = np.zeros(0)
        self._cones.append(cone)
        self._dense.append((U, uc, self._af_cols(cone.t, cone.block), cone.t.const))
        return len(self._cones) - 1

    def _build_block(self, k: int, blk: ConeBlock) -> None:
        # A_k: s majorizes the binary mass.
        if blk.power == 4:
            comps = [
                AffineForm(x={i: (16.0 * ci) ** 0.25})
                for i, ci in sorted(blk.cx.items())
                if ci > 0.0
            ]
        else:
            comps = [
                AffineForm(x={i: math.sqrt(ci)})
                for i, ci in sorted(blk.cx.items())
                if ci > 0.0
            ]
            if blk.sigma > 0.0:
                comps.insert(0, AffineForm(const=math.sqrt(blk.sigma)))
        has_x = any(f.x for f in comps)
        if has_x:  # a constant-only norm is already covered by s's lower bound
            ci = self._register(ConeRow(tuple(comps), _S_VAR, k, blk.power))
            for f in comps:
                if f.x:
                    self._cone_row(ci, [(1.0, f), (-1.0, _S_VAR)])
            if len(comps) >= 2:
                ones = np.zeros(self.state.ncols)
                ones[: self.n] = 1.0
                U, uc, _, _ = self._dense[ci]
                self._add_support(ci, U @ ones + uc, count=False)

        # B_k: the comparison cone.
        ucomps = [_S_VAR]
        for j, dj in sorted(blk.dy.items()):
            if dj > 0.0:
                ucomps.append(AffineForm(y={j: math.sqrt(dj)}))
        ucomps.extend(blk.rows)
        if blk.kind is Cone.ROTATED:
            t = _af_sum([(1.0, blk.w_form), (1.0, blk.z_form)])
            ucomps.append(_af_sum([(1.0, blk.w_form), (-1.0, blk.z_form)]))
        else:
            t = blk.t_form
        bci = self._register(ConeRow(tuple(ucomps), t, k, 2))
        self._cone_row(bci, [(1.0, _S_VAR), (-1.0, t)])
        for f in ucomps[1:]:
            self._cone_row(bci, [(1.0, f), (-1.0, t)])
            if f.x or blk.kind is Cone.ROTATED:  # components that can go negative
                self._cone_row(bci, [(-1.0, f), (-1.0, t)])
        if blk.kind is Cone.ROTATED:
            self._cone_row(bci, [(-1.0, blk.w_form)])
            self._cone_row(bci, [(-1.0, blk.z_form)])
        for terms in self._price_rows(blk):
            self._cone_row(bci, terms)
        guide = self._guide_params(blk)
        if guide is not None:
            aci = ci if has_x else None
            self._guides.append((bci, aci) + guide)

    def _guide_params(self, blk: ConeBlock):
        """Closed-form data for supporting B_k at the inner minimizer.

        Supports taken only at the LP point close the gap at the pace the
        LP walks around the cone, which can take hundreds of rounds once y
        has many curved coordinates.  When the block is a plain priced
        epigraph -- no extra norm rows, a dedicated comparison variable --
        the minimum over y at fixed x has a closed form, and one tangent
        through that minimizer makes the linearized model exact there.
        Returns (cone coordinates, objective weight, (p, q) prices or None)
        or None when the block does not qualify.
        """
        if blk.power != 2 or blk.rows:
            return None
        dyj = tuple(j for j, dj in sorted(blk.dy.items()) if dj > 0.0)
        if not dyj:
            return None
        if blk.kind is Cone.STANDARD:
            if blk.t_form != Z_VAR or not self._use_z:
                return None
            weff = float(self.inst.omega)
            if weff <= 0.0:
                return None
            return dyj, weff, None
        if blk.w_form != W_VAR or blk.z_form != Z_VAR:
            return None
        if not (self._use_w and self._use_z):
            return None
        p = 0.0 if self.inst.omega_w is None else float(self.inst.omega_w)
        q = float(self.inst.omega)
        if p <= 0.0 or q <= 0.0:
            return None
        return dyj, math.sqrt(p * q), (p, q)

    def _reward_coords(self, blk: ConeBlock) -> list:
        """Block coordinates able to drive the objective down without limit."""
        return [
            (j, dj)
            for j, dj in sorted(blk.dy.items())
            if dj > 0.0
            and math.isinf(self.inst.y_upper[j])
            and self.inst.b[j] < 0.0
        ]

    def _price_rows(self, blk: ConeBlock) -> list:
        """Start rows that bound the LP along reward and epigraph directions.

        Standard blocks compared against the priced z variable get one row
        aligned with the unbounded rewards: moving distance tau along the
        reward ray then costs at least (1/sqrt(beta) - 1) * reward * tau > 0
        for beta < 1, the same discount the closed-form reduction applies.
        Rotated blocks with dedicated (w, z) prices additionally get the
        balanced support, under which raising s costs sqrt(p*q) per unit.
        beta >= 1 means the instance is genuinely unbounded; no row can (or
        should) prevent the LP from discovering that.
        """
        rows: list = []
        if blk.kind is Cone.STANDARD:
            if blk.t_form != Z_VAR or not self._use_z:
                return rows
            weff = float(self.inst.omega)
            if weff <= 0.0:
                return rows
            coords = self._reward_coords(blk)
            if not coords:
                return rows
            beta = sum((self.inst.b[j] / weff) ** 2 / dj for j, dj in coords)
            if beta >= 1.0 - 1e-12:
                return rows
            rt = math.sqrt(beta)
            terms = [
                (-self.inst.b[j] / (weff * rt), AffineForm(y={j: 1.0}))
                for j, _ in coords
            ]
            terms.append((-1.0, blk.t_form))
            rows.append(terms)
            return rows

        if blk.w_form != W_VAR or blk.z_form != Z_VAR:
            return rows
        if not (self._use_w and self._use_z):
            return rows
        p = 0.0 if self.inst.omega_w is None else float(self.inst.omega_w)
        q = float(self.inst.omega)
        if p <= 0.0 or q <= 0.0:
            return rows
        awz = (q - p) / (q + p)
        ascale = 2.0 * math.sqrt(p * q) / (p + q)
        rows.append(
            [(ascale, _S_VAR), (awz - 1.0, W_VAR), (-awz - 1.0, Z_VAR)]
        )
        coords = self._reward_coords(blk)
        if coords:
            weff = math.sqrt(p * q)
            beta = sum((self.inst.b[j] / weff) ** 2 / dj for j, dj in coords)
            if beta < 1.0 - 1e-12:
                rt = math.sqrt(beta)
                terms = [
                    (ascale * -self.inst.b[j] / (weff * rt), AffineForm(y={j: 1.0}))
                    for j, _ in coords
                ]
                terms.append((awz - 1.0, W_VAR))
                terms.append((-awz - 1.0, Z_VAR))
                rows.append(terms)
        return rows

    # ------------------------------------------------------------ mutation

    def set_x_bounds(self, i: int, lower: float, upper: float) -> None:
        self.state.set_bound(i, lower, upper)

    def add_cut(self, cut: CutSurface) -> None:
        """Install one cut: linear rows at once, curved ones on demand."""
        self._pure = False
        if cut.extended_row is not None:
            self._af_row(cut.extended_row, cut.block)
        elif cut.kind is CutKind.BINARY_POLYMATROID:
            # pi'x + const <= s_k is the extended-space version of the cut;
            # it is linear for rotated blocks too, where the direct
            # comparison side would not be.
            row = AffineForm(
                const=cut.constant,
                x={i: v for i, v in enumerate(cut.pi) if v != 0.0},
                s=-1.0,
            )
            self._af_row(row, cut.block)
        else:
            self._managed.append(cut)
            if self._last_x is not None:
                pt = self._point(self._last_x)
                if cut_violation(cut, pt) > OA_TOL:
                    try:
                        self._af_row(
                            gradient_linearize(cut, pt), cut.block, perm=False
                        )
                    except DegeneratePoint:
                        pass

    # ------------------------------------------------------------- solving

    def _point(self, xfull: np.ndarray) -> Point:
        return Point.make(
            xfull[: self.n],
            xfull[self.n : self.n + self.m],
            s=float(xfull[self._s0]) if self._has_primary else None,
            w=float(xfull[self._wcol]) if self._use_w else None,
            z=float(xfull[self._zcol]) if self._use_z else None,
        )

    def _add_support(self, ci: int, uvals: np.ndarray, count: bool = True) -> None:
        """Append the supporting hyperplane of cone ci through u-values uvals."""
        cone = self._cones[ci]
        U, uc, trow, tc = self._dense[ci]
        norm = float(np.linalg.norm(uvals, cone.power))
        if norm <= APEX_TOL:
            uvals = uvals + APEX_NUDGE
            norm = float(np.linalg.norm(uvals, cone.power))
        if cone.power == 2:
            alpha = uvals / norm
        else:
            alpha = (uvals / norm) ** 3
        self._push_row(
            alpha @ U - trow, "<=", tc - float(alpha @ uc), perm=not count
        )
        if count:
            cone.linearizations += 1

    def _anchor(self):
        """Joint minimizer of the guided block over the current bounds.

        Returns (columns, values) for a cone-feasible point: the closed-form
        optimum over both the binary box and the continuous coordinates,
        ignoring linear rows.  Tangents taken between the LP point and this
        anchor cut off whole slabs of the zigzag region instead of shaving
        one LP vertex per round, which is the difference between a handful
        of rounds and hundreds once x has many coordinates.  Rows make the
        anchor inexact but never unsound -- it only chooses where supports
        are taken.
        """
        if not self._guides:
            return None
        bci, aci, dyj, weight, wz = self._guides[0]
        k = self._cones[bci].block
        blk = self.blocks[k]
        cxi = [i for i, cv in sorted(blk.cx.items()) if cv > 0.0]
        bvec = np.array(
            [self.inst.a[i] for i in cxi] + [self.inst.b[j] for j in dyj]
        )
        dvec = np.array([blk.cx[i] for i in cxi] + [blk.dy[j] for j in dyj])
        lvec = np.array([self.state.lb[i] for i in cxi] + [0.0] * len(dyj))
        uvec = np.array(
            [self.state.ub[i] for i in cxi]
            + [self.inst.y_upper[j] for j in dyj]
        )
        try:
            _, YY, T = _inner_minimum(
                np.array([blk.sigma]), bvec, dvec, lvec[None, :], uvec, weight
            )
        except Unbounded:
            return None
        that = float(T[0])
        xhat = YY[0, : len(cxi)]
        yhat = YY[0, len(cxi) :]
        cols = [self.xcol(i) for i in cxi] + [self.ycol(j) for j in dyj]
        vals = list(YY[0])
        shat = math.sqrt(
            max(
                blk.sigma
                + sum(
                    blk.cx[i] * float(xhat[p]) ** 2 for p, i in enumerate(cxi)
                ),
                0.0,
            )
        )
        cols.append(self.scol(k))
        vals.append(shat)
        if wz is None:
            cols.append(self._zcol)
            vals.append(that)
        else:
            p, q = wz
            cols.append(self._wcol)
            vals.append(0.5 * that * math.sqrt(q / p))
            cols.append(self._zcol)
            vals.append(0.5 * that * math.sqrt(p / q))
        # Tangent directions through the anchor: the KKT rows of the inner
        # problem.  When no linear rows bind, these two supports alone make
        # the LP bound exact at the anchor.
        tangents = []
        if aci is not None:
            au = [math.sqrt(blk.cx[i]) * float(xhat[p]) for p, i in enumerate(cxi)]
            if blk.sigma > 0.0:
                au.insert(0, math.sqrt(blk.sigma))
            tangents.append((aci, np.array(au)))
        bu = [shat] + [
            math.sqrt(blk.dy[j]) * float(yhat[p]) for p, j in enumerate(dyj)
        ]
        if wz is not None:
            p, q = wz
            bu.append(0.5 * that * (math.sqrt(q / p) - math.sqrt(p / q)))
        tangents.append((bci, np.array(bu)))
        return np.array(cols, dtype=int), np.array(vals), tangents

    def _guided_supports(self, xfull: np.ndarray) -> int:
        """Add tangents through each guided block's inner minimizer.

        Only rows that cut the current LP point by more than the LP's own
        feasibility resolution are added; once x stabilizes the minimizer
        stops moving and the same tangent would otherwise be re-added every
        round as numerical noise.
        """
        thresh = OA_TOL + PRIMAL_TOL * math.sqrt(max(self.state.nrows, 1))
        xb = xfull[: self.n]
        added = 0
        for ci, _aci, dyj, weight, wz in self._guides:
            blk = self.blocks[self._cones[ci].block]
            A = blk.sigma
            for i, cv in blk.cx.items():
                A += cv * float(xb[i]) * float(xb[i])
            b = np.array([self.inst.b[j] for j in dyj])
            d = np.array([blk.dy[j] for j in dyj])
            ub = np.array([self.inst.y_upper[j] for j in dyj])
            try:
                _, Y, T = _inner_minimum(
                    np.array([A]), b, d, np.zeros((1, len(dyj))), ub, weight
                )
            except Unbounded:
                continue
            that = float(T[0])
            if that <= APEX_TOL:
                continue
            uvals = [math.sqrt(max(A, 0.0))]
            uvals.extend(
                math.sqrt(blk.dy[j]) * float(Y[0, pos])
                for pos, j in enumerate(dyj)
            )
            if wz is not None:
                p, q = wz
                uvals.append(0.5 * that * (math.sqrt(q / p) - math.sqrt(p / q)))
            uvec = np.array(uvals)
            U, uc, trow, tc = self._dense[ci]
            alpha = uvec / float(np.linalg.norm(uvec))
            resid = float(alpha @ (U @ xfull + uc)) - float(trow @ xfull) - tc
            if resid > thresh:
                self._add_support(ci, uvec)
                added += 1
        return added

    def _separate(self, xfull: np.ndarray) -> tuple:
        added = 0
        worst = 0.0
        for ci, cone in enumerate(self._cones):
            U, uc, trow, tc = self._dense[ci]
            uvals = U @ xfull + uc
            viol = float(np.linalg.norm(uvals, cone.power)) - float(
                trow @ xfull + tc
            )
            worst = max(worst, viol)
            if viol > OA_TOL:
                self._add_support(ci, uvals)
                added += 1
        if self._guides:
            added += self._guided_supports(xfull)
        if self._managed:
            pt = self._point(xfull)
            for idx, cut in enumerate(self._managed):
                viol = cut_violation(cut, pt)
                worst = max(worst, viol)
                if viol <= OA_TOL:
                    continue
                try:
                    self._af_row(
                        gradient_linearize(cut, pt), cut.block, perm=False
                    )
                    added += 1
                except DegeneratePoint:
                    if idx not in self._degenerate:
                        # keep the comparison side nonnegative and move on
                        self._degenerate.add(idx)
                        blk = cut.cone
                        self._af_row(
                            _af_sum([(-1.0, blk.w_form), (-1.0, blk.z_form)]),
                            cut.block,
                        )
                        added += 1
        return added, worst

    def _closed_form(self) -> Optional[RelaxResult]:
        """Exact optimum when the LP holds nothing but the single cone.

        With no linear rows, no cardinality bound and no cuts, minimizing
        over the boxes decomposes into the guided block's inner problem plus
        independent linear terms, so the separation loop can be skipped
        entirely.  Bounds are read from the LP, so 0/1 fixings are honored.
        """
        anchor = self._anchor()
        if anchor is None:
            # the guide exists, so a missing anchor means the inner problem
            # itself diverges
            return RelaxResult(-math.inf, None, RelaxStatus.UNBOUNDED, 0)
        cols, vals, _ = anchor
        lb, ub, obj = self.state.lb, self.state.ub, self.state.obj
        full = lb.copy()
        covered = set(int(c) for c in cols)
        for c in range(self.n + self.m):
            if c in covered or obj[c] >= 0.0:
                continue
            if math.isinf(ub[c]):
                return RelaxResult(-math.inf, None, RelaxStatus.UNBOUNDED, 0)
            full[c] = ub[c]
        full[cols] = vals
        value = float(obj @ full)
        self._last_x = full
        return RelaxResult(value, self._point(full), RelaxStatus.OPTIMAL, 0)

    def _upper_completion(self, xfull: np.ndarray):
        """True-region completion of the LP point's x part, with its value.

        Holding x fixed, raise s to cover the cone and every row that prices
        it, re-optimize the curved y coordinates in closed form, and set the
        comparison variables exactly.  When the result satisfies every row,
        cone and managed cut, its objective upper-bounds the current
        relaxation optimum, so (upper - LP value) is a true convergence gap.
        Returns (objective, full column vector), or None whenever such a
        completion cannot be certified.
        """
        if len(self.blocks) != 1 or not self._guides:
            return None
        for row in self.inst.linear_constraints:
            if any(v != 0.0 for v in row.y):
                return None
        bci, _aci, dyj, weight, wz = self._guides[0]
        blk = self.blocks[0]
        xb = xfull[: self.n]
        A = blk.sigma + sum(cv * xb[i] * xb[i] for i, cv in blk.cx.items())
        scol = self.scol(0)
        sreq = math.sqrt(max(A, 0.0))
        Amat = self.state.A
        for r in range(self.state.nrows):
            lam = Amat[r, scol]
            if lam >= -1e-12 or self.state.senses[r] != "<=":
                continue
            rest = float(Amat[r] @ xfull) - lam * float(xfull[scol])
            # rows demanding s alongside the continuous part cannot be met
            # by raising s alone
            if any(
                Amat[r, c] != 0.0
                for c in range(self.n, self.state.ncols)
                if c != scol
            ):
                return None
            sreq = max(sreq, (rest - float(self.state.rhs[r])) / (-lam))
        b = np.array([self.inst.b[j] for j in dyj])
        d = np.array([blk.dy[j] for j in dyj])
        ub = np.array([self.inst.y_upper[j] for j in dyj])
        try:
            _, Y, T = _inner_minimum(
                np.array([sreq * sreq]), b, d,
                np.zeros((1, len(dyj))), ub, weight,
            )
        except Unbounded:
            return None
        that = float(T[0])
        point = xfull.copy()
        point[scol] = sreq
        for pos, j in enumerate(dyj):
            point[self.ycol(j)] = float(Y[0, pos])
        if wz is None:
            point[self._zcol] = that
        else:
            p, q = wz
            point[self._wcol] = 0.5 * that * math.sqrt(q / p)
            point[self._zcol] = 0.5 * that * math.sqrt(p / q)
        # certify: every LP row and managed cut must hold at the completion
        slack = 1e-9
        act = Amat @ point
        for r in range(self.state.nrows):
            resid = float(act[r]) - float(self.state.rhs[r])
            sense = self.state.senses[r]
            scale = slack * max(1.0, abs(float(self.state.rhs[r])))
            if sense == "<=" and resid > scale:
                return None
            if sense == ">=" and resid < -scale:
                return None
            if sense == "==" and abs(resid) > scale:
                return None
        if self._managed:
            pt = self._point(point)
            for cut in self._managed:
                if cut_violation(cut, pt) > slack:
                    return None
        return float(self.state.obj @ point), point

    def solve(
        self,
        cutoff: Optional[float] = None,
        max_rounds: Optional[int] = None,
        deadline: Optional[float] = None,
    ) -> RelaxResult:
        """Run the separation loop from the current LP state.

        cutoff, when given, stops the loop as soon as the LP value reaches
        it: every LP value along the loop is already a valid lower bound, so
        a caller that only needs to compare against an incumbent can skip
        the remaining cone refinement.  The early result reports CUTOFF and
        its point may still violate cones.  max_rounds caps the LP solves
        for this call and deadline (perf_counter time) cuts the loop off
        mid-flight; both report STALLED, whose value is still a valid bound.
        """
        if self._pure and self._guides and not self._managed:
            res = self._closed_form()
            if res is not None:
                return res
        limit = MAX_OA_ROUNDS if max_rounds is None else max_rounds
        row_budget = max(120, self.state.ncols)
        value = math.nan
        best_value = -math.inf
        worst = math.inf
        stall = 0
        flat = 0
        anchor = self._anchor()
        for rounds in range(1, limit + 1):
            if self.state.nrows > len(self._perm) + row_budget:
                self._rebuild_lp()
            res = self.state.solve()
            if res.status is LpStatus.INFEASIBLE:
                return RelaxResult(math.inf, None, RelaxStatus.INFEASIBLE, rounds)
            if res.status is LpStatus.UNBOUNDED:
                return RelaxResult(
                    -math.inf, None, RelaxStatus.UNBOUNDED, rounds
                )
            value = res.value
            self._last_x = res.x
            if cutoff is not None and value >= cutoff:
                return RelaxResult(
                    value, self._point(res.x), RelaxStatus.CUTOFF, rounds, worst
                )
            if deadline is not None and time.perf_counter() > deadline:
                return RelaxResult(
                    value, self._point(res.x), RelaxStatus.STALLED, rounds, worst
                )
            # A feasible completion of the LP point certifies convergence
            # long before every supporting row settles.  The completed
            # point is returned: it is cone-exact at the same x.
            comp = self._upper_completion(res.x)
            if comp is not None and comp[0] - value <= 10.0 * OA_TOL * max(
                1.0, abs(comp[0])
            ):
                self._last_x = comp[1]
                return RelaxResult(
                    value, self._point(comp[1]), RelaxStatus.OPTIMAL,
                    rounds, 0.0,
                )
            # Last resort: the LP value is monotone under new rows, so a
            # long dead plateau means the remaining rounds buy nothing.
            if value <= best_value + 1e-9 * max(1.0, abs(best_value)):
                flat += 1
                if flat >= 25:
                    status = (
                        RelaxStatus.OPTIMAL
                        if worst <= 100.0 * OA_TOL
                        else RelaxStatus.STALLED
                    )
                    return RelaxResult(
                        value, self._point(res.x), status, rounds, worst
                    )
            else:
                flat = 0
            best_value = max(best_value, value)
            added_mid = 0
            if anchor is not None:
                cols, vals, tangents = anchor
                thresh = OA_TOL + PRIMAL_TOL * math.sqrt(
                    max(self.state.nrows, 1)
                )
                for ci, uvec in tangents:
                    U, uc, trow, tc = self._dense[ci]
                    nrm = float(np.linalg.norm(uvec))
                    if nrm <= APEX_TOL:
                        continue
                    alpha = uvec / nrm
                    resid = float(alpha @ (U @ res.x + uc)) - float(
                        trow @ res.x
                    ) - tc
                    if resid > thresh:
                        self._add_support(ci, uvec)
                        added_mid += 1
                mid = res.x.copy()
                mid[cols] = 0.5 * (mid[cols] + vals)
                added_mid += self._separate(mid)[0]
            prev_worst = worst
            added, worst = self._separate(res.x)
            if added + added_mid == 0:
                return RelaxResult(
                    value, self._point(res.x), RelaxStatus.OPTIMAL, rounds, worst
                )
            # Violations that stop shrinking while already below the LP's
            # feasibility resolution cannot be separated any further -- new
            # rows land inside the solver's noise band.  Accept the point.
            if worst <= 100.0 * OA_TOL and worst >= 0.99 * prev_worst:
                stall += 1
                if stall >= 5:
                    return RelaxResult(
                        value,
                        self._point(res.x),
                        RelaxStatus.OPTIMAL,
                        rounds,
                        worst,
                    )
            else:
                stall = 0
        # Out of rounds: the LP optimum is still a valid lower bound.
        return RelaxResult(
            value,
            self._point(self._last_x),
            RelaxStatus.STALLED,
            limit,
            worst,
        )


def solve_relaxation(
    inst: ProblemInstance,
    cuts: Iterable[CutSurface] = (),
    fixings: Optional[Mapping[int, int]] = None,
) -> RelaxResult:
    """One-shot relaxation bound for an instance under optional 0/1 fixings."""
    return Relaxation(inst, cuts, fixings).solve()
