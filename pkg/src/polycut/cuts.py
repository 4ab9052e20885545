"""Valid-inequality families for conic quadratic mixed 0-1 sets.

Every cut here strengthens one cone block

    sigma + sum_i c_i x_i + sum_j d_j y_j^2  <=  t^2     (standard)
    sigma + sum_i c_i x_i + sum_j d_j y_j^2  <=  4 W Z   (rotated)

over binary x.  The common shape is

    sqrt( (sqrt(sigma + sum_{j in T} d_j y_j^2) + pi'x)^2
          + sum_{j not in T} d_j y_j^2 )              <=  t ,

where T is a subset of the box-bounded continuous variables and pi comes
from the chain rule of the concave-of-modular set function with offset
sigma + d(T).  T = {} collapses to a linear row pi'x <= s in the extended
space; T = all of M puts every continuous variable under the inner root.
For rotated blocks the same left side is compared against W + Z after
absorbing (W - Z)^2, which is what gradient_linearize exploits.

Lifting replaces pi by coefficients rho that account for constraints on x:
rho_(k) shrinks toward 0 as the modular weight reachable before position k
grows.  Exact weights come from enumeration (or a heap for a pure
cardinality constraint); cheap weights come from a warm-started chain of
LPs that differ in two bounds and one objective coefficient.

Cut surfaces carry their block's data (CutSurface.cone), so violation
checks and linearizations need no instance handle.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import simplex
from .model import (
    AffineForm,
    Cone,
    ConeBlock,
    CutKind,
    CutSurface,
    LinearRow,
    Point,
    ProblemInstance,
)
from .submodular import (
    ConcaveOfModularOracle,
    Permutation,
    as_permutation,
    polymatroid_coefficients,
)

# Relative violation a candidate must reach before callers should add it.
VIOLATION_TOL = 1e-4

# Brute-force lifting refuses instances beyond this many binary variables.
ENUMERATION_GUARD = 20


class DegeneratePoint(ValueError):
    """Linearization requested where the supporting-norm denominator is 0."""


@dataclass(frozen=True)
class LiftedCoefficients:
    """Lifted coefficients rho and the per-position modular weights behind them.

    rho is indexed by variable (rho[i] multiplies x_i).  sigma_bar is indexed
    by *position* in the generating permutation: sigma_bar[k] is the largest
    value of sigma + (predecessor c-mass) + d(T) attainable with position k's
    variable switched on, so rho[order[k]] = sqrt(c + sigma_bar[k]) -
    sqrt(sigma_bar[k]).  +inf weights force rho = 0; -inf marks positions
    whose lifting subproblem was infeasible (handled by a fixed convention,
    see lifted_coefficients_exact).  `exact` is False for LP-relaxation
    weights, which are upper bounds on the true ones.
    """

    rho: tuple
    sigma_bar: tuple
    exact: bool


# --------------------------------------------------------------------------
# plain (unlifted) families
# --------------------------------------------------------------------------


def cut_binary(oracle: ConcaveOfModularOracle, perm) -> CutSurface:
    """Linear cut  f(empty) + pi'x <= z  from one permutation's chain."""
    perm = as_permutation(perm)
    pi = polymatroid_coefficients(oracle, perm)
    blk = ConeBlock(
        kind=Cone.STANDARD,
        sigma=oracle.sigma,
        cx={i: ci for i, ci in enumerate(oracle.c) if ci > 0},
        power=oracle.root_power,
    )
    return CutSurface(
        kind=CutKind.BINARY_POLYMATROID,
        pi=tuple(float(v) for v in pi),
        constant=oracle.empty_value(),
        sigma_T=oracle.sigma,
        cone=blk,
    )


def cut_mixed_extended(inst: ProblemInstance, perm) -> CutSurface:
    """Row  f(empty) + pi'x <= s  in the extended space.

    The auxiliary s of the block satisfies sigma + c'x <= s^2 and
    s^2 + sum_j d_j y_j^2 <= t^2, so the row encodes the nonlinear cut
    (f(empty) + pi'x)^2 + sum_j d_j y_j^2 <= t^2 while staying linear.
    """
    perm = as_permutation(perm)
    oracle = ConcaveOfModularOracle(
        inst.sigma, tuple(inst.c), root_power=inst.oracle_power
    )
    pi = polymatroid_coefficients(oracle, perm)
    const = oracle.empty_value()
    row = AffineForm(
        const=const, x={i: float(v) for i, v in enumerate(pi) if v != 0.0}, s=-1.0
    )
    return CutSurface(
        kind=CutKind.EXTENDED_LINEAR,
        pi=tuple(float(v) for v in pi),
        constant=const,
        extended_row=row,
        sigma_T=inst.sigma,
        cone=inst.primary_block(),
    )


def _check_T(y_upper, d, T) -> Tuple[tuple, float]:
    """Validate a T subset and return it sorted with its d(T) bound mass."""
    T = tuple(sorted(set(int(j) for j in T)))
    mass = 0.0
    for j in T:
        if j < 0 or j >= len(y_upper):
            raise ValueError("T index out of range")
        if d[j] <= 0.0:
            continue
        if math.isinf(y_upper[j]):
            raise ValueError(
                "continuous variable %d has no upper bound and cannot enter T" % j
            )
        mass += d[j] * y_upper[j] ** 2
    return T, mass


def cut_bounded(inst: ProblemInstance, perm, T, lifted=None) -> CutSurface:
    """Nonlinear surface pulling the T continuous variables under the root:

        sqrt((sqrt(sigma + sum_T d y^2) + pi'x)^2 + sum_{M-T} d y^2) <= z

    pi is built from the chain with offset sigma + d(T) (coefficients stay
    valid because the inner root never exceeds that offset on the box); pass
    `lifted` to substitute constraint-aware rho coefficients.  T = {} returns
    the extended linear row instead, which encodes the same surface.
    """
    T, mass = _check_T(inst.y_upper, inst.d, T)
    if not T:
        if lifted is None:
            return cut_mixed_extended(inst, perm)
        return _lifted_extended(inst, perm, lifted)
    if inst.cone is not Cone.STANDARD:
        raise ValueError("bounded-T cuts compare against z; use cut_rotated")
    if inst.oracle_power != 2:
        raise ValueError("bounded-T cuts require the quadratic head")
    perm = as_permutation(perm)
    sigma_T = inst.sigma + mass
    if lifted is not None:
        pi = tuple(float(v) for v in lifted.rho)
    else:
        oracle = ConcaveOfModularOracle(sigma_T, tuple(inst.c))
        pi = tuple(float(v) for v in polymatroid_coefficients(oracle, perm))
    return CutSurface(
        kind=CutKind.GRADIENT_CUT,
        pi=pi,
        constant=math.sqrt(sigma_T),
        T=T,
        sigma_T=sigma_T,
        rho_like=lifted is not None,
        cone=inst.primary_block(),
    )


def _lifted_extended(inst: ProblemInstance, perm, lifted) -> CutSurface:
    """T = {} lifted row: f(empty) + rho'x <= s."""
    oracle = ConcaveOfModularOracle(
        inst.sigma, tuple(inst.c), root_power=inst.oracle_power
    )
    const = oracle.empty_value()
    row = AffineForm(
        const=const,
        x={i: float(v) for i, v in enumerate(lifted.rho) if v != 0.0},
        s=-1.0,
    )
    return CutSurface(
        kind=CutKind.EXTENDED_LINEAR,
        pi=tuple(float(v) for v in lifted.rho),
        constant=const,
        extended_row=row,
        sigma_T=inst.sigma,
        rho_like=True,
        cone=inst.primary_block(),
    )


def cut_rotated(inst: ProblemInstance, perm, T=(), lifted=None) -> CutSurface:
    """Cut for the primary rotated block, in the form used for linearization:

        sqrt((sqrt(sigma + sum_T d y^2) + pi'x)^2 + sum_{M-T} d y^2
             + (W - Z)^2)  <=  W + Z.

    With T = {} the surface is also recorded as the extended row pi'x +
    f(empty) <= s (with s^2 + sum d y^2 <= 4WZ), which a relaxation can add
    directly as a linear row.
    """
    if inst.cone is not Cone.ROTATED:
        raise ValueError("cut_rotated needs a rotated primary cone")
    T, mass = _check_T(inst.y_upper, inst.d, T)
    if inst.oracle_power == 4 and T:
        raise ValueError("fourth-root blocks carry no continuous variables")
    perm = as_permutation(perm)
    sigma_T = inst.sigma + mass
    if lifted is not None:
        pi = tuple(float(v) for v in lifted.rho)
    else:
        oracle = ConcaveOfModularOracle(
            sigma_T, tuple(inst.c), root_power=inst.oracle_power
        )
        pi = tuple(float(v) for v in polymatroid_coefficients(oracle, perm))
    const = ConcaveOfModularOracle(
        sigma_T, (), root_power=inst.oracle_power
    ).empty_value()
    row = None
    if not T:
        row = AffineForm(
            const=const,
            x={i: v for i, v in enumerate(pi) if v != 0.0},
            s=-1.0,
        )
    return CutSurface(
        kind=CutKind.ROTATED_GRADIENT_CUT,
        pi=pi,
        constant=const,
        T=T,
        extended_row=row,
        sigma_T=sigma_T,
        rho_like=lifted is not None,
        cone=inst.primary_block(),
    )


def block_cut(
    blk: ConeBlock,
    perm,
    T=(),
    lifted=None,
    block_index: int = 0,
    y_upper: Optional[Sequence] = None,
) -> CutSurface:
    """Polymatroid cut for one cone block of a multi-block instance.

    Same construction as cut_bounded / cut_rotated but driven purely by the
    block's data; `block_index` records the position in all_blocks() so the
    relaxation knows which auxiliary s column the extended row refers to.
    T indexes into the block's dy keys; y_upper supplies bounds (defaults
    to 1, the normalized box).
    """
    perm = as_permutation(perm)
    n = len(perm)
    T = tuple(sorted(set(int(j) for j in T)))
    mass = 0.0
    for j in T:
        if j not in blk.dy:
            raise ValueError("T must index the block's continuous variables")
        u = 1.0 if y_upper is None else float(y_upper[j])
        if math.isinf(u):
            raise ValueError("unbounded variable in T")
        mass += blk.dy[j] * u * u
    sigma_T = blk.sigma + mass
    c = np.zeros(n)
    for i, v in blk.cx.items():
        c[i] = v
    if lifted is not None:
        pi = tuple(float(v) for v in lifted.rho)
    else:
        oracle = ConcaveOfModularOracle(sigma_T, tuple(c), root_power=blk.power)
        pi = tuple(float(v) for v in polymatroid_coefficients(oracle, perm))
    const = ConcaveOfModularOracle(sigma_T, (), root_power=blk.power).empty_value()
    if blk.kind is Cone.ROTATED:
        kind = CutKind.ROTATED_GRADIENT_CUT
    elif T:
        kind = CutKind.GRADIENT_CUT
    else:
        kind = CutKind.EXTENDED_LINEAR
    row = None
    if not T:
        row = AffineForm(
            const=const, x={i: v for i, v in enumerate(pi) if v != 0.0}, s=-1.0
        )
    return CutSurface(
        kind=kind,
        pi=pi,
        constant=const,
        T=T,
        extended_row=row,
        block=block_index,
        sigma_T=sigma_T,
        rho_like=lifted is not None,
        cone=blk,
    )


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def _f_parts(cut: CutSurface, xv, yv) -> Tuple[float, float, float]:
    """Split f at a point: f = sqrt((inner + linear)^2 + rest2).

    inner is the value of the root over sigma and the T part, linear is
    pi'x, rest2 the squared mass of continuous variables outside T.
    """
    blk = cut.cone
    if blk.power == 4:
        inner = cut.constant
    else:
        t = blk.sigma
        for j in cut.T:
            t += blk.dy[j] * yv[j] ** 2
        inner = math.sqrt(t) if t > 0.0 else 0.0
    linear = 0.0
    for i, v in enumerate(cut.pi):
        if v != 0.0:
            linear += v * xv[i]
    rest2 = 0.0
    for j, dj in blk.dy.items():
        if j not in cut.T:
            rest2 += dj * yv[j] ** 2
    return inner, linear, rest2


def _rhs_value(cut: CutSurface, p: Point) -> float:
    """Value of the cut's comparison side at p: t (standard) or W + Z."""
    blk = cut.cone
    wv = p.w if p.w is not None else 0.0
    zv = p.z if p.z is not None else 0.0
    sv = p.s if p.s is not None else 0.0
    if blk.kind is Cone.STANDARD:
        return blk.t_form.value(p.x, p.y, wv, zv, sv)
    return blk.w_form.value(p.x, p.y, wv, zv, sv) + blk.z_form.value(
        p.x, p.y, wv, zv, sv
    )


def cut_violation(cut: CutSurface, p: Point) -> float:
    """f-form violation at p; positive means p is cut off.

    Standard blocks: sqrt((inner + pi'x)^2 + rest) - t.
    Rotated blocks:  sqrt((inner + pi'x)^2 + rest + (W-Z)^2) - (W + Z).
    """
    blk = cut.cone
    inner, linear, rest2 = _f_parts(cut, p.x, p.y)
    base = max(inner + linear, 0.0)
    f2 = base * base + rest2
    wv = p.w if p.w is not None else 0.0
    zv = p.z if p.z is not None else 0.0
    sv = p.s if p.s is not None else 0.0
    if blk.kind is Cone.STANDARD:
        return math.sqrt(f2) - blk.t_form.value(p.x, p.y, wv, zv, sv)
    W = blk.w_form.value(p.x, p.y, wv, zv, sv)
    Z = blk.z_form.value(p.x, p.y, wv, zv, sv)
    return math.sqrt(f2 + (W - Z) ** 2) - (W + Z)


def relative_violation(cut: CutSurface, p: Point) -> float:
    """cut_violation scaled by max(1, |rhs|); compare against VIOLATION_TOL."""
    return cut_violation(cut, p) / max(1.0, abs(_rhs_value(cut, p)))


# --------------------------------------------------------------------------
# gradient linearization
# --------------------------------------------------------------------------


def _af_sum(terms) -> AffineForm:
    """Weighted sum of affine forms: terms is a list of (weight, form)."""
    const = w = z = s = 0.0
    xs: dict = {}
    ys: dict = {}
    for wt, f in terms:
        if wt == 0.0:
            continue
        const += wt * f.const
        w += wt * f.w
        z += wt * f.z
        s += wt * f.s
        for i, v in f.x.items():
            xs[i] = xs.get(i, 0.0) + wt * v
        for j, v in f.y.items():
            ys[j] = ys.get(j, 0.0) + wt * v
    return AffineForm(
        const=const,
        x={i: v for i, v in xs.items() if v != 0.0},
        y={j: v for j, v in ys.items() if v != 0.0},
        w=w,
        z=z,
        s=s,
    )


def gradient_linearize(cut: CutSurface, pbar: Point) -> AffineForm:
    """Supporting row of the cut surface at pbar.

    Returns the affine form (g - comparison side) whose value <= 0 is the
    linear cut: g underestimates f everywhere (concavity of the inner root
    in y^2 terms plus convexity of the norm), and touches it at pbar.  For
    rotated blocks the row is built from the norm of (f, W - Z) against
    W + Z, with the weights (psi, Wbar - Zbar)/Psi forming a unit vector so
    validity follows from the Cauchy-Schwarz inequality.

    Raises DegeneratePoint when the supporting norm vanishes at pbar and no
    meaningful row exists.
    """
    blk = cut.cone
    xv, yv = pbar.x, pbar.y
    wv = pbar.w if pbar.w is not None else 0.0
    zv = pbar.z if pbar.z is not None else 0.0
    sv = pbar.s if pbar.s is not None else 0.0

    inner, linear, rest2 = _f_parts(cut, xv, yv)
    eta = inner + linear
    zeta = (eta / inner) if inner > 0.0 else 0.0
    psi = math.sqrt(eta * eta + rest2)

    if psi > 0.0:
        xcoefs = {}
        scale = eta / psi
        for i, v in enumerate(cut.pi):
            if v != 0.0:
                xcoefs[i] = scale * v
        ycoefs = {}
        for j in cut.T:
            coef = (zeta / psi) * blk.dy[j] * yv[j]
            if coef != 0.0:
                ycoefs[j] = coef
        for j, dj in blk.dy.items():
            if j not in cut.T:
                coef = dj * yv[j] / psi
                if coef != 0.0:
                    ycoefs[j] = coef
        const = psi
        for i, v in xcoefs.items():
            const -= v * xv[i]
        for j, v in ycoefs.items():
            const -= v * yv[j]
        g = AffineForm(const=const, x=xcoefs, y=ycoefs)
    else:
        g = AffineForm()

    if blk.kind is Cone.STANDARD:
        if psi <= 0.0:
            raise DegeneratePoint("cut surface vanishes at the given point")
        return _af_sum([(1.0, g), (-1.0, blk.t_form)])

    Wbar = blk.w_form.value(xv, yv, wv, zv, sv)
    Zbar = blk.z_form.value(xv, yv, wv, zv, sv)
    Psi = math.hypot(psi, Wbar - Zbar)
    if Psi <= 0.0:
        raise DegeneratePoint("rotated support undefined: both norms vanish")
    alpha = psi / Psi
    beta = (Wbar - Zbar) / Psi
    return _af_sum(
        [
            (alpha, g),
            (beta, blk.w_form),
            (-beta, blk.z_form),
            (-1.0, blk.w_form),
            (-1.0, blk.z_form),
        ]
    )


# --------------------------------------------------------------------------
# lifting
# --------------------------------------------------------------------------


_INFEASIBLE = -math.inf


def _rho_from_weight(c_i: float, weight: float, sigma: float) -> float:
    """Chain coefficient for one position given its modular weight.

    weight = -inf marks an infeasible lifting subproblem: the variable can
    never be 1, so any coefficient is valid; we use the largest chain value
    sqrt(c + sigma) - sqrt(sigma), which keeps the cut format uniform.
    """
    if weight == math.inf:
        return 0.0
    if weight == _INFEASIBLE:
        return math.sqrt(c_i + sigma) - math.sqrt(sigma)
    return math.sqrt(c_i + weight) - math.sqrt(weight)


def _dT_or_inf(inst: ProblemInstance, T: tuple) -> float:
    mass = 0.0
    for j in T:
        if inst.d[j] <= 0.0:
            continue
        if math.isinf(inst.y_upper[j]):
            return math.inf
        mass += inst.d[j] * inst.y_upper[j] ** 2
    return mass


def lifted_coefficients_exact(inst: ProblemInstance, perm, T=()) -> LiftedCoefficients:
    """Exact lifted coefficients by maximizing the reachable modular weight.

    For each position k the weight is sigma + d(T) + max sum of predecessor
    c-mass over feasible binary x with x_(k) = 1 (continuous variables sit at
    their upper bounds inside T).  A pure cardinality constraint admits an
    O(n log k) specialization — the max is just the k-1 largest predecessor
    c values — otherwise all 2^n points are enumerated (guarded at n <= 20).
    """
    perm = as_permutation(perm)
    if len(perm) != inst.n:
        raise ValueError("permutation length must match n")
    T = tuple(sorted(set(int(j) for j in T)))
    dT = _dT_or_inf(inst, T)
    if math.isinf(dT):
        return LiftedCoefficients(
            rho=(0.0,) * inst.n, sigma_bar=(math.inf,) * inst.n, exact=True
        )
    if inst.cardinality is not None and not inst.linear_constraints:
        return _lift_cardinality(inst, perm.order, dT)
    if not inst.linear_constraints and inst.cardinality is None:
        # unconstrained: every predecessor can be 1 -> plain chain weights
        base = inst.sigma + dT
        rho = [0.0] * inst.n
        sbar = []
        run = base
        for i in perm.order:
            sbar.append(run)
            rho[i] = _rho_from_weight(inst.c[i], run, inst.sigma)
            run += inst.c[i]
        return LiftedCoefficients(tuple(rho), tuple(sbar), True)
    if inst.n > ENUMERATION_GUARD:
        raise ValueError(
            "enumeration budget exceeded: n = %d > %d" % (inst.n, ENUMERATION_GUARD)
        )
    return _lift_enumerate(inst, perm.order, T, dT)


def _lift_cardinality(inst: ProblemInstance, order, dT: float) -> LiftedCoefficients:
    base = inst.sigma + dT
    cap = inst.cardinality - 1  # slots left for predecessors
    rho = [0.0] * inst.n
    sbar = [0.0] * inst.n
    heap: list = []  # min-heap of the cap largest predecessor c values
    tot = 0.0
    for k, i in enumerate(order):
        weight = base + tot
        sbar[k] = weight
        rho[i] = _rho_from_weight(inst.c[i], weight, inst.sigma)
        ci = float(inst.c[i])
        if cap > 0:
            if len(heap) < cap:
                heapq.heappush(heap, ci)
                tot += ci
            elif ci > heap[0]:
                tot += ci - heapq.heapreplace(heap, ci)
    return LiftedCoefficients(tuple(rho), tuple(sbar), True)


def _lift_enumerate(inst: ProblemInstance, order, T, dT: float) -> LiftedCoefficients:
    n = inst.n
    count = 1 << n
    bits = ((np.arange(count)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.uint8)
    feas = np.ones(count, dtype=bool)
    if inst.cardinality is not None:
        feas &= bits.sum(axis=1) <= inst.cardinality
    yfix = np.zeros(inst.m)
    for j in T:
        yfix[j] = inst.y_upper[j]
    for row in inst.linear_constraints:
        act = bits @ np.asarray(row.x, dtype=float)
        if inst.m:
            act = act + float(np.dot(row.y, yfix))
        if row.sense == "<=":
            feas &= act <= row.rhs + 1e-9
        elif row.sense == ">=":
            feas &= act >= row.rhs - 1e-9
        else:
            feas &= np.abs(act - row.rhs) <= 1e-9
    base = inst.sigma + dT
    rho = [0.0] * n
    sbar = [0.0] * n
    prefix = np.zeros(count)
    for k, i in enumerate(order):
        mask = feas & (bits[:, i] > 0)
        if not mask.any():
            sbar[k] = _INFEASIBLE
            rho[i] = _rho_from_weight(inst.c[i], _INFEASIBLE, inst.sigma)
        else:
            weight = base + float(prefix[mask].max())
            sbar[k] = weight
            rho[i] = _rho_from_weight(inst.c[i], weight, inst.sigma)
        prefix = prefix + float(inst.c[i]) * bits[:, i]
    return LiftedCoefficients(tuple(rho), tuple(sbar), True)


def lifted_coefficients_lp(
    inst: ProblemInstance, perm, T=(), relaxation: Optional[Sequence] = None
) -> LiftedCoefficients:
    """LP-relaxation lifted coefficients via a warm-started chain of n LPs.

    Position k maximizes  sum_{i<k} c_(i) x_(i) + sum_{j in T} d_j y_j  over
    the polyhedron with x_(k) = 1 (note the linear y term: on the unit box it
    bounds the square from above, so validity is kept at the price of some
    slack).  Consecutive LPs differ in exactly two bounds and one objective
    coefficient, so each re-solve usually takes a handful of pivots.

    `relaxation` is an iterable of LinearRow over (x, y) describing any
    polyhedron containing X; default is the instance's own rows plus its
    cardinality constraint.
    """
    perm = as_permutation(perm)
    if len(perm) != inst.n:
        raise ValueError("permutation length must match n")
    n, m = inst.n, inst.m
    T = tuple(sorted(set(int(j) for j in T)))
    dT = _dT_or_inf(inst, T)
    if math.isinf(dT):
        return LiftedCoefficients(
            rho=(0.0,) * n, sigma_bar=(math.inf,) * n, exact=False
        )
    for j in T:
        # the linear stand-in d_j y_j only dominates d_j y_j^2 on [0, 1]
        if inst.d[j] > 0.0 and inst.y_upper[j] > 1.0 + 1e-12:
            raise ValueError("T variables must be scaled to the unit box")
    if relaxation is not None:
        rows = list(relaxation)
    else:
        rows = list(inst.linear_constraints)
        if inst.cardinality is not None:
            rows.append(
                LinearRow((1.0,) * n, (0.0,) * m, "<=", float(inst.cardinality))
            )

    obj = np.zeros(n + m)
    for j in T:
        obj[n + j] = -float(inst.d[j])  # maximize the linear T mass
    lb = np.zeros(n + m)
    ub = np.concatenate([np.ones(n), np.asarray(inst.y_upper, dtype=float)])
    state = simplex.LpState(obj, lb, ub)
    for r in rows:
        state.add_row(list(r.x) + list(r.y), r.sense, r.rhs)

    rho = [0.0] * n
    sbar = [0.0] * n
    res = None
    for k, i in enumerate(perm.order):
        if k == 0:
            state.set_bound(i, 1.0, 1.0)
            res = state.solve()
        else:
            prev = perm.order[k - 1]
            res = simplex.resolve_after_bound_and_objective_change(
                state,
                bound_changes=[(prev, 0.0, 1.0), (i, 1.0, 1.0)],
                objective_changes=[(prev, -float(inst.c[prev]))],
            )
        if res.status is simplex.LpStatus.INFEASIBLE:
            sbar[k] = _INFEASIBLE
        elif res.status is simplex.LpStatus.UNBOUNDED:
            sbar[k] = math.inf
        else:
            # objective was the negated max; its optimum is always <= 0, so
            # the clamp only strips roundoff
            sbar[k] = max(inst.sigma - res.value, inst.sigma)
        rho[i] = _rho_from_weight(inst.c[i], sbar[k], inst.sigma)
    return LiftedCoefficients(tuple(rho), tuple(sbar), False)


# --------------------------------------------------------------------------
# greedy T search
# --------------------------------------------------------------------------


def greedy_T_cut(
    inst: ProblemInstance,
    pbar: Point,
    builder: Optional[Callable] = None,
) -> Optional[Tuple[CutSurface, float]]:
    """Prefix search for the most violated bounded-T cut at pbar.

    Sorts the box-bounded continuous coordinates by ybar nonincreasing and
    tries T = the first i of them for i = 0..m', keeping the largest relative
    violation; ties go to the smaller T.  builder(perm, T) defaults to the
    plain bounded/rotated cut for the instance's cone; pass a closure over
    lifted coefficients to reuse the search for lifted families.  Returns
    (cut, violation) or None when nothing reaches VIOLATION_TOL.
    """
    xbar = np.asarray(pbar.x, dtype=float)
    order = sorted(range(inst.n), key=lambda i: (-xbar[i], i))
    perm = Permutation(tuple(order))
    bounded = [
        j
        for j in range(inst.m)
        if not math.isinf(inst.y_upper[j]) and inst.d[j] > 0.0
    ]
    bounded.sort(key=lambda j: (-pbar.y[j], j))
    if builder is None:
        if inst.cone is Cone.ROTATED:
            builder = lambda p, S: cut_rotated(inst, p, S)  # noqa: E731
        else:
            builder = lambda p, S: cut_bounded(inst, p, S)  # noqa: E731
    best = None
    best_v = VIOLATION_TOL
    for i in range(len(bounded) + 1):
        cut = builder(perm, tuple(sorted(bounded[:i])))
        v = relative_violation(cut, pbar)
        if v > best_v + 1e-12:
            best, best_v = cut, v
    if best is None:
        return None
    return best, best_v


# --------------------------------------------------------------------------
# single-binary closed forms
# --------------------------------------------------------------------------


def hull2d_g(sigma: float, c: float, d: float, x: float, y: float) -> float:
    """Smallest z with (x, y, z) in the closed convex hull of
    {x in {0,1}, y in [0,1], sigma + c x + d y^2 <= z^2}.

    Two closed-form pieces, split along the segment from (0, sqrt(sigma /
    (sigma+c))) to (1, 1): below it the single square root through the
    chain coefficient; above it a two-point blend that leans on y = 1 at
    the x = 1 endpoint.
    """
    total = sigma + c
    ratio = math.sqrt(sigma / total) if total > 0.0 else 1.0
    if y <= x + (1.0 - x) * ratio:
        base = math.sqrt(sigma) + x * (math.sqrt(total) - math.sqrt(sigma))
        return math.sqrt(base * base + d * y * y)
    return math.sqrt(sigma * (1.0 - x) ** 2 + d * (y - x) ** 2) + x * math.sqrt(
        total + d
    )


def mir_cut_single_binary(sigma: float, c: float, d: Sequence) -> CutSurface:
    """Single-binary rounding cut, written through the scaled pair
    a = sqrt(sigma) + sqrt(sigma+c), b = sqrt(sigma)/a:

        (a((1-2b)x + b))^2 + sum_j d_j y_j^2 <= z^2.

    Algebraically a*b = sqrt(sigma) and a(1-2b) = sqrt(sigma+c)-sqrt(sigma),
    so the row coincides with the one-variable extended cut; tests pin the
    coefficient match to 1e-10.
    """
    if sigma < 0 or c < 0:
        raise ValueError("sigma and c must be nonnegative")
    a = math.sqrt(sigma) + math.sqrt(sigma + c)
    b = (math.sqrt(sigma) / a) if a > 0.0 else 0.0
    const = a * b
    coef = a * (1.0 - 2.0 * b)
    blk = ConeBlock(
        kind=Cone.STANDARD,
        sigma=sigma,
        cx={0: c} if c > 0 else {},
        dy={j: dj for j, dj in enumerate(d) if dj > 0},
    )
    row = AffineForm(const=const, x={0: coef} if coef != 0.0 else {}, s=-1.0)
    return CutSurface(
        kind=CutKind.EXTENDED_LINEAR,
        pi=(coef,),
        constant=const,
        extended_row=row,
        sigma_T=sigma,
        cone=blk,
    )
