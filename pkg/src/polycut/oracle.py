"""Reference computations by exhaustive enumeration and closed forms.

Everything in this module trades speed for trustworthiness: binary parts are
enumerated outright and continuous parts are minimized by stationarity ratios
or golden-section search.  The solver and the cut machinery are tested against
these values, so keep this file free of clever shortcuts.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .model import (
    AffineForm,
    Cone,
    CutSurface,
    Point,
    ProblemInstance,
)

__all__ = [
    "Unbounded",
    "brute_force_optimum",
    "brute_force_fractional",
    "feasible_binaries",
    "hull_reduction_unbounded",
    "hull_reduction_rotated",
    "hull2d_reference",
    "validate_cut",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_ENUM_LIMIT = 20
_BISECT_STEPS = 100


class Unbounded(RuntimeError):
    """The optimal value diverges to -infinity (or the cone weight vanishes)."""


def _binary_matrix(n: int) -> np.ndarray:
    """All 2^n binary vectors as a (2^n, n) float matrix, row i = bits of i."""
    idx = np.arange(1 << n, dtype=np.uint32)
    return ((idx[:, None] >> np.arange(n, dtype=np.uint32)) & 1).astype(float)


def feasible_binaries(inst: ProblemInstance, allow_y_rows: bool = False) -> np.ndarray:
    """Binary x vectors satisfying the cardinality bound and the x-only rows.

    Rows that touch continuous variables are rejected unless allow_y_rows is
    set, in which case they are simply skipped here and must be re-checked by
    the caller at concrete (x, y) points.
    """
    if inst.n > _ENUM_LIMIT:
        raise ValueError(f"enumeration limited to n <= {_ENUM_LIMIT}")
    X = _binary_matrix(inst.n)
    keep = np.ones(len(X), dtype=bool)
    if inst.cardinality is not None:
        keep &= X.sum(axis=1) <= inst.cardinality + 1e-9
    for row in inst.linear_constraints:
        if any(v != 0.0 for v in row.y):
            if allow_y_rows:
                continue
            raise ValueError("rows over continuous variables are not supported here")
        act = X @ np.asarray(row.x, dtype=float)
        if row.sense == "<=":
            keep &= act <= row.rhs + 1e-9
        elif row.sense == ">=":
            keep &= act >= row.rhs - 1e-9
        else:
            keep &= np.abs(act - row.rhs) <= 1e-9
    return X[keep]


def _extra_cone_lower_bounds(inst: ProblemInstance, X: np.ndarray) -> np.ndarray:
    """Per-row lower bounds on y implied by the auxiliary cone blocks.

    Each supported auxiliary block pins a single continuous coordinate from
    below by the norm of affine rows in x:  y_j >= sqrt(sig + cx'x + sum rows^2).
    """
    lb = np.zeros((len(X), inst.m))
    for blk in inst.extra_cones:
        if blk.kind is not Cone.STANDARD or blk.power != 2 or blk.dy:
            raise ValueError("unsupported auxiliary cone for brute force")
        tvars = [j for j, cf in blk.t_form.y.items() if cf != 0.0]
        if (
            len(tvars) != 1
            or blk.t_form.y[tvars[0]] != 1.0
            or blk.t_form.const != 0.0
            or blk.t_form.x
            or blk.t_form.w != 0.0
            or blk.t_form.z != 0.0
        ):
            raise ValueError("auxiliary cone must bound a single y coordinate")
        j = tvars[0]
        mass = np.full(len(X), blk.sigma)
        for i, cf in blk.cx.items():
            mass += cf * X[:, i]
        for row in blk.rows:
            if row.y or row.w != 0.0 or row.z != 0.0 or row.s != 0.0:
                raise ValueError("auxiliary cone rows must be affine in x only")
            val = np.full(len(X), row.const)
            for i, cf in row.x.items():
                val += cf * X[:, i]
            mass += val**2
        lb[:, j] = np.maximum(lb[:, j], np.sqrt(np.maximum(mass, 0.0)))
    return lb


def _inner_minimum(
    A: np.ndarray,
    b: np.ndarray,
    d: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    weight: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized solve of  min_{lb<=y<=ub} b'y + weight*sqrt(A + sum d_j y_j^2).

    Returns (value, y, t) per row of A.  Stationarity gives
    y_j = clip(-b_j t / (weight d_j), lb_j, ub_j) with t the fixed point of
    t = sqrt(A + sum d_j y_j(t)^2); any fixed point is a KKT point of a convex
    problem, so bisection on t is enough.
    """
    K = len(A)
    m = len(b)
    if m == 0:
        t = np.sqrt(np.maximum(A, 0.0))
        return weight * t, np.zeros((K, 0)), t

    cone_mask = d > 0.0
    free_mask = ~cone_mask

    # Coordinates outside the cone are plain linear terms.
    y = np.broadcast_to(lb, (K, m)).copy()
    for j in np.flatnonzero(free_mask):
        if b[j] < 0.0:
            if not math.isfinite(ub[j]):
                raise Unbounded("negative linear cost on an unbounded coordinate")
            y[:, j] = ub[j]

    dj = d[cone_mask]
    bj = b[cone_mask]
    lbj = lb[:, cone_mask]
    ubj = ub[cone_mask]

    if weight < 0.0:
        raise Unbounded("negative cone weight")
    if weight == 0.0:
        for j in np.flatnonzero(cone_mask):
            if b[j] < 0.0:
                if not math.isfinite(ub[j]):
                    raise Unbounded("negative linear cost on an unbounded coordinate")
                y[:, j] = np.maximum(ub[j], lb[:, j])
        t = np.sqrt(np.maximum(A + (y**2) @ d, 0.0))
        return y @ b, y, t

    # Only rewards (negative costs) on unbounded coordinates can drive the
    # objective to -inf; positive costs clip at the lower bound.
    beta = sum(
        (b[j] / weight) ** 2 / d[j]
        for j in np.flatnonzero(cone_mask)
        if not math.isfinite(ub[j]) and b[j] < 0.0
    )
    if beta >= 1.0 - 1e-12:
        raise Unbounded(f"continuous mass ratio {beta:.6f} >= 1")

    ratio = np.where(dj > 0.0, -bj / (weight * dj), 0.0)

    def clipped(t_arr: np.ndarray) -> np.ndarray:
        raw = t_arr[:, None] * ratio[None, :]
        return np.minimum(np.maximum(raw, lbj), ubj)

    def h(t_arr: np.ndarray) -> np.ndarray:
        yj = clipped(t_arr)
        return np.sqrt(np.maximum(A + (yj**2) @ dj, 0.0))

    lo = np.sqrt(np.maximum(A + (lbj**2) @ dj, 0.0))
    # At A == 0 the fixed point t = 0 is spurious whenever the pull of the
    # rewards beats the cone locally; nudge those rows off zero.
    beta_local = float(np.sum(np.where(bj < 0.0, (bj / weight) ** 2 / dj, 0.0)))
    if beta_local > 1.0:
        lo = np.maximum(lo, 1e-30)
    hi = np.maximum(lo, 1.0)
    for _ in range(200):
        bad = h(hi) > hi
        if not bad.any():
            break
        hi = np.where(bad, hi * 2.0, hi)
    else:
        raise Unbounded("no finite fixed point for the continuous minimization")
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        gpos = h(mid) >= mid
        lo = np.where(gpos, mid, lo)
        hi = np.where(gpos, hi, mid)
    t = 0.5 * (lo + hi)
    yj = clipped(t)
    y[:, cone_mask] = yj
    infeasible = np.any(lbj > ubj + 1e-9, axis=1)
    value = y @ b + weight * t
    value = np.where(infeasible, np.inf, value)
    return value, y, t


def brute_force_optimum(inst: ProblemInstance) -> Tuple[float, Point]:
    """Exact optimum by enumerating binary x and closing the continuous part.

    Supports the standard cone (with optional auxiliary blocks pinning single
    y coordinates), the rotated cone over dedicated (w, z) variables, and the
    rotated cone with an affine x-only W side and no continuous variables.
    Raises Unbounded when the continuous rewards dominate the cone weight.
    """
    if inst.n > _ENUM_LIMIT:
        raise ValueError(f"brute force limited to n <= {_ENUM_LIMIT}")
    X = feasible_binaries(inst)
    if len(X) == 0:
        raise ValueError("no feasible binary point")
    a = np.asarray(inst.a, dtype=float)
    b = np.asarray(inst.b, dtype=float) if inst.m else np.zeros(0)
    d = np.asarray(inst.d, dtype=float) if inst.m else np.zeros(0)
    ub = np.asarray(inst.y_upper, dtype=float) if inst.m else np.zeros(0)
    base = X @ a

    if inst.cone is Cone.STANDARD:
        if inst.omega < 0.0:
            raise Unbounded("negative objective weight on the cone variable")
        A = inst.sigma + X @ np.asarray(inst.c, dtype=float)
        lb = _extra_cone_lower_bounds(inst, X)
        inner, Y, t = _inner_minimum(A, b, d, lb, ub, inst.omega)
        total = base + inner
        k = int(np.argmin(total))
        pt = Point.make(X[k], Y[k], z=float(t[k]))
        return float(total[k]), pt

    # Rotated cone.
    if inst.extra_cones:
        raise ValueError("auxiliary cones unsupported with a rotated primary cone")
    blk = inst.primary_block()
    dedicated = inst.cone_rhs_w is None and inst.cone_rhs_z is None
    if dedicated:
        p = inst.omega_w if inst.omega_w is not None else inst.omega
        q = inst.omega
        if p <= 0.0 or q <= 0.0:
            raise Unbounded("rotated objective weights must both be positive")
        weight = math.sqrt(p * q)
        A = inst.sigma + X @ np.asarray(inst.c, dtype=float)
        lb = np.zeros((len(X), inst.m))
        inner, Y, t = _inner_minimum(A, b, d, lb, ub, weight)
        total = base + inner
        k = int(np.argmin(total))
        S = float(t[k])
        wv = 0.5 * S * math.sqrt(q / p)
        zv = 0.5 * S * math.sqrt(p / q)
        return float(total[k]), Point.make(X[k], Y[k], w=wv, z=zv)

    # Affine W in x, plain z variable, no continuous part: z >= lhs / (4 W).
    wf = inst.cone_rhs_w
    if (
        inst.m == 0
        and wf is not None
        and inst.cone_rhs_z is None
        and not wf.y
        and wf.w == 0.0
        and wf.z == 0.0
        and wf.s == 0.0
    ):
        if inst.omega <= 0.0:
            raise Unbounded("objective weight on z must be positive")
        W = np.full(len(X), wf.const)
        for i, cf in wf.x.items():
            W += cf * X[:, i]
        lhs = np.array([blk.lhs(row, ()) for row in X])
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(lhs <= 0.0, 0.0, lhs / (4.0 * W))
        z = np.where((lhs > 0.0) & (W <= 1e-12), np.inf, z)
        total = base + inst.omega * z
        k = int(np.argmin(total))
        if not math.isfinite(total[k]):
            raise ValueError("no binary point keeps the rotated W side positive")
        return float(total[k]), Point.make(X[k], (), w=float(W[k]), z=float(z[k]))

    raise ValueError("unsupported instance structure for brute force")


def brute_force_fractional(
    a0: Sequence[float],
    a: Sequence[Sequence[float]],
    c: Sequence[Sequence[float]],
    cardinality: Optional[int] = None,
) -> Tuple[float, np.ndarray]:
    """Maximize sum_j (c_j'x) / (a0_j + a_j'x) over binary x by enumeration."""
    A = np.asarray(a, dtype=float)
    C = np.asarray(c, dtype=float)
    a0v = np.asarray(a0, dtype=float)
    m, n = A.shape
    if n > _ENUM_LIMIT:
        raise ValueError(f"enumeration limited to n <= {_ENUM_LIMIT}")
    X = _binary_matrix(n)
    if cardinality is not None:
        X = X[X.sum(axis=1) <= cardinality + 1e-9]
    vals = ((X @ C.T) / (a0v[None, :] + X @ A.T)).sum(axis=1)
    k = int(np.argmax(vals))
    return float(vals[k]), X[k]


def _reduced_enumeration(
    a: Sequence[float],
    b: Sequence[float],
    weight: float,
    inst: ProblemInstance,
) -> float:
    """min over feasible binary x of  -a'x + weight*sqrt(1-beta)*sqrt(sigma+c'x),
    with beta the continuous mass ratio sum_j (b_j/weight)^2 / d_j."""
    if weight <= 0.0:
        raise Unbounded("cone weight must be positive")
    beta = 0.0
    for bj, dj in zip(b, inst.d):
        if dj <= 0.0:
            if bj != 0.0:
                raise Unbounded("reward on a coordinate outside the cone")
            continue
        beta += (bj / weight) ** 2 / dj
    if beta >= 1.0 - 1e-12:
        raise Unbounded(f"continuous mass ratio {beta:.6f} >= 1")
    X = feasible_binaries(inst)
    av = np.asarray(a, dtype=float)
    root = np.sqrt(inst.sigma + X @ np.asarray(inst.c, dtype=float))
    vals = -(X @ av) + weight * math.sqrt(1.0 - beta) * root
    return float(vals.min())


def hull_reduction_unbounded(
    a: Sequence[float], b: Sequence[float], r: float, inst: ProblemInstance
) -> float:
    """Value of the unbounded-continuous reduction by binary enumeration.

    The continuous block collapses into a discounted weight on the root:
    min -a'x - b'y + r*z over the cone with y free above becomes
    min -a'x + r*sqrt(1-beta)*sqrt(sigma + c'x).
    """
    return _reduced_enumeration(a, b, r, inst)


def hull_reduction_rotated(
    a: Sequence[float],
    b: Sequence[float],
    p: float,
    q: float,
    inst: ProblemInstance,
) -> float:
    """Rotated-cone analogue: objective p*w + q*z collapses to the geometric
    weight (p+q)/(2*sqrt(1+beta)) = sqrt(p*q) on the root, then the continuous
    block is reduced exactly as in the standard case."""
    if p <= 0.0 or q <= 0.0:
        raise Unbounded("degenerate rotated weights: the cone cost vanishes")
    t = (q - p) / (q + p)
    beta = t * t / (1.0 - t * t)
    weight = (p + q) / (2.0 * math.sqrt(1.0 + beta))
    return _reduced_enumeration(a, b, weight, inst)


def hull2d_reference(
    sigma: float, c: float, d: float, x: float, y: float, tol: float = 1e-6
) -> float:
    """Two-point convexification value for a single binary and one bounded y.

    Minimizes (1-x)*sqrt(sigma + d*y1^2) + x*sqrt(sigma + c + d*y2^2) over
    y1, y2 in [0, 1] with (1-x)*y1 + x*y2 = y, by golden-section search on y1
    (the objective is convex along the constraint line).
    """
    if x <= 0.0:
        return math.sqrt(sigma + d * y * y)
    if x >= 1.0:
        return math.sqrt(sigma + c + d * y * y)

    def phi(y1: float) -> float:
        y2 = (y - (1.0 - x) * y1) / x
        return (1.0 - x) * math.sqrt(sigma + d * y1 * y1) + x * math.sqrt(
            sigma + c + d * y2 * y2
        )

    lo = max(0.0, (y - x) / (1.0 - x))
    hi = min(1.0, y / (1.0 - x))
    if hi <= lo:
        return phi(lo)
    m1 = hi - _GOLDEN * (hi - lo)
    m2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = phi(m1), phi(m2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, m2, f2 = m2, m1, f1
            m1 = hi - _GOLDEN * (hi - lo)
            f1 = phi(m1)
        else:
            lo, m1, f1 = m1, m2, f2
            m2 = lo + _GOLDEN * (hi - lo)
            f2 = phi(m2)
    return phi(0.5 * (lo + hi))


def _y_grid(inst: ProblemInstance, points: int = 5) -> np.ndarray:
    """Product grid over the continuous box (unbounded coordinates capped)."""
    if inst.m == 0:
        return np.zeros((1, 0))
    axes = []
    for u in inst.y_upper:
        cap = u if (u is not None and math.isfinite(u)) else 4.0
        axes.append(np.linspace(0.0, cap, points))
    if points**inst.m <= 20000:
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)
    # One-at-a-time sweeps plus the all-upper corner.
    rows = [np.zeros(inst.m)]
    for j, ax in enumerate(axes):
        for v in ax[1:]:
            row = np.zeros(inst.m)
            row[j] = v
            rows.append(row)
    rows.append(np.array([ax[-1] for ax in axes]))
    return np.array(rows)


def validate_cut(
    inst: ProblemInstance,
    cut: Union[CutSurface, Callable[[np.ndarray, np.ndarray], float]],
    tol: float = 1e-8,
) -> bool:
    """True iff the cut never exceeds its cone root over the enumerated
    feasible binaries with continuous values on a per-coordinate grid.

    A callable is treated as a pointwise lower-bound surface f(x, y) on the
    root sqrt(sigma + c'x + sum d_j y_j^2) of the primary cone.
    """
    if inst.n > 12:
        raise ValueError("cut validation limited to n <= 12")
    X = feasible_binaries(inst, allow_y_rows=True)
    G = _y_grid(inst)
    y_rows = [r for r in inst.linear_constraints if any(v != 0.0 for v in r.y)]

    if callable(cut):
        blk = inst.primary_block()
        for xrow in X:
            for grow in G:
                if any(r.slack(xrow, grow) < -1e-9 for r in y_rows):
                    continue
                root = math.sqrt(max(blk.lhs(xrow, grow), 0.0))
                if cut(xrow, grow) > root + tol:
                    return False
        return True

    blk = cut.cone if cut.cone is not None else inst.all_blocks()[cut.block]
    pi = np.zeros(inst.n)
    for i, v in enumerate(cut.pi):
        pi[i] = v
    lin = X @ pi

    if blk.power == 4:
        base = np.zeros(len(X))
        for i, cf in blk.cx.items():
            base += cf * X[:, i]
        fvals = cut.constant + lin
        roots = 2.0 * np.maximum(base, 0.0) ** 0.25
        return bool(np.all(fvals <= roots + tol))

    Tset = set(cut.T)
    inner2 = np.full(len(G), blk.sigma)
    rest2 = np.zeros(len(G))
    for j, dj in blk.dy.items():
        if j in Tset:
            inner2 += dj * G[:, j] ** 2
        else:
            rest2 += dj * G[:, j] ** 2
    inner = np.sqrt(np.maximum(inner2, 0.0))

    mass = np.full(len(X), blk.sigma)
    for i, cf in blk.cx.items():
        mass += cf * X[:, i]
    for row in blk.rows:
        val = np.full(len(X), row.const)
        for i, cf in row.x.items():
            val += cf * X[:, i]
        if row.y or row.w != 0.0 or row.z != 0.0 or row.s != 0.0:
            raise ValueError("cone rows must be affine in x only")
        mass += val**2
    dy_all = np.zeros(len(G))
    for j, dj in blk.dy.items():
        dy_all += dj * G[:, j] ** 2

    f = np.sqrt(
        (inner[None, :] + lin[:, None]) ** 2 + rest2[None, :]
    )
    root = np.sqrt(np.maximum(mass[:, None] + dy_all[None, :], 0.0))
    ok = f <= root + tol
    if y_rows and not ok.all():
        # Violations only count at jointly feasible (x, y) pairs.
        bad = np.argwhere(~ok)
        for ax, gy in bad:
            if all(r.slack(X[ax], G[gy]) >= -1e-9 for r in y_rows):
                return False
        return True
    return bool(ok.all())
