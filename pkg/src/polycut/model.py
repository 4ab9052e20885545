"""Problem data model shared by every other module.

The central object is a conic quadratic mixed 0-1 minimization problem

    min  a'x + b'y + omega_w*w + omega*z
    s.t. sigma + sum_i c_i x_i + sum_j d_j y_j^2  <=  z^2          (standard)
         sigma + sum_i c_i x_i + sum_j d_j y_j^2  <=  4*w*z        (rotated)
         linear constraints over (x, y),   x in {0,1}^n,  0 <= y <= y_upper,
         optionally sum_i x_i <= k (cardinality).

Instances may carry additional cone blocks (`extra_cones`) whose right-hand
sides are affine in (x, y, w, z); these cover factor-risk residual cones,
robust-counterpart scenario blocks, and per-ratio-term rotated blocks.  All
continuous auxiliary quantities of such formulations live inside the y vector,
so "y" really means "the continuous variables".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

# Absolute tolerances used for feasibility checks throughout the package.
FEAS_TOL = 1e-6     # cone residual + linear constraint slack
INT_TOL = 1e-6      # distance of a binary variable from {0, 1}

UNBOUNDED = math.inf


class Cone(Enum):
    STANDARD = "standard"
    ROTATED = "rotated"


class CutKind(Enum):
    BINARY_POLYMATROID = "binary_polymatroid"
    EXTENDED_LINEAR = "extended_linear"
    GRADIENT_CUT = "gradient_cut"
    ROTATED_GRADIENT_CUT = "rotated_gradient_cut"


@dataclass(frozen=True)
class AffineForm:
    """const + fx'x + fy'y + fw*w + fz*z + fs*s, sparse over x and y.

    The s slot refers to the auxiliary epigraph scalar of whatever cone block
    the form is attached to (extended-formulation rows live in (x, s) space).
    """

    const: float = 0.0
    x: dict = field(default_factory=dict)
    y: dict = field(default_factory=dict)
    w: float = 0.0
    z: float = 0.0
    s: float = 0.0

    def value(self, xv, yv, wv=0.0, zv=0.0, sv=0.0) -> float:
        t = self.const + self.w * wv + self.z * zv + self.s * sv
        for i, coef in self.x.items():
            t += coef * xv[i]
        for j, coef in self.y.items():
            t += coef * yv[j]
        return t

    def to_json(self):
        return {
            "const": self.const,
            "x": {str(i): v for i, v in self.x.items()},
            "y": {str(j): v for j, v in self.y.items()},
            "w": self.w,
            "z": self.z,
            "s": self.s,
        }

    @staticmethod
    def from_json(obj) -> "AffineForm":
        return AffineForm(
            const=float(obj.get("const", 0.0)),
            x={int(i): float(v) for i, v in obj.get("x", {}).items()},
            y={int(j): float(v) for j, v in obj.get("y", {}).items()},
            w=float(obj.get("w", 0.0)),
            z=float(obj.get("z", 0.0)),
            s=float(obj.get("s", 0.0)),
        )


# Affine forms for the dedicated epigraph variables.
W_VAR = AffineForm(w=1.0)
Z_VAR = AffineForm(z=1.0)


@dataclass(frozen=True)
class ConeBlock:
    """One second-order-cone constraint of an instance.

    standard:  sigma + sum cx_i x_i + sum dy_j y_j^2 + sum_r row_r(x,y)^2 <= t^2
    rotated:   same left-hand side <= 4*W*Z

    with t (resp. W, Z) affine in (x, y, w, z).  `power = 4` marks the
    fourth-root oracle block used by the Sharpe-ratio reformulation, where the
    binary part contributes (2*(cx'x)^(1/4))^2 instead of cx'x; it never
    carries dy or rows.
    """

    kind: Cone = Cone.STANDARD
    sigma: float = 0.0
    cx: dict = field(default_factory=dict)      # {x index: coefficient >= 0}
    dy: dict = field(default_factory=dict)      # {y index: coefficient >= 0}
    rows: tuple = ()                            # affine rows inside the norm
    t_form: AffineForm = Z_VAR                  # standard rhs slot
    w_form: AffineForm = W_VAR                  # rotated rhs slots
    z_form: AffineForm = Z_VAR
    power: int = 2

    def lhs(self, xv, yv) -> float:
        """sigma + cx'x + sum dy_j y_j^2 + sum rows^2 at a point (binary x)."""
        if self.power == 4:
            base = sum(coef * xv[i] for i, coef in self.cx.items())
            t = 4.0 * math.sqrt(base) if base > 0 else 0.0
        else:
            t = self.sigma + sum(coef * xv[i] for i, coef in self.cx.items())
        for j, coef in self.dy.items():
            t += coef * yv[j] ** 2
        for r in self.rows:
            t += r.value(xv, yv) ** 2
        return t

    def residual(self, xv, yv, wv=0.0, zv=0.0) -> float:
        """lhs - rhs; feasible iff <= 0 (given the rhs slots nonnegative)."""
        if self.kind is Cone.STANDARD:
            return self.lhs(xv, yv) - self.t_form.value(xv, yv, wv, zv) ** 2
        wval = self.w_form.value(xv, yv, wv, zv)
        zval = self.z_form.value(xv, yv, wv, zv)
        return self.lhs(xv, yv) - 4.0 * wval * zval

    def to_json(self):
        obj = {
            "kind": self.kind.value,
            "sigma": self.sigma,
            "cx": {str(i): v for i, v in self.cx.items()},
            "dy": {str(j): v for j, v in self.dy.items()},
            "rows": [r.to_json() for r in self.rows],
            "power": self.power,
        }
        if self.kind is Cone.STANDARD:
            obj["t"] = self.t_form.to_json()
        else:
            obj["w"] = self.w_form.to_json()
            obj["z"] = self.z_form.to_json()
        return obj

    @staticmethod
    def from_json(obj) -> "ConeBlock":
        kind = Cone(obj.get("kind", "standard"))
        kw = dict(
            kind=kind,
            sigma=float(obj.get("sigma", 0.0)),
            cx={int(i): float(v) for i, v in obj.get("cx", {}).items()},
            dy={int(j): float(v) for j, v in obj.get("dy", {}).items()},
            rows=tuple(AffineForm.from_json(r) for r in obj.get("rows", [])),
            power=int(obj.get("power", 2)),
        )
        if kind is Cone.STANDARD:
            if "t" in obj:
                kw["t_form"] = AffineForm.from_json(obj["t"])
        else:
            if "w" in obj:
                kw["w_form"] = AffineForm.from_json(obj["w"])
            if "z" in obj:
                kw["z_form"] = AffineForm.from_json(obj["z"])
        return ConeBlock(**kw)


@dataclass(frozen=True)
class LinearRow:
    """row_x'x + row_y'y  (sense)  rhs, with sense in {<=, >=, ==}."""

    x: tuple
    y: tuple
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "=="):
            raise ValueError("sense must be one of <=, >=, ==")

    def slack(self, xv, yv) -> float:
        """Positive when satisfied: rhs-activity for <=, activity-rhs for >=,
        -|activity-rhs| for ==."""
        act = float(np.dot(self.x, xv) + (np.dot(self.y, yv) if len(self.y) else 0.0))
        if self.sense == "<=":
            return self.rhs - act
        if self.sense == ">=":
            return act - self.rhs
        return -abs(act - self.rhs)


@dataclass(frozen=True)
class ProblemInstance:
    n: int
    m: int
    sigma: float
    c: tuple
    d: tuple
    a: tuple
    b: tuple
    omega: float
    y_upper: tuple
    linear_constraints: tuple = ()
    cone: Cone = Cone.STANDARD
    cardinality: Optional[int] = None
    meta: dict = field(default_factory=dict)
    # Extensions beyond the single-cone core (defaults keep plain instances plain).
    extra_cones: tuple = ()
    cone_rhs_w: Optional[AffineForm] = None   # rotated primary: affine W slot
    cone_rhs_z: Optional[AffineForm] = None   # affine Z / t slot
    omega_w: Optional[float] = None           # objective weight on dedicated w
    oracle_power: int = 2

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if len(self.c) != self.n or len(self.a) != self.n:
            raise ValueError("c and a must have length n")
        if len(self.d) != self.m or len(self.b) != self.m or len(self.y_upper) != self.m:
            raise ValueError("d, b, y_upper must have length m")
        if any(ci < 0 for ci in self.c) or any(di < 0 for di in self.d):
            raise ValueError("c and d must be nonnegative")
        if any(not (u > 0) for u in self.y_upper):
            raise ValueError("y_upper entries must be positive (inf = unbounded)")
        if self.cardinality is not None and not (1 <= self.cardinality <= self.n):
            raise ValueError("cardinality must satisfy 1 <= k <= n")
        if self.oracle_power not in (2, 4):
            raise ValueError("oracle_power must be 2 or 4")

    # -- structure ---------------------------------------------------------

    def has_primary_cone(self) -> bool:
        return self.sigma > 0 or any(ci > 0 for ci in self.c) or any(di > 0 for di in self.d)

    def uses_z_var(self) -> bool:
        """A dedicated z variable exists iff the primary cone does and its
        z-slot is either the variable itself or an affine form mentioning it
        (e.g. z/2 in a rotated rewrite)."""
        if not self.has_primary_cone():
            return False
        return self.cone_rhs_z is None or self.cone_rhs_z.z != 0.0

    def uses_w_var(self) -> bool:
        if self.cone is not Cone.ROTATED or not self.has_primary_cone():
            return False
        return self.cone_rhs_w is None or self.cone_rhs_w.w != 0.0

    def primary_block(self) -> Optional[ConeBlock]:
        if not self.has_primary_cone():
            return None
        cx = {i: ci for i, ci in enumerate(self.c) if ci > 0}
        dy = {j: dj for j, dj in enumerate(self.d) if dj > 0}
        if self.cone is Cone.STANDARD:
            return ConeBlock(
                kind=Cone.STANDARD, sigma=self.sigma, cx=cx, dy=dy,
                t_form=self.cone_rhs_z or Z_VAR, power=self.oracle_power,
            )
        return ConeBlock(
            kind=Cone.ROTATED, sigma=self.sigma, cx=cx, dy=dy,
            w_form=self.cone_rhs_w or W_VAR,
            z_form=self.cone_rhs_z or Z_VAR,
            power=self.oracle_power,
        )

    def all_blocks(self) -> tuple:
        pb = self.primary_block()
        return ((pb,) if pb is not None else ()) + tuple(self.extra_cones)

    # -- normalization -----------------------------------------------------

    def normalize_bounds(self) -> "ProblemInstance":
        """Rescale every finitely bounded continuous variable to [0, 1].

        y_j = u_j * y'_j turns d_j y_j^2 into (d_j u_j^2) y'_j^2; objective and
        linear-constraint coefficients pick up a factor u_j.  The original
        scales are stored in meta["y_scale"].  Instances whose finite bounds
        are already 1 are returned unchanged.
        """
        if all(u == 1.0 or math.isinf(u) for u in self.y_upper):
            return self
        scale = [1.0 if math.isinf(u) else float(u) for u in self.y_upper]
        d = tuple(dj * s * s for dj, s in zip(self.d, scale))
        b = tuple(bj * s for bj, s in zip(self.b, scale))
        y_upper = tuple(UNBOUNDED if math.isinf(u) else 1.0 for u in self.y_upper)
        cons = tuple(
            LinearRow(r.x, tuple(cy * s for cy, s in zip(r.y, scale)), r.sense, r.rhs)
            for r in self.linear_constraints
        )

        def scale_form(f: AffineForm) -> AffineForm:
            return replace(f, y={j: v * scale[j] for j, v in f.y.items()})

        extra = tuple(
            replace(
                blk,
                dy={j: v * scale[j] ** 2 for j, v in blk.dy.items()},
                rows=tuple(scale_form(r) for r in blk.rows),
                t_form=scale_form(blk.t_form),
                w_form=scale_form(blk.w_form),
                z_form=scale_form(blk.z_form),
            )
            for blk in self.extra_cones
        )
        meta = dict(self.meta)
        meta["y_scale"] = scale
        return replace(
            self, d=d, b=b, y_upper=y_upper, linear_constraints=cons,
            extra_cones=extra, meta=meta,
            cone_rhs_w=scale_form(self.cone_rhs_w) if self.cone_rhs_w else None,
            cone_rhs_z=scale_form(self.cone_rhs_z) if self.cone_rhs_z else None,
        )

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        obj = {
            "n": self.n,
            "m": self.m,
            "sigma": self.sigma,
            "c": list(self.c),
            "d": list(self.d),
            "a": list(self.a),
            "b": list(self.b),
            "omega": self.omega,
            "y_upper": [None if math.isinf(u) else u for u in self.y_upper],
            "constraints": [
                {"x": list(r.x), "y": list(r.y), "sense": r.sense, "rhs": r.rhs}
                for r in self.linear_constraints
            ],
            "cone": self.cone.value,
            "cardinality": self.cardinality,
            "meta": self.meta,
        }
        if self.extra_cones:
            obj["extra_cones"] = [blk.to_json() for blk in self.extra_cones]
        if self.cone_rhs_w is not None:
            obj["cone_rhs_w"] = self.cone_rhs_w.to_json()
        if self.cone_rhs_z is not None:
            obj["cone_rhs_z"] = self.cone_rhs_z.to_json()
        if self.omega_w is not None:
            obj["omega_w"] = self.omega_w
        if self.oracle_power != 2:
            obj["oracle_power"] = self.oracle_power
        return obj

    @staticmethod
    def from_json(obj: dict) -> "ProblemInstance":
        inst = ProblemInstance(
            n=int(obj["n"]),
            m=int(obj["m"]),
            sigma=float(obj["sigma"]),
            c=tuple(float(v) for v in obj["c"]),
            d=tuple(float(v) for v in obj["d"]),
            a=tuple(float(v) for v in obj["a"]),
            b=tuple(float(v) for v in obj["b"]),
            omega=float(obj["omega"]),
            y_upper=tuple(UNBOUNDED if u is None else float(u) for u in obj["y_upper"]),
            linear_constraints=tuple(
                LinearRow(
                    tuple(float(v) for v in r["x"]),
                    tuple(float(v) for v in r["y"]),
                    r["sense"],
                    float(r["rhs"]),
                )
                for r in obj.get("constraints", [])
            ),
            cone=Cone(obj.get("cone", "standard")),
            cardinality=obj.get("cardinality"),
            meta=obj.get("meta", {}),
            extra_cones=tuple(ConeBlock.from_json(b) for b in obj.get("extra_cones", [])),
            cone_rhs_w=AffineForm.from_json(obj["cone_rhs_w"]) if "cone_rhs_w" in obj else None,
            cone_rhs_z=AffineForm.from_json(obj["cone_rhs_z"]) if "cone_rhs_z" in obj else None,
            omega_w=obj.get("omega_w"),
            oracle_power=int(obj.get("oracle_power", 2)),
        )
        return inst.normalize_bounds()

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @staticmethod
    def load(path) -> "ProblemInstance":
        with open(path) as fh:
            return ProblemInstance.from_json(json.load(fh))


@dataclass(frozen=True)
class Point:
    """A candidate assignment. s/w/z are the auxiliary scalars of the primary
    cone's extended and rotated forms; absent slots are None."""

    x: tuple
    y: tuple
    s: Optional[float] = None
    w: Optional[float] = None
    z: Optional[float] = None

    @staticmethod
    def make(x: Sequence, y: Sequence = (), s=None, w=None, z=None) -> "Point":
        return Point(tuple(float(v) for v in x), tuple(float(v) for v in y), s, w, z)


@dataclass(frozen=True)
class CutSurface:
    """A valid inequality for an instance.

    Linear members are rows over (x, y, s, w, z); nonlinear members carry the
    data needed to produce supporting (gradient) rows on demand.  `block`
    indexes into instance.all_blocks() — the cone whose epigraph the cut
    strengthens.
    """

    kind: CutKind
    pi: tuple                       # coefficients over x
    constant: float                 # sqrt(sigma + d(T)) style offset
    T: tuple = ()                   # subset of continuous indices at bound
    linearization_point: Optional[Point] = None
    extended_row: Optional[AffineForm] = None
    block: int = 0
    sigma_T: float = 0.0            # sigma + sum_{j in T} d_j u_j^2 (internal)
    rho_like: bool = False          # True when pi came from lifting
    cone: Optional[ConeBlock] = None  # data of the block the cut strengthens


@dataclass
class SolveReport:
    igap: float
    rimp: float
    egap: float
    nodes: int
    time_s: float
    optimal: bool
    objective: float
    best_bound: float
    relax_value: float = math.nan
    root_value: float = math.nan
    cuts_added: int = 0


def evaluate_cone_lhs(inst: ProblemInstance, p: Point) -> float:
    """Primary-cone value at p.

    Standard cone: returns sigma + c'x + sum d_j y_j^2 (compare with z^2).
    Rotated cone: returns the residual sigma + c'x + sum d_j y_j^2 - 4wz.
    """
    if len(p.x) != inst.n or len(p.y) != inst.m:
        raise ValueError("point dimensions do not match the instance")
    lhs = inst.sigma
    lhs += sum(ci * xi for ci, xi in zip(inst.c, p.x))
    lhs += sum(dj * yj * yj for dj, yj in zip(inst.d, p.y))
    if inst.cone is Cone.STANDARD:
        return lhs
    wv = p.w if p.w is not None else 0.0
    zv = p.z if p.z is not None else 0.0
    if inst.cone_rhs_w is not None:
        wv = inst.cone_rhs_w.value(p.x, p.y, wv, zv)
    if inst.cone_rhs_z is not None:
        zv = inst.cone_rhs_z.value(p.x, p.y, p.w or 0.0, p.z or 0.0)
    return lhs - 4.0 * wv * zv


def check_point_feasible(inst: ProblemInstance, p: Point, tol: float = FEAS_TOL) -> bool:
    """True iff p satisfies the cone(s), linear rows, bounds, integrality and
    cardinality, everything within an absolute tolerance."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if len(p.x) != inst.n or len(p.y) != inst.m:
        return False
    for xi in p.x:
        if min(abs(xi), abs(xi - 1.0)) > tol:
            return False
    for yj, uj in zip(p.y, inst.y_upper):
        if yj < -tol or yj > uj + tol:
            return False
    if inst.cardinality is not None and sum(round(xi) for xi in p.x) > inst.cardinality:
        return False
    for row in inst.linear_constraints:
        if row.slack(p.x, p.y) < -tol:
            return False
    if inst.has_primary_cone():
        if inst.cone is Cone.STANDARD:
            zv = p.z
            if inst.cone_rhs_z is not None:
                zv = inst.cone_rhs_z.value(p.x, p.y, p.w or 0.0, p.z or 0.0)
            if zv is None or zv < -tol:
                return False
            if evaluate_cone_lhs(inst, p) - zv * zv > tol:
                return False
        else:
            if evaluate_cone_lhs(inst, p) > tol:
                return False
    wv = p.w if p.w is not None else 0.0
    zv = p.z if p.z is not None else 0.0
    for blk in inst.extra_cones:
        if blk.residual(p.x, p.y, wv, zv) > tol:
            return False
    return True


def objective_value(inst: ProblemInstance, p: Point) -> float:
    val = float(np.dot(inst.a, p.x))
    if inst.m:
        val += float(np.dot(inst.b, p.y))
    if p.z is not None and inst.uses_z_var():
        val += inst.omega * p.z
    if p.w is not None and inst.uses_w_var():
        val += (inst.omega_w if inst.omega_w is not None else inst.omega) * p.w
    return val
