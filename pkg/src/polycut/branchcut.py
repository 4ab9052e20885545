"""Branch and bound over the binary variables, with cut loops at the root.

The solver keeps one warm outer-approximation relaxation alive for the whole
search: cut rows accumulate at the root (and, when asked, inside the tree),
moving between nodes only flips variable bounds, and the underlying simplex
restarts from the previous basis.  All cut families produce inequalities that
are valid for the full mixed 0-1 set, never just for a subtree, so rows added
anywhere tighten every node.

Cut families are selected by name in SolverConfig.families:

  eq5   linear rows  f(empty) + pi'x <= s  from the binary head of the
        primary cone (the classic polymatroid inequality);
  eq7   extended rows  f(empty) + pi'x <= s  for the primary cone, standard
        or rotated, which together with the cone on (s, y) encode the
        nonlinear inequality exactly;
  eq8   the same extended rows for every rotated cone block, including the
        auxiliary blocks of multi-cone instances;
  eq9   curved cuts that pull box-bounded continuous variables under the
        root, with a greedy prefix search for the subset;
  eq11  eq7/eq9 surfaces with constraint-aware (lifted) coefficients, which
        dominate the plain ones under a cardinality bound;
  eq12  the bounded-subset family applied to rotated cone blocks.

"none" disables separation.  Separation always scores candidates with
`relative_violation` and keeps one cut per family per round, the most
violated, mirroring how the greedy permutation maximizes violation over the
exponential family.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .cuts import (
    VIOLATION_TOL,
    CutSurface,
    block_cut,
    cut_binary,
    cut_bounded,
    cut_mixed_extended,
    cut_rotated,
    greedy_T_cut,
    lifted_coefficients_exact,
    relative_violation,
)
from .model import (
    Cone,
    Point,
    ProblemInstance,
    SolveReport,
    check_point_feasible,
    objective_value,
)
from .oracle import Unbounded, _extra_cone_lower_bounds, _inner_minimum
from .relax import Relaxation, RelaxStatus
from .submodular import ConcaveOfModularOracle

logger = logging.getLogger("polycut.branchcut")

FAMILIES = ("none", "eq5", "eq7", "eq8", "eq9", "eq11", "eq12")

_INT_TOL = 1e-7           # integrality tolerance on the binaries
_PRUNE_REL = 1e-9         # relative slack when pruning against the incumbent
_OPT_GAP = 1e-6 * 100.0   # egap (percent) below which a run counts as optimal
_NODE_OA_ROUNDS = 60      # refinement cap per node; bounds stay valid early


# --------------------------------------------------------------------------
# configuration and node bookkeeping
# --------------------------------------------------------------------------


@dataclass
class SolverConfig:
    """Search parameters.

    families enables cut separation by name (see module docstring); "none"
    entries are inert.  root_rounds caps the root cut loop.  node_limit and
    time_limit stop the search early, leaving egap > 0.  known_optimum, when
    given, is used as the reference value t_opt in the gap statistics instead
    of the incumbent (useful when comparing arms on the same instance).
    """

    families: tuple = ("none",)
    root_rounds: int = 50
    node_limit: Optional[int] = None
    time_limit: Optional[float] = None
    branching: str = "most-fractional"
    in_tree_cuts: bool = False
    seed: int = 0
    known_optimum: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.families, str):
            self.families = (self.families,)
        self.families = tuple(self.families)
        for fam in self.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown cut family {fam!r}")
        if self.root_rounds < 1:
            raise ValueError("root_rounds must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0.0:
            raise ValueError("time_limit must be positive")
        if self.branching != "most-fractional":
            raise ValueError(f"unknown branching rule {self.branching!r}")

    def active_families(self) -> tuple:
        return tuple(f for f in self.families if f != "none")


@dataclass
class NodeRecord:
    """One subproblem: per-binary fixings (None = free, else 0/1) plus the
    bookkeeping the search needs.  `bound` is filled when the node's
    relaxation is solved; it never drops more than 1e-9 below parent_bound.
    `basis` is a slot for a simplex snapshot — unused while the search runs
    on a single shared relaxation, whose basis is already warm."""

    fixings: tuple
    parent_bound: float
    depth: int
    basis: Optional[object] = None
    bound: float = -math.inf


# --------------------------------------------------------------------------
# separation
# --------------------------------------------------------------------------


def greedy_permutation(xbar) -> tuple:
    """Indices sorted by xbar nonincreasing, ties to the lower index.

    This order maximizes pi'xbar over all permutations of the chain, so the
    returned permutation's cut is violated iff any permutation's cut is.
    """
    return tuple(sorted(range(len(xbar)), key=lambda i: (-xbar[i], i)))


def _rotated_blocks(inst: ProblemInstance) -> list:
    return [
        (k, blk)
        for k, blk in enumerate(inst.all_blocks())
        if blk.kind is Cone.ROTATED
    ]


def _most_violated(cands, pbar: Point) -> Optional[Tuple[CutSurface, float]]:
    best = None
    best_v = VIOLATION_TOL
    for cut in cands:
        v = relative_violation(cut, pbar)
        if v > best_v + 1e-12:
            best, best_v = cut, v
    if best is None:
        return None
    return best, best_v


def separate_family(
    inst: ProblemInstance, family: str, pbar: Point
) -> Optional[Tuple[CutSurface, float]]:
    """Most violated cut of one family at pbar, or None below VIOLATION_TOL."""
    if family == "none":
        return None
    perm = greedy_permutation(pbar.x)

    if family == "eq5":
        # The binary head compares f(x) against the standard cone's own
        # epigraph variable, so it needs a standard primary cone with a
        # dedicated z.
        if (
            not inst.has_primary_cone()
            or inst.cone is not Cone.STANDARD
            or inst.cone_rhs_z is not None
        ):
            return None
        oracle = ConcaveOfModularOracle(
            inst.sigma, tuple(inst.c), root_power=inst.oracle_power
        )
        cut = cut_binary(oracle, perm)
        v = relative_violation(cut, pbar)
        return (cut, v) if v > VIOLATION_TOL else None

    if family == "eq7":
        if not inst.has_primary_cone():
            return None
        if inst.cone is Cone.ROTATED:
            cut = cut_rotated(inst, perm, ())
        else:
            cut = cut_mixed_extended(inst, perm)
        v = relative_violation(cut, pbar)
        return (cut, v) if v > VIOLATION_TOL else None

    if family == "eq8":
        cands = [
            block_cut(blk, perm, (), block_index=k, y_upper=inst.y_upper)
            for k, blk in _rotated_blocks(inst)
        ]
        return _most_violated(cands, pbar)

    if family == "eq9":
        if not inst.has_primary_cone():
            return None
        return greedy_T_cut(inst, pbar)

    if family == "eq11":
        if not inst.has_primary_cone():
            return None
        # Exact lifting enumerates feasible predecessors when general rows
        # are present; past the enumeration guard fall back to plain chains.
        liftable = not inst.linear_constraints or inst.n <= 20

        def build(p, T):
            lifted = lifted_coefficients_exact(inst, p, T) if liftable else None
            if inst.cone is Cone.ROTATED:
                return cut_rotated(inst, p, T, lifted=lifted)
            return cut_bounded(inst, p, T, lifted=lifted)

        return greedy_T_cut(inst, pbar, builder=build)

    if family == "eq12":
        cands = []
        for k, blk in _rotated_blocks(inst):
            coords = [
                j
                for j, dj in blk.dy.items()
                if dj > 0.0 and math.isfinite(inst.y_upper[j])
            ]
            coords.sort(key=lambda j: (-pbar.y[j], j))
            for i in range(len(coords) + 1):
                cands.append(
                    block_cut(
                        blk,
                        perm,
                        tuple(sorted(coords[:i])),
                        block_index=k,
                        y_upper=inst.y_upper,
                    )
                )
        return _most_violated(cands, pbar)

    raise ValueError(f"unknown cut family {family!r}")


def root_cut_loop(
    inst: ProblemInstance,
    config: SolverConfig,
    relaxation: Relaxation,
    deadline: Optional[float] = None,
) -> Tuple[int, float]:
    """Separate-and-resolve at the root until no family finds a violated cut.

    Each round scores every enabled family at the current relaxation point
    and adds the most violated cut per family (relative violation above
    VIOLATION_TOL).  Stops at config.root_rounds.  Returns (cuts added,
    final root bound); the bound is +inf if the relaxation is infeasible.
    """
    res = relaxation.solve(deadline=deadline)
    if res.status is RelaxStatus.INFEASIBLE:
        return 0, math.inf
    bound = res.value
    added = 0
    families = config.active_families()
    if not families:
        return 0, bound
    for round_no in range(config.root_rounds):
        if deadline is not None and time.perf_counter() > deadline:
            break
        if res.point is None:
            break
        batch = []
        for fam in families:
            found = separate_family(inst, fam, res.point)
            if found is not None:
                batch.append(found)
        if not batch:
            break
        for cut, _v in batch:
            relaxation.add_cut(cut)
        added += len(batch)
        res = relaxation.solve(deadline=deadline)
        if res.status is RelaxStatus.INFEASIBLE:
            return added, math.inf
        bound = res.value
        logger.debug(
            "root round %d: %d cuts, bound %.9g", round_no + 1, len(batch), bound
        )
    return added, bound


# --------------------------------------------------------------------------
# incumbents
# --------------------------------------------------------------------------


def _round_binaries(inst: ProblemInstance, xbar) -> tuple:
    """Nearest-binary rounding; a cardinality bound keeps the k largest."""
    xb = [1 if v >= 0.5 else 0 for v in xbar]
    k = inst.cardinality
    if k is not None and sum(xb) > k:
        order = sorted(range(inst.n), key=lambda i: (-xbar[i], i))
        keep = set(order[:k])
        xb = [xb[i] if i in keep else 0 for i in range(inst.n)]
    return tuple(xb)


def _continuous_reopt(
    inst: ProblemInstance, xbits: tuple
) -> Optional[Tuple[float, Point]]:
    """Exact continuous completion of a fixed binary vector.

    Mirrors the closed forms of the enumeration oracle: the standard cone
    (auxiliary blocks allowed when they pin single y coordinates), the
    rotated cone over dedicated (w, z), and the rotated cone with an affine
    x-only W side and no continuous part.  Returns (objective, point), or
    None when no closed form applies or the completion is unbounded.
    """
    X = np.asarray([xbits], dtype=float)
    a = np.asarray(inst.a, dtype=float)
    b = np.asarray(inst.b, dtype=float) if inst.m else np.zeros(0)
    d = np.asarray(inst.d, dtype=float) if inst.m else np.zeros(0)
    ub = np.asarray(inst.y_upper, dtype=float) if inst.m else np.zeros(0)
    base = float(a @ X[0])
    if not inst.has_primary_cone():
        return None
    try:
        if inst.cone is Cone.STANDARD:
            if inst.cone_rhs_z is not None or inst.omega < 0.0:
                return None
            A = np.array([inst.sigma + float(np.dot(inst.c, X[0]))])
            lb = _extra_cone_lower_bounds(inst, X)
            inner, Y, t = _inner_minimum(A, b, d, lb, ub, inst.omega)
            if not math.isfinite(inner[0]):
                return None
            pt = Point.make(xbits, Y[0], z=float(t[0]))
            return base + float(inner[0]), pt
        if inst.extra_cones:
            return None
        if inst.cone_rhs_w is None and inst.cone_rhs_z is None:
            p = inst.omega_w if inst.omega_w is not None else inst.omega
            q = inst.omega
            if p <= 0.0 or q <= 0.0:
                return None
            A = np.array([inst.sigma + float(np.dot(inst.c, X[0]))])
            inner, Y, t = _inner_minimum(
                A, b, d, np.zeros((1, inst.m)), ub, math.sqrt(p * q)
            )
            S = float(t[0])
            pt = Point.make(
                xbits,
                Y[0],
                w=0.5 * S * math.sqrt(q / p),
                z=0.5 * S * math.sqrt(p / q),
            )
            return base + float(inner[0]), pt
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
                return None
            blk = inst.primary_block()
            W = wf.const + sum(cf * xbits[i] for i, cf in wf.x.items())
            lhs = blk.lhs(xbits, ())
            if lhs <= 0.0:
                z = 0.0
            elif W <= 1e-12:
                return None
            else:
                z = lhs / (4.0 * W)
            return base + inst.omega * z, Point.make(
                xbits, (), w=float(W), z=float(z)
            )
        return None
    except (Unbounded, ValueError):
        return None


def incumbent_heuristic(
    inst: ProblemInstance, pbar: Optional[Point]
) -> Optional[Point]:
    """Round pbar.x to binaries (a cardinality bound keeps the k largest),
    re-optimize the continuous part exactly, and verify.  Returns the
    feasible point, or None when no closed completion exists or the rounded
    vector violates a constraint."""
    if pbar is None:
        return None
    xb = _round_binaries(inst, pbar.x)
    got = _continuous_reopt(inst, xb)
    if got is None:
        return None
    _, pt = got
    if not check_point_feasible(inst, pt, tol=1e-7):
        return None
    return pt


# --------------------------------------------------------------------------
# search
# --------------------------------------------------------------------------


def _branch_index(inst: ProblemInstance, xbar) -> int:
    """Most fractional binary; ties by larger c_i, then by lower index."""
    best_key = None
    best_i = 0
    for i, x in enumerate(xbar):
        key = (min(x, 1.0 - x), inst.c[i], -i)
        if best_key is None or key > best_key:
            best_key, best_i = key, i
    return best_i


def solve(
    inst: ProblemInstance,
    config: Optional[SolverConfig] = None,
    node_log: Optional[list] = None,
) -> SolveReport:
    """Best-bound branch and bound with root cut loops.

    Gap statistics, with t_opt = config.known_optimum when given and the
    incumbent otherwise, t_relax the plain relaxation bound, t_root the
    bound after the root cut loop, and t_bb the final proven bound:

        igap = (t_opt - t_relax) / |t_opt| * 100
        rimp = (t_root - t_relax) / (t_opt - t_relax) * 100
        egap = (t_opt - t_bb)    / |t_opt| * 100

    rimp is clamped to [0, 100] (and reads 100 when the relaxation is
    already tight); egap snaps to exactly 0 when it falls below 1e-4, which
    is also the optimality test.  On tree exhaustion the reported bound is
    the incumbent value.  node_log, when given, collects one NodeRecord per
    solved node (for inspection; the search itself does not read it).
    """
    config = config or SolverConfig()
    t_start = time.perf_counter()
    deadline = (
        t_start + config.time_limit if config.time_limit is not None else None
    )

    relaxation = Relaxation(inst)
    res = relaxation.solve(deadline=deadline)
    elapsed = lambda: time.perf_counter() - t_start  # noqa: E731
    if res.status is RelaxStatus.INFEASIBLE:
        return SolveReport(
            igap=0.0, rimp=0.0, egap=0.0, nodes=0, time_s=elapsed(),
            optimal=True, objective=math.inf, best_bound=math.inf,
            relax_value=math.inf, root_value=math.inf, cuts_added=0,
        )
    if res.status is RelaxStatus.UNBOUNDED:
        raise Unbounded("continuous relaxation is unbounded")
    t_relax = res.value

    best_val = math.inf
    best_pt: Optional[Point] = None

    def offer(pt: Optional[Point]) -> None:
        nonlocal best_val, best_pt
        if pt is None:
            return
        val = objective_value(inst, pt)
        if val < best_val - 1e-12:
            best_val, best_pt = val, pt
            logger.debug("incumbent %.9g", val)

    offer(incumbent_heuristic(inst, res.point))

    cuts_added = 0
    t_root = t_relax
    if config.active_families():
        cuts_added, t_root = root_cut_loop(
            inst, config, relaxation, deadline=deadline
        )
        if math.isinf(t_root):
            # valid cuts cannot exclude a feasible mixed 0-1 point, so an
            # infeasible root after the loop proves the instance infeasible
            return SolveReport(
                igap=0.0, rimp=0.0, egap=0.0, nodes=0, time_s=elapsed(),
                optimal=True, objective=math.inf, best_bound=math.inf,
                relax_value=t_relax, root_value=math.inf,
                cuts_added=cuts_added,
            )
        res = relaxation.solve(deadline=deadline)
        offer(incumbent_heuristic(inst, res.point))
    t_root = max(t_root, t_relax)

    n = inst.n
    tie = itertools.count()
    root = NodeRecord(fixings=(None,) * n, parent_bound=t_relax, depth=0)
    heap = [(t_root, next(tie), root)]
    nodes = 0
    exhausted = False

    def prune_slack() -> float:
        if not math.isfinite(best_val):
            return 0.0
        return _PRUNE_REL * max(1.0, abs(best_val))

    while heap:
        if deadline is not None and time.perf_counter() > deadline:
            break
        if config.node_limit is not None and nodes >= config.node_limit:
            break
        bound, _, node = heapq.heappop(heap)
        if bound >= best_val - prune_slack():
            # best-bound order: every remaining node is at least as bad
            exhausted = True
            heap.clear()
            break
        for i in range(n):
            v = node.fixings[i]
            if v is None:
                relaxation.set_x_bounds(i, 0.0, 1.0)
            else:
                relaxation.set_x_bounds(i, float(v), float(v))
        # a node that only proves it is dominated can stop refining its
        # cones the moment the LP value crosses the pruning threshold
        cutoff = (
            best_val - prune_slack() if math.isfinite(best_val) else None
        )
        res = relaxation.solve(
            cutoff=cutoff, max_rounds=_NODE_OA_ROUNDS, deadline=deadline
        )
        nodes += 1
        if res.status is RelaxStatus.INFEASIBLE:
            node.bound = math.inf
            if node_log is not None:
                node_log.append(node)
            continue
        val = res.value
        node.bound = val
        if node_log is not None:
            node_log.append(node)
        if val >= best_val - prune_slack():
            continue
        pbar = res.point

        if config.in_tree_cuts:
            batch = []
            for fam in config.active_families():
                found = separate_family(inst, fam, pbar)
                if found is not None:
                    batch.append(found)
            if batch:
                for cut, _v in batch:
                    relaxation.add_cut(cut)
                cuts_added += len(batch)
                res = relaxation.solve(cutoff=cutoff, max_rounds=_NODE_OA_ROUNDS)
                if res.status is RelaxStatus.INFEASIBLE:
                    continue
                val = res.value
                node.bound = max(node.bound, val)
                pbar = res.point
                if val >= best_val - prune_slack():
                    continue

        frac = max(
            (min(x, 1.0 - x) for x in pbar.x), default=0.0
        )
        if frac <= _INT_TOL:
            # integer-feasible node: take the exact continuous completion
            # when a closed form exists, else trust the converged
            # relaxation point (cone residuals are below the loop's
            # tolerance, far inside every comparison made downstream)
            xb = tuple(int(round(v)) for v in pbar.x)
            got = _continuous_reopt(inst, xb)
            settled = False
            if got is not None:
                rv, rpt = got
                if check_point_feasible(inst, rpt, tol=1e-7):
                    settled = True
                    if rv < best_val - 1e-12:
                        best_val, best_pt = rv, rpt
                        logger.debug("incumbent %.9g (leaf)", rv)
            if not settled and val < best_val - 1e-12:
                best_val, best_pt = val, pbar
                logger.debug("incumbent %.9g (leaf, relaxation point)", val)
            continue

        offer(incumbent_heuristic(inst, pbar))

        i_star = _branch_index(inst, pbar.x)
        for v in (1, 0):
            fix = list(node.fixings)
            fix[i_star] = v
            child = NodeRecord(
                fixings=tuple(fix), parent_bound=val, depth=node.depth + 1
            )
            heapq.heappush(heap, (val, next(tie), child))
    else:
        exhausted = True

    if exhausted:
        final_bound = best_val
    elif heap:
        final_bound = heap[0][0]
    else:
        final_bound = best_val

    t_opt = (
        config.known_optimum if config.known_optimum is not None else best_val
    )
    if math.isfinite(t_opt):
        denom = max(abs(t_opt), 1e-12)
        igap = max(0.0, (t_opt - t_relax) / denom * 100.0)
        gap0 = t_opt - t_relax
        if gap0 <= 1e-12 * max(1.0, abs(t_opt)):
            rimp = 100.0
        else:
            rimp = min(100.0, max(0.0, (t_root - t_relax) / gap0 * 100.0))
        egap = (t_opt - final_bound) / denom * 100.0
        optimal = egap <= _OPT_GAP
        if optimal:
            egap = 0.0
    else:
        # no reference value: the run either proved infeasibility or hit a
        # limit before finding any incumbent
        igap = rimp = 0.0
        optimal = exhausted
        egap = 0.0 if optimal else math.inf

    return SolveReport(
        igap=igap,
        rimp=rimp,
        egap=egap,
        nodes=nodes,
        time_s=elapsed(),
        optimal=optimal,
        objective=best_val,
        best_bound=final_bound,
        relax_value=t_relax,
        root_value=t_root,
        cuts_added=cuts_added,
    )
