"""Tests for every cut family, the lifting paths, the gradient rows and the
two-variable hull pieces."""

import itertools
import math

import numpy as np
import pytest

from polycut import cuts, oracle
from polycut.cuts import (
    DegeneratePoint,
    LiftedCoefficients,
    cut_binary,
    cut_bounded,
    cut_mixed_extended,
    cut_rotated,
    cut_violation,
    gradient_linearize,
    greedy_T_cut,
    hull2d_g,
    lifted_coefficients_exact,
    lifted_coefficients_lp,
    mir_cut_single_binary,
    relative_violation,
)
from polycut.model import (
    AffineForm,
    Cone,
    CutKind,
    LinearRow,
    Point,
    ProblemInstance,
)
from polycut.submodular import ConcaveOfModularOracle, Permutation

INF = math.inf
SQ3 = math.sqrt(3.0)


def _inst(n, m, sigma, c, d, y_upper=None, **kw):
    return ProblemInstance(
        n=n, m=m, sigma=sigma, c=tuple(c), d=tuple(d),
        a=(0.0,) * n, b=(0.0,) * m, omega=1.0,
        y_upper=tuple(y_upper) if y_upper is not None else (1.0,) * m, **kw,
    )


def _f(cut, x, y):
    """Cut left-hand side sqrt((inner + pi'x)^2 + rest)."""
    inner, linear, rest2 = cuts._f_parts(cut, x, y)
    return math.sqrt((inner + linear) ** 2 + rest2)


# ---------------------------------------------------------------------------
# plain polymatroid cuts
# ---------------------------------------------------------------------------


def test_cut_binary_two_elements():
    f = ConcaveOfModularOracle(0.0, (4.0, 5.0))
    cut = cut_binary(f, Permutation((0, 1)))
    assert cut.pi == pytest.approx((2.0, 1.0))
    assert cut.constant == 0.0
    # tight at the chain prefix (1,0): 2 <= sqrt(4)
    assert _f(cut, [1.0, 0.0], []) == pytest.approx(2.0)


def test_cut_binary_single_element_with_sigma():
    f = ConcaveOfModularOracle(1.0, (2.0,))
    cut = cut_binary(f, Permutation((0,)))
    assert cut.constant == pytest.approx(1.0)
    assert cut.pi[0] == pytest.approx(SQ3 - 1.0)


def test_cut_binary_zero_c():
    f = ConcaveOfModularOracle(2.25, (0.0, 0.0))
    cut = cut_binary(f, Permutation((0, 1)))
    assert cut.constant == pytest.approx(1.5)
    assert cut.pi == pytest.approx((0.0, 0.0))


def test_cut_mixed_extended_row_and_composition():
    inst = _inst(2, 1, 0.0, (4.0, 5.0), (1.0,))
    cut = cut_mixed_extended(inst, Permutation((0, 1)))
    assert cut.kind is CutKind.EXTENDED_LINEAR
    row = cut.extended_row
    assert row.s == -1.0 and row.const == 0.0
    assert row.x == {0: 2.0, 1: 1.0}
    # composed form: (2x1 + x2)^2 + y^2 <= z^2, tight on the cone at (1,1)
    for yv in (0.0, 0.4, 1.0):
        z = math.sqrt(9.0 + yv * yv)
        p = Point.make([1, 1], [yv], z=z)
        assert cut_violation(cut, p) == pytest.approx(0.0, abs=1e-12)


def test_cut_mixed_extended_reduces_to_binary_when_m0():
    inst = _inst(2, 0, 0.25, (1.0, 3.0), ())
    cut = cut_mixed_extended(inst, Permutation((1, 0)))
    ref = cut_binary(ConcaveOfModularOracle(0.25, (1.0, 3.0)), Permutation((1, 0)))
    assert cut.pi == pytest.approx(ref.pi)
    assert cut.constant == pytest.approx(ref.constant)


def test_cut_bounded_example_g3():
    inst = _inst(1, 1, 1.0, (2.0,), (1.0,))
    cut = cut_bounded(inst, Permutation((0,)), T=(0,))
    assert cut.pi[0] == pytest.approx(2.0 - math.sqrt(2.0))
    assert cut.constant == pytest.approx(math.sqrt(2.0))
    assert _f(cut, [0.5], [0.5]) == pytest.approx(1.4109272075633474, rel=1e-12)
    # the paper-style display: sqrt(1+y^2) + (2-sqrt 2) x <= z
    assert _f(cut, [1.0], [1.0]) == pytest.approx(math.sqrt(2.0) + 2.0 - math.sqrt(2.0))


def test_cut_bounded_T_empty_is_extended():
    inst = _inst(2, 2, 0.5, (1.0, 2.0), (1.0, 0.5))
    cut0 = cut_bounded(inst, Permutation((0, 1)), T=())
    ref = cut_mixed_extended(inst, Permutation((0, 1)))
    assert cut0.kind is CutKind.EXTENDED_LINEAR
    assert cut0.pi == pytest.approx(ref.pi)


def test_cut_bounded_rejects_unbounded_T():
    inst = _inst(1, 1, 1.0, (2.0,), (1.0,), y_upper=(INF,))
    with pytest.raises(ValueError):
        cut_bounded(inst, Permutation((0,)), T=(0,))


def test_eq9_dominates_eq6_pointwise():
    # same permutation, same T: the full form adds the leftover mass
    # sum_{M\T} d y^2 under the root, so its lhs is pointwise >=
    rng = np.random.default_rng(21)
    for _ in range(30):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        inst = _inst(n, m, float(rng.uniform(0, 2)),
                     rng.uniform(0, 3, n), rng.uniform(0.1, 2, m))
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        k = int(rng.integers(0, m + 1))
        T = tuple(sorted(rng.permutation(m)[:k].tolist()))
        cut = cut_bounded(inst, perm, T)
        for _ in range(20):
            x = rng.integers(0, 2, n).astype(float)
            y = rng.uniform(0, 1, m)
            lhs9 = _f(cut, x, y)
            inner = math.sqrt(inst.sigma + sum(inst.d[j] * y[j] ** 2 for j in T))
            lhs6 = inner + float(np.dot(cut.pi, x))
            rest = sum(inst.d[j] * y[j] ** 2 for j in range(m) if j not in T)
            assert lhs9 >= lhs6 - 1e-12
            assert lhs9**2 - lhs6**2 == pytest.approx(rest, abs=1e-9)


# ---------------------------------------------------------------------------
# gradient linearization
# ---------------------------------------------------------------------------


def test_gradient_example_coefficients():
    inst = _inst(1, 1, 1.0, (2.0,), (1.0,))
    cut = cut_bounded(inst, Permutation((0,)), T=(0,))
    pbar = Point.make([0.5], [0.5])
    row = gradient_linearize(cut, pbar)
    pi = 2.0 - math.sqrt(2.0)
    eta = math.sqrt(1.0 + 0.25) + pi * 0.5
    zeta = eta / math.sqrt(1.25)
    psi = eta  # T = M, nothing left outside the root
    assert eta == pytest.approx(1.410927, abs=1e-6)
    assert zeta == pytest.approx(1.261971, abs=1e-6)
    assert row.x[0] == pytest.approx(eta * pi / psi)
    assert row.y[0] == pytest.approx(zeta * 1.0 * 0.5 / psi)
    assert row.z == -1.0
    # tangency: row value is zero at the linearization point on the surface
    zval = _f(cut, [0.5], [0.5])
    assert row.value([0.5], [0.5], zv=zval) == pytest.approx(0.0, abs=1e-12)
    assert zval == pytest.approx(psi)


def test_gradient_at_zero_y_recovers_linear_cut():
    inst = _inst(2, 1, 1.0, (2.0, 1.0), (1.0,))
    cut = cut_bounded(inst, Permutation((0, 1)), T=())
    row = gradient_linearize(cut, Point.make([0.3, 0.7], [0.0]))
    assert row.const == pytest.approx(1.0)  # sqrt(sigma)
    assert row.x[0] == pytest.approx(cut.pi[0])
    assert row.x[1] == pytest.approx(cut.pi[1])
    assert row.y.get(0, 0.0) == pytest.approx(0.0)
    assert row.z == -1.0


def test_gradient_soundness_random():
    # underestimates the cut surface everywhere; exact at the point; matches
    # central finite differences of the surface
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(20):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        inst = _inst(n, m, float(rng.uniform(0.1, 2)),
                     rng.uniform(0, 3, n), rng.uniform(0.1, 2, m))
        k = int(rng.integers(0, m + 1))
        T = tuple(sorted(rng.permutation(m)[:k].tolist()))
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        cut = cut_bounded(inst, perm, T)
        if cut.kind is not CutKind.GRADIENT_CUT:
            cut = cut_bounded(inst, perm, T=tuple(range(m)))
            T = tuple(range(m))
        xb = rng.uniform(0, 1, n)
        yb = rng.uniform(0.05, 1, m)
        pbar = Point.make(xb, yb)
        row = gradient_linearize(cut, pbar)
        fb = _f(cut, xb, yb)
        assert row.value(xb, yb, zv=fb) == pytest.approx(0.0, abs=1e-10)
        # finite differences of the surface vs the row's gradient
        h = 1e-5
        for i in range(n):
            xp, xm = xb.copy(), xb.copy()
            xp[i] += h
            xm[i] -= h
            fd = (_f(cut, xp, yb) - _f(cut, xm, yb)) / (2 * h)
            assert row.x.get(i, 0.0) == pytest.approx(fd, abs=1e-4)
        for j in range(m):
            yp, ym = yb.copy(), yb.copy()
            yp[j] += h
            ym[j] -= h
            fd = (_f(cut, xb, yp) - _f(cut, xb, ym)) / (2 * h)
            assert row.y.get(j, 0.0) == pytest.approx(fd, abs=1e-4)
        for _ in range(500):
            x = rng.uniform(0, 1, n)
            y = rng.uniform(0, 1, m)
            g = row.value(x, y, zv=0.0)
            assert g <= _f(cut, x, y) + 1e-9
            checked += 1
    assert checked >= 10**4


def test_gradient_degenerate_point_raises():
    inst = _inst(1, 1, 0.0, (1.0,), (1.0,))
    cut = cut_bounded(inst, Permutation((0,)), T=(0,))
    with pytest.raises(DegeneratePoint):
        gradient_linearize(cut, Point.make([0.0], [0.0]))


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------


def test_lifted_exact_cardinality_example():
    inst = _inst(2, 0, 0.0, (4.0, 5.0), (), cardinality=1)
    lc = lifted_coefficients_exact(inst, Permutation((0, 1)))
    assert lc.exact
    assert lc.sigma_bar == pytest.approx((0.0, 0.0))
    assert lc.rho == pytest.approx((2.0, math.sqrt(5.0)))
    # strictly stronger than the plain coefficients (2, 1)
    plain = cut_mixed_extended(inst, Permutation((0, 1))).pi
    assert lc.rho[1] > plain[1]


def test_lifted_exact_unconstrained_is_plain_pi():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = int(rng.integers(1, 6))
        inst = _inst(n, 0, float(rng.uniform(0, 1)), rng.uniform(0, 3, n), ())
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        lc = lifted_coefficients_exact(inst, perm)
        pi = cut_mixed_extended(inst, perm).pi
        assert lc.rho == pytest.approx(pi)


def test_lifted_exact_cardinality_matches_enumeration():
    # the O(n log n) rule and raw enumeration over the same feasible set agree
    rng = np.random.default_rng(14)
    for _ in range(15):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        c = rng.uniform(0, 4, n)
        card = _inst(n, 0, float(rng.uniform(0, 1)), c, (), cardinality=k)
        # same feasible set expressed as a row forces the enumeration path
        row = LinearRow((1.0,) * n, (), "<=", float(k))
        enum = _inst(n, 0, card.sigma, c, (), linear_constraints=(row,))
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        lc_fast = lifted_coefficients_exact(card, perm)
        lc_enum = lifted_coefficients_exact(enum, perm)
        assert lc_fast.rho == pytest.approx(lc_enum.rho, abs=1e-10)
        assert lc_fast.sigma_bar == pytest.approx(lc_enum.sigma_bar, abs=1e-10)


def test_lifted_exact_infeasible_fixing_convention():
    # x_0 = 0 forced, so the lifting subproblem with x_0 = 1 is infeasible;
    # the convention falls back to the sigma-based increment
    inst = _inst(2, 0, 1.0, (3.0, 1.0), (),
                 linear_constraints=(LinearRow((1.0, 0.0), (), "<=", 0.0),))
    lc = lifted_coefficients_exact(inst, Permutation((1, 0)))
    assert math.isinf(lc.sigma_bar[1]) and lc.sigma_bar[1] < 0
    assert lc.rho[0] == pytest.approx(2.0 - 1.0)  # sqrt(c0+sigma)-sqrt(sigma)


def test_lifted_dominates_plain_when_restricted():
    rng = np.random.default_rng(33)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n))
        inst = _inst(n, 0, float(rng.uniform(0, 2)), rng.uniform(0, 3, n), (),
                     cardinality=k)
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        rho = lifted_coefficients_exact(inst, perm).rho
        pi = cut_mixed_extended(inst, perm).pi
        assert all(r >= p - 1e-12 for r, p in zip(rho, pi))


def test_lifted_lp_vertex_case_matches_exact():
    inst = _inst(2, 0, 0.0, (4.0, 5.0), (), cardinality=1)
    relax = [LinearRow((1.0, 1.0), (), "<=", 1.0)]
    lc = lifted_coefficients_lp(inst, Permutation((0, 1)), relaxation=relax)
    assert not lc.exact
    assert lc.rho == pytest.approx((2.0, math.sqrt(5.0)))
    assert lc.sigma_bar == pytest.approx((0.0, 0.0))


def test_lifted_lp_box_only_gives_plain_pi():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(1, 6))
        inst = _inst(n, 0, float(rng.uniform(0, 1)), rng.uniform(0, 3, n), ())
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        lc = lifted_coefficients_lp(inst, perm, relaxation=[])
        pi = cut_mixed_extended(inst, perm).pi
        assert lc.rho == pytest.approx(pi, abs=1e-9)


def test_lifted_lp_tighter_relaxation_dominates():
    rng = np.random.default_rng(13)
    for _ in range(15):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n))
        inst = _inst(n, 0, float(rng.uniform(0, 1)), rng.uniform(0.2, 3, n), (),
                     cardinality=k)
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        loose = lifted_coefficients_lp(inst, perm, relaxation=[])
        tight = lifted_coefficients_lp(
            inst, perm, relaxation=[LinearRow((1.0,) * n, (), "<=", float(k))]
        )
        assert all(t >= l - 1e-9 for t, l in zip(tight.rho, loose.rho))
        # and the exact coefficients dominate the LP ones
        exact = lifted_coefficients_exact(inst, perm)
        assert all(e >= t - 1e-9 for e, t in zip(exact.rho, tight.rho))


def test_lifted_lp_unbounded_T_coordinate_zeroes_everything():
    inst = _inst(2, 1, 1.0, (2.0, 1.0), (1.0,), y_upper=(INF,))
    lc = lifted_coefficients_lp(inst, Permutation((0, 1)), T=(0,))
    assert lc.rho == (0.0, 0.0)
    assert all(math.isinf(s) for s in lc.sigma_bar)


def test_lifted_lp_requires_unit_box_T():
    inst = _inst(1, 1, 1.0, (2.0,), (1.0,), y_upper=(2.0,))
    with pytest.raises(ValueError):
        lifted_coefficients_lp(inst, Permutation((0,)), T=(0,))


def test_lifted_T_mass_enters_chain():
    # with T at its bounds the chain starts from sigma + d(T) instead of sigma
    inst = _inst(1, 1, 1.0, (2.0,), (1.0,))
    lc = lifted_coefficients_exact(inst, Permutation((0,)), T=(0,))
    assert lc.rho[0] == pytest.approx(2.0 - math.sqrt(2.0))
    lp = lifted_coefficients_lp(inst, Permutation((0,)), T=(0,))
    assert lp.rho[0] == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-9)


# ---------------------------------------------------------------------------
# rotated cuts
# ---------------------------------------------------------------------------


def test_cut_rotated_two_elements_tight():
    inst = _inst(2, 0, 0.0, (4.0, 5.0), (), cone=Cone.ROTATED)
    cut = cut_rotated(inst, Permutation((0, 1)))
    p = Point.make([1, 1], [], w=1.5, z=1.5)
    assert cut_violation(cut, p) == pytest.approx(0.0, abs=1e-12)
    # (2x1+x2)^2 <= 4wz is violated at w=z=1 (9 > 4)
    assert cut_violation(cut, Point.make([1, 1], [], w=1.0, z=1.0)) > 0
    assert cut_violation(cut, Point.make([0, 0], [], w=0.5, z=0.1)) <= 0


def test_cut_rotated_fourth_root_sharpe_shape():
    inst = ProblemInstance(
        n=1, m=0, sigma=0.0, c=(1.0,), d=(), a=(0.0,), b=(), omega=1.0,
        y_upper=(), cone=Cone.ROTATED, oracle_power=4,
        cone_rhs_w=AffineForm(const=1.0, x={0: -0.5}),
    )
    cut = cut_rotated(inst, Permutation((0,)))
    assert cut.pi[0] == pytest.approx(2.0)
    # x^2 <= w z with w = 1 - 0.5 x: at x=1, w=1/2, z=2 it is tight
    p = Point.make([1], [], z=2.0)
    assert cut_violation(cut, p) == pytest.approx(0.0, abs=1e-12)
    assert cut_violation(cut, Point.make([1], [], z=1.9)) > 0
    with pytest.raises(ValueError):
        cut_rotated(inst, Permutation((0,)), T=(0,))


def test_cut_rotated_rejects_standard_cone():
    inst = _inst(1, 0, 1.0, (1.0,), ())
    with pytest.raises(ValueError):
        cut_rotated(inst, Permutation((0,)))
    with pytest.raises(ValueError):
        cut_bounded(_inst(1, 1, 1.0, (1.0,), (1.0,), cone=Cone.ROTATED),
                    Permutation((0,)), T=(0,))


def test_rotated_gradient_row_supports_surface():
    rng = np.random.default_rng(44)
    inst = _inst(2, 1, 0.5, (1.0, 2.0), (1.0,), cone=Cone.ROTATED)
    cut = cut_rotated(inst, Permutation((0, 1)), T=(0,))
    pbar = Point.make([0.6, 0.3], [0.5], w=1.2, z=0.9)
    row = gradient_linearize(cut, pbar)
    # tangent at pbar when pbar sits on the boundary of its own epigraph,
    # below the surface elsewhere
    for _ in range(2000):
        x = rng.uniform(0, 1, 2)
        y = rng.uniform(0, 1, 1)
        w = rng.uniform(0.05, 2)
        f = _f(cut, x, y)
        # minimal w+z on the cut's own surface given w: z = f^2/(4w)
        z = f * f / (4 * w)
        assert row.value(x, y, wv=w, zv=z) <= 1e-9


def test_greedy_T_search_returns_most_violated():
    inst = _inst(2, 2, 1.0, (2.0, 1.0), (1.0, 2.0))
    pbar = Point.make([0.9, 0.4], [0.8, 0.6], z=1.0)
    got = greedy_T_cut(inst, pbar)
    assert got is not None
    cut, viol = got
    assert viol == pytest.approx(cut_violation(cut, pbar))
    # hand enumeration over T prefixes of ybar sorted nonincreasing
    best = -INF
    best_T = None
    order = sorted(range(2), key=lambda j: (-pbar.y[j], j))
    for i in range(3):
        T = tuple(sorted(order[:i]))
        cand = cut_bounded(inst, Permutation((0, 1)), T)
        v = cut_violation(cand, pbar)
        if v > best + 1e-12:
            best, best_T = v, T
    assert viol == pytest.approx(best)
    assert tuple(cut.T) == best_T


def test_greedy_T_none_when_satisfied():
    inst = _inst(2, 1, 1.0, (2.0, 1.0), (1.0,))
    pbar = Point.make([0.5, 0.5], [0.5], z=10.0)
    assert greedy_T_cut(inst, pbar) is None


def test_relative_violation_scale():
    inst = _inst(1, 0, 100.0, (9.0,), ())
    cut = cut_mixed_extended(inst, Permutation((0,)))
    p = Point.make([1.0], [], z=0.0)
    assert relative_violation(cut, p) == pytest.approx(cut_violation(cut, p))


# ---------------------------------------------------------------------------
# two-variable hull pieces
# ---------------------------------------------------------------------------


def test_hull2d_example_values():
    # breakpoint and both pieces for sigma=d=1, c=2 at x=0.5
    bp = 0.5 + 0.5 * math.sqrt(1.0 / 3.0)
    assert bp == pytest.approx(0.788675, abs=1e-6)
    g_lo = hull2d_g(1.0, 2.0, 1.0, 0.5, 0.5)
    assert g_lo == pytest.approx(math.sqrt((1.0 + 0.5 * (SQ3 - 1.0)) ** 2 + 0.25))
    assert g_lo == pytest.approx(1.454664, abs=1e-4)
    g_hi = hull2d_g(1.0, 2.0, 1.0, 0.5, 0.9)
    assert g_hi == pytest.approx(math.sqrt(0.25 + 0.16) + 0.5 * 2.0)
    assert g_hi == pytest.approx(1.640312, abs=1e-6)


def test_hull2d_continuous_at_breakpoint():
    rng = np.random.default_rng(10)
    for _ in range(50):
        sigma = float(rng.uniform(0.05, 3))
        c = float(rng.uniform(0.05, 3))
        d = float(rng.uniform(0.05, 3))
        x = float(rng.uniform(0.01, 0.99))
        ystar = x + (1 - x) * math.sqrt(sigma / (sigma + c))
        if ystar > 1.0:
            continue
        lo = hull2d_g(sigma, c, d, x, ystar - 1e-12)
        hi = hull2d_g(sigma, c, d, x, ystar + 1e-12)
        assert abs(lo - hi) < 1e-9


def test_hull2d_matches_two_point_convexification():
    rng = np.random.default_rng(12)
    for _ in range(12):
        sigma = float(rng.uniform(0.05, 2))
        c = float(rng.uniform(0.05, 3))
        d = float(rng.uniform(0.05, 3))
        for x in np.linspace(0.05, 0.95, 7):
            for y in np.linspace(0.0, 1.0, 9):
                ref = oracle.hull2d_reference(sigma, c, d, float(x), float(y))
                assert hull2d_g(sigma, c, d, float(x), float(y)) == pytest.approx(
                    ref, abs=1e-4
                )


def test_hull2d_g2_invalid_globally_when_sigma_positive():
    rng = np.random.default_rng(15)
    for _ in range(25):
        sigma = float(rng.uniform(0.05, 2))
        c = float(rng.uniform(0.05, 3))
        d = float(rng.uniform(0.05, 3))
        g2_at_10 = math.sqrt(sigma * 0.0 + d * 1.0) + math.sqrt(sigma + c + d)
        # the second piece evaluated at (x, y) = (1, 0) overshoots the
        # feasible height sqrt(sigma + c)
        assert g2_at_10 > math.sqrt(sigma + c) + 1e-9


# ---------------------------------------------------------------------------
# single-binary rounding cut
# ---------------------------------------------------------------------------


def test_mir_example_and_degenerate_sigma():
    cut = mir_cut_single_binary(1.0, 2.0, (1.0,))
    assert cut.constant == pytest.approx(1.0)
    assert cut.pi[0] == pytest.approx(SQ3 - 1.0)
    zero = mir_cut_single_binary(0.0, 2.0, (1.0,))
    assert zero.constant == pytest.approx(0.0)
    assert zero.pi[0] == pytest.approx(math.sqrt(2.0))


def test_mir_matches_extended_cut_coefficients():
    rng = np.random.default_rng(77)
    for _ in range(100):
        sigma = float(rng.uniform(0, 4))
        c = float(rng.uniform(0.01, 5))
        d = tuple(rng.uniform(0.1, 2, int(rng.integers(0, 3))))
        mir = mir_cut_single_binary(sigma, c, d)
        inst = _inst(1, len(d), sigma, (c,), d)
        ref = cut_mixed_extended(inst, Permutation((0,)))
        assert mir.constant == pytest.approx(ref.constant, abs=1e-10)
        assert mir.pi[0] == pytest.approx(ref.pi[0], abs=1e-10)


def test_mir_pure_binary_matches_plain_cut():
    cut = mir_cut_single_binary(1.0, 2.0, ())
    ref = cut_binary(ConcaveOfModularOracle(1.0, (2.0,)), Permutation((0,)))
    assert cut.pi[0] == pytest.approx(ref.pi[0], abs=1e-12)


# ---------------------------------------------------------------------------
# validity sweep (oracle-checked)
# ---------------------------------------------------------------------------


def test_all_families_valid_on_random_instances():
    rng = np.random.default_rng(99)
    for trial in range(60):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(0, 4))
        card = int(rng.integers(1, n + 1)) if rng.uniform() < 0.5 else None
        inst = _inst(n, m, float(rng.uniform(0, 2)), rng.uniform(0, 3, n),
                     rng.uniform(0.1, 2, m), cardinality=card)
        perm = Permutation(tuple(rng.permutation(n).tolist()))
        assert oracle.validate_cut(inst, cut_mixed_extended(inst, perm))
        if m:
            k = int(rng.integers(0, m + 1))
            T = tuple(sorted(rng.permutation(m)[:k].tolist()))
            assert oracle.validate_cut(inst, cut_bounded(inst, perm, T))
        lc = lifted_coefficients_exact(inst, perm)
        lifted_cut = cut_bounded(inst, perm, T=(), lifted=lc)
        assert oracle.validate_cut(inst, lifted_cut)
        lp = lifted_coefficients_lp(inst, perm)
        assert oracle.validate_cut(inst, cut_bounded(inst, perm, T=(), lifted=lp))
