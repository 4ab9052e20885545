"""Projected-(sub)gradient reference solve of the convex cone relaxation.

Test oracle, independent of the relax module.  The epigraph variables are
eliminated in closed form -- z = weight-free norm for standard instances,
and the rotated (w, z) pair contributes sqrt(omega_w * omega) times the
norm (the minimum of p*w + q*z over 4*w*z >= N^2 is sqrt(p*q)*N) -- which
leaves a smooth convex objective over the variable boxes:

    F(x, y) = a'x + b'y + weight * sqrt(sigma + sum c x^2 + sum d y^2)

Smoothness needs sigma > 0, which the caller must ensure.  FISTA-style
accelerated projected gradient descent with the global Lipschitz step
1/L, L = weight * max(c, d) / sqrt(sigma), drives the error far below the
1e-5 tolerance the comparison tests use.

Only box-constrained instances with the default comparison slots are
supported; anything fancier is asserted away rather than mis-solved.
"""

import math

import numpy as np

from polycut.model import Cone, ProblemInstance


def reference_value(inst: ProblemInstance, iters: int = 8000) -> float:
    assert not inst.extra_cones and not inst.linear_constraints
    assert inst.cardinality is None
    assert inst.oracle_power == 2
    assert inst.cone_rhs_w is None and inst.cone_rhs_z is None
    assert inst.sigma > 0.0

    if inst.cone is Cone.ROTATED:
        weight = math.sqrt(inst.omega_w * inst.omega)
    else:
        weight = float(inst.omega)

    n, m = inst.n, inst.m
    lin = np.concatenate([np.asarray(inst.a, float), np.asarray(inst.b, float)])
    coef = np.concatenate([np.asarray(inst.c, float), np.asarray(inst.d, float)])
    lo = np.zeros(n + m)
    hi = np.concatenate([np.ones(n), np.asarray(inst.y_upper, float)])
    sigma = float(inst.sigma)

    def fval(p: np.ndarray) -> float:
        return float(lin @ p + weight * math.sqrt(sigma + coef @ (p * p)))

    def grad(p: np.ndarray) -> np.ndarray:
        root = math.sqrt(sigma + coef @ (p * p))
        return lin + weight * coef * p / root

    L = weight * (float(coef.max()) if len(coef) else 0.0) / math.sqrt(sigma)
    step = 1.0 / max(L, 1e-9)

    p = np.clip(np.zeros(n + m), lo, hi)
    q = p.copy()
    t = 1.0
    best = fval(p)
    for _ in range(iters):
        pn = np.clip(q - step * grad(q), lo, hi)
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        q = np.clip(pn + ((t - 1.0) / tn) * (pn - p), lo, hi)
        p, t = pn, tn
        best = min(best, fval(p))
    return best
