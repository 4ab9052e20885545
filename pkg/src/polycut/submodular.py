"""Extended-polymatroid extreme points for concave-of-modular set functions.

For f(S) = g(sigma + c(S)) with g concave nondecreasing and c >= 0, f is
nondecreasing submodular, and every extreme point of the polyhedron
{pi : pi(S) <= f(S) - f(0) for all S} is obtained from a permutation by chain
differences:

    pi_(k) = f({(1),...,(k)}) - f({(1),...,(k-1)}).

Sorting a fractional point nonincreasing and applying the chain rule is an
exact maximizer of pi'xbar over the polyhedron (the greedy algorithm), which
is what cut separation needs.

Two concave heads are supported: g(t) = sqrt(t) (the workhorse) and
g(t) = 2*t**0.25 (the fourth-root head used by Sharpe-ratio instances).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class ConcaveOfModularOracle:
    """Set function f(S) = g(sigma + sum_{i in S} c_i), g = t^(1/2) or 2 t^(1/4)."""

    sigma: float
    c: tuple
    root_power: int = 2

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if any(ci < 0 for ci in self.c):
            raise ValueError("c must be nonnegative")
        if self.root_power not in (2, 4):
            raise ValueError("root_power must be 2 or 4")

    @property
    def n(self) -> int:
        return len(self.c)

    def head(self, t: float) -> float:
        """g(sigma + t) for modular weight t >= 0."""
        base = self.sigma + t
        if base <= 0.0:
            return 0.0
        if self.root_power == 2:
            return base ** 0.5
        return 2.0 * base ** 0.25

    def value(self, subset) -> float:
        return self.head(sum(self.c[i] for i in subset))

    def empty_value(self) -> float:
        return self.head(0.0)


@dataclass(frozen=True)
class Permutation:
    """An arrangement of {0,...,n-1}; order[k] is the k-th element."""

    order: tuple

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError("order must be a permutation of 0..n-1")

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)


def as_permutation(perm) -> Permutation:
    if isinstance(perm, Permutation):
        return perm
    return Permutation(tuple(int(i) for i in perm))


def polymatroid_coefficients(oracle: ConcaveOfModularOracle, perm) -> np.ndarray:
    """Chain-difference coefficients, indexed by variable (not by position).

    pi[perm[k]] = g(sigma_(k)) - g(sigma_(k-1)) with the running sums
    sigma_(k) = c_(k) + sigma_(k-1), sigma_(0) = sigma.  Concavity of g makes
    every entry nonnegative, and the telescoping sum equals
    f(full set) - f(empty set).
    """
    perm = as_permutation(perm)
    if len(perm) != oracle.n:
        raise ValueError("permutation length must match oracle dimension")
    pi = np.zeros(oracle.n)
    running = 0.0
    prev = oracle.head(0.0)
    for i in perm:
        running += oracle.c[i]
        cur = oracle.head(running)
        pi[i] = cur - prev
        prev = cur
    return pi


def separate_greedy(
    oracle: ConcaveOfModularOracle, xbar: Sequence
) -> Tuple[Permutation, np.ndarray, float]:
    """Most-violated extreme point for a fractional xbar in [0,1]^n.

    Sorts xbar nonincreasing (ties: lower index first), applies the chain
    rule, and returns (permutation, coefficients, pi'xbar).  The sort order
    maximizes pi'xbar over all permutations, so the returned inequality

        f(empty) + pi'x <= z

    is violated at (xbar, zbar) iff any permutation's inequality is.
    """
    xbar = np.asarray(xbar, dtype=float)
    if xbar.shape != (oracle.n,):
        raise ValueError("xbar length must match oracle dimension")
    order = sorted(range(oracle.n), key=lambda i: (-xbar[i], i))
    perm = Permutation(tuple(order))
    pi = polymatroid_coefficients(oracle, perm)
    return perm, pi, float(pi @ xbar)
