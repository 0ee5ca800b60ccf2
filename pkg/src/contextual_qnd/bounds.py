"""Closed-form success bounds: noncontextual vs quantum.

Throughout, ``c`` is the confusability of the two preparations, i.e. the
squared overlap ``s**2`` of the corresponding pure states.  Quantum formulas
that are naturally written in the overlap use ``sqrt(c)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

from .core import DEFAULT_TOL
from .errors import UnsupportedCombination, UnsupportedPriors


class Task(str, Enum):
    USD = "usd"
    SUSD = "susd"
    PQC1 = "pqc1"
    PQC2 = "pqc2"


@dataclass(frozen=True)
class TaskParams:
    q1: float = 0.5
    c: float = 0.0
    N: int = 1
    n: int = 1
    m: int = 2
    p: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.q1 <= 1.0:
            raise ValueError(f"q1 must lie in [0, 1], got {self.q1}")
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must lie in [0, 1], got {self.c}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        for name in ("N", "n", "m"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.m < self.n:
            raise ValueError("need m >= n")

    @property
    def q2(self) -> float:
        return 1.0 - self.q1

    @classmethod
    def from_overlap(cls, s: float, **kw) -> "TaskParams":
        return cls(c=s * s, **kw)


@dataclass(frozen=True)
class BoundPair:
    nc: float
    quantum: float

    @property
    def advantage(self) -> float:
        return self.quantum - self.nc


@dataclass(frozen=True)
class Regime:
    label: str
    margin: float
    nc: float
    quantum: float

    @property
    def contextual(self) -> bool:
        return self.label == "Contextual"

    def to_dict(self) -> dict:
        return asdict(self)


def _pmax(q1: float) -> float:
    return max(q1, 1.0 - q1)


def _is_equal_priors(q1: float, tol: float = DEFAULT_TOL.tol_eq) -> bool:
    return abs(q1 - 0.5) <= tol


def nc_region_contains(a1: float, a2: float, c: float, tol: float = DEFAULT_TOL.tol_eq) -> bool:
    return a1 >= 0 and a2 >= 0 and a1 + a2 <= 1 - c + tol


def q_region_contains(a1: float, a2: float, c: float, tol: float = DEFAULT_TOL.tol_eq) -> bool:
    return a1 >= 0 and a2 >= 0 and (1 - a1) * (1 - a2) >= c - tol


def nc_usd_max(q1: float, c: float) -> float:
    return _pmax(q1) * (1.0 - c)


def q_usd_optimal_alphas(q1: float, c: float):
    """Optimal ``(alpha1, alpha2)`` of ``q1 a1 + q2 a2`` over ``(1-a1)(1-a2) >= c``."""
    q2 = 1.0 - q1
    s = math.sqrt(c)
    if q1 > 0 and q2 > 0:
        a1 = 1.0 - math.sqrt(q2 / q1) * s
        a2 = 1.0 - math.sqrt(q1 / q2) * s
        if 0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0:
            return a1, a2
    # stationary point leaves the square: the best corner of the boundary wins
    return (1.0 - c, 0.0) if q1 >= q2 else (0.0, 1.0 - c)


def q_usd_max(q1: float, c: float) -> float:
    """Quantum (IDP-type) optimum of unambiguous discrimination for any priors."""
    a1, a2 = q_usd_optimal_alphas(q1, c)
    return q1 * a1 + (1.0 - q1) * a2


def nc_susd_max(q1: float, c: float, N: int) -> float:
    if N < 1:
        raise ValueError("N must be >= 1")
    return _pmax(q1) * (1.0 - c ** (1.0 / N)) ** N


def susd_branch_threshold(N: int) -> float:
    return (2.0 ** (1.0 / N) - 1.0) ** (N / 2.0)


def q_susd_max_equal(c: float, N: int, q1: float = 0.5) -> float:
    """Quantum sequential-USD optimum for equal priors (piecewise closed form).

    The two branches do not join continuously at the threshold; both are
    evaluated without smoothing.
    """
    if not _is_equal_priors(q1):
        raise UnsupportedPriors("the quantum sequential bound is only known for equal priors")
    if N < 2:
        raise ValueError("N must be >= 2 (use q_usd_max for a single receiver)")
    if c < susd_branch_threshold(N):
        return (1.0 - c ** (1.0 / (2 * N))) ** N
    return 0.5 * (1.0 - c ** (1.0 / N)) ** N


def nc_clone1_max(q1: float, c: float) -> float:
    return _pmax(q1) * (1.0 - c)


def clone2_ratio(c: float, n: int, m: int) -> float:
    """``(1 - c**n) / (1 - c**m)`` with its limit ``n/m`` at ``c = 1``."""
    if m < n:
        raise ValueError("need m >= n")
    if m == n:
        return 1.0
    if c >= 1.0:
        return n / m
    return (1.0 - c**n) / (1.0 - c**m)


def nc_clone2_max(q1: float, c: float, n: int = 1, m: int = 2) -> float:
    return _pmax(q1) * clone2_ratio(c, n, m)


def q_clone2_max_equal(c: float, n: int = 1, m: int = 2, q1: float = 0.5) -> float:
    """Quantum type-II cloning optimum for equal priors; carries no prior factor."""
    if not _is_equal_priors(q1):
        raise UnsupportedPriors("this cloning bound is stated for equal priors only")
    return clone2_ratio(math.sqrt(c), n, m)


def q_clone2_max_imbalanced(q1: float, c: float, n: int = 1) -> float:
    """Quantum type-II cloning value for strongly imbalanced priors.

    This is the optimum restricted to the boundary where the less likely
    state is never cloned; it is intended for ``q1`` near 0 or 1 and has no
    stated validity threshold.
    """
    return _pmax(q1) * (1.0 - c**n)


def bound_pair(task: Task | str, params: TaskParams) -> BoundPair:
    """Noncontextual and quantum optimum for one task.

    Raises :class:`UnsupportedCombination` when no quantum formula is known.
    """
    task = Task(task)
    q1, c = params.q1, params.c
    if task is Task.USD:
        return BoundPair(nc_usd_max(q1, c), q_usd_max(q1, c))
    if task is Task.PQC1:
        return BoundPair(nc_clone1_max(q1, c), q_usd_max(q1, c))
    if task is Task.SUSD:
        nc = nc_susd_max(q1, c, params.N)
        if params.N == 1:
            return BoundPair(nc, q_usd_max(q1, c))
        if not _is_equal_priors(q1):
            raise UnsupportedCombination("no quantum formula for unequal priors in sequential USD")
        return BoundPair(nc, q_susd_max_equal(c, params.N))
    # PQC2
    nc = nc_clone2_max(q1, c, params.n, params.m)
    if _is_equal_priors(q1):
        return BoundPair(nc, q_clone2_max_equal(c, params.n, params.m))
    return BoundPair(nc, q_clone2_max_imbalanced(q1, c, params.n))


def regime_classify(task: Task | str, params: TaskParams, tol: float = DEFAULT_TOL.tol_eq) -> Regime:
    pair = bound_pair(task, params)
    margin = pair.quantum - pair.nc
    label = "Contextual" if margin > tol else "Noncontextual"
    return Regime(label, margin, pair.nc, pair.quantum)


def susd_crossover(N: int = 2, lo: float = 1e-6, hi: float = 0.4, xtol: float = 1e-12) -> float:
    """Confusability where the equal-prior sequential margin changes sign (bisection)."""
    def margin(c):
        return q_susd_max_equal(c, N) - nc_susd_max(0.5, c, N)

    if margin(lo) <= 0 or margin(hi) >= 0:
        raise ValueError("margin does not change sign on the bracket")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
