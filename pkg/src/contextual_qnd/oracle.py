"""Brute-force validators for the closed-form bounds and the dual solution.

Every oracle works from the defining feasible region only: linear programs
by vertex enumeration, curved regions by dense grids, and the confidence
primal by a Bloch-sphere scan.  Grid sizes are fixed, so results are
bit-stable across runs.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from . import kernels
from .core import DEFAULT_TOL, grid_refine_max, maximize_1d
from .errors import DepthExceeded, SingularAverage
from .maxconf import QubitEnsemble, pauli_coefficients

#: grid for the two-parameter regions (points per axis, zoom rounds)
REGION_COARSE = 401
REGION_ROUNDS = 5

#: Bloch grid of the confidence oracle (polar x azimuth)
BLOCH_GRID = (721, 1441)

MAX_SUSD_DEPTH = 6


# -- linear programs ----------------------------------------------------------


def lp2_vertices(a, b, tol: float = 1e-12) -> np.ndarray:
    """Vertices of the planar polygon ``{x : a @ x <= b}``.

    Every pair of constraint lines is intersected and the feasible
    intersection points are kept.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pts = []
    for i, j in itertools.combinations(range(len(b)), 2):
        m = a[[i, j]]
        if abs(np.linalg.det(m)) < 1e-14:
            continue
        x = np.linalg.solve(m, b[[i, j]])
        if np.all(a @ x <= b + tol):
            pts.append(x)
    return np.array(pts).reshape(-1, 2)


def lp2_max(w, a, b) -> float:
    """Maximum of ``w @ x`` over the polygon ``a @ x <= b`` (vertex scan)."""
    verts = lp2_vertices(a, b)
    if len(verts) == 0:
        return -math.inf
    return float(np.max(verts @ np.asarray(w, dtype=float)))


def _simplex(total: float):
    """``a1, a2 >= 0``, ``a1, a2 <= 1``, ``a1 + a2 <= total``."""
    a = [[-1, 0], [0, -1], [1, 0], [0, 1], [1, 1]]
    b = [0, 0, 1, 1, total]
    return a, b


def usd_nc_oracle(q1: float, c: float) -> float:
    return lp2_max([q1, 1 - q1], *_simplex(1 - c))


def clone1_nc_oracle(q1: float, c: float) -> float:
    """Type-I cloning identifies the state, so its region is the USD triangle."""
    return usd_nc_oracle(q1, c)


def _geometric_sum(c: float, k: int) -> float:
    return sum(c**i for i in range(k))


def clone2_nc_oracle(q1: float, c: float, n: int = 1, m: int = 2) -> float:
    """Vertex scan of ``a1 + a2 <= sum_{i<n} c^i / sum_{i<m} c^i``."""
    if m < n:
        raise ValueError("need m >= n")
    return lp2_max([q1, 1 - q1], *_simplex(_geometric_sum(c, n) / _geometric_sum(c, m)))


# -- sequential USD: nested 1-D search ---------------------------------------


@lru_cache(maxsize=None)
def _susd_value(c: float, depth: int) -> float:
    """Best product of per-stage successes over ``depth`` receivers."""
    if c >= 1.0:
        return 0.0
    if depth == 1 or c <= 0.0:
        # a single stage ranges over [0, 1 - c]; take its upper vertex
        return 1.0 - c
    f = lambda a: a * _susd_value(c / (1 - a), depth - 1)  # noqa: E731
    return maximize_1d(f, 0.0, 1.0 - c, grid=21, xtol=1e-9)[1]


def susd_nc_oracle(q1: float, c: float, N: int) -> float:
    """Each stage succeeds with ``alpha`` and leaves confusability ``c / (1 - alpha)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > MAX_SUSD_DEPTH:
        raise DepthExceeded(f"nested search supports N <= {MAX_SUSD_DEPTH}")
    if N == 1:
        return usd_nc_oracle(q1, c)
    return max(q1, 1 - q1) * _susd_value(float(c), int(N))


# -- curved regions: dense grids ---------------------------------------------


def _region_max(w1: float, w2: float, region: int, c: float, s: float, n: int, m: int,
                slack: float = 0.0, box=None):
    def scan(box, npts):
        (lo1, hi1), (lo2, hi2) = box
        a1, a2, val = kernels.linear_region_scan(
            w1, w2, region, c, s, n, m, float(lo1), float(hi1), float(lo2), float(hi2), npts, slack
        )
        return np.array([a1, a2]), val

    return grid_refine_max(None, box or [(0.0, 1.0), (0.0, 1.0)], coarse=REGION_COARSE,
                           refine_rounds=REGION_ROUNDS, scan=scan)


def usd_quantum_oracle(q1: float, c: float) -> float:
    """Grid maximum of ``q1 a1 + q2 a2`` over ``(1 - a1)(1 - a2) >= c``."""
    return _region_max(q1, 1 - q1, 0, c, 0.0, 1, 1)[1]


def duan_guo_feasibility(s: float, n: int, m: int, alpha1: float, alpha2: float,
                         tol: float = DEFAULT_TOL.tol_eq) -> bool:
    """``(1 - a1)(1 - a2) >= (s^n - sqrt(a1 a2) s^m)^2`` with ``tol`` slack."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    lhs = (1 - alpha1) * (1 - alpha2)
    rhs = (s**n - math.sqrt(alpha1 * alpha2) * s**m) ** 2
    return lhs >= rhs - tol


def clone2_quantum_oracle(q1: float, s: float, n: int = 1, m: int = 2,
                          boundary_only: bool = False):
    """Grid maximum of ``q1 a1 + q2 a2`` over the two-state cloning region.

    With ``boundary_only`` the search is restricted to the edge where the less
    likely state is never cloned.  Returns ``(value, (a1, a2))``.
    """
    box = None
    if boundary_only:
        box = [(0.0, 1.0), (0.0, 0.0)] if q1 >= 0.5 else [(0.0, 0.0), (0.0, 1.0)]
    x, val = _region_max(q1, 1 - q1, 1, 0.0, s, n, m, box=box)
    return val, (float(x[0]), float(x[1]))


# -- maximal confidence: Bloch scan -------------------------------------------


def confidence_oracle(ens: QubitEnsemble, k: int, grid=BLOCH_GRID) -> float:
    """Max over rank-1 projectors of ``q_k Tr(rho_k P) / Tr(rho P)``.

    ``P = (I + n.sigma) / 2`` with ``n`` on a polar x azimuth grid, followed
    by one refinement round on a box of one grid step around the incumbent.
    """
    rho = ens.rho
    if np.linalg.eigvalsh(rho)[0] <= DEFAULT_TOL.tol_eq:
        raise SingularAverage("average state is singular")
    num = np.ascontiguousarray(pauli_coefficients(ens.prior(k) * ens.rho_k(k)))
    den = np.ascontiguousarray(pauli_coefficients(rho))
    nt, np_ = grid
    t, p, val = kernels.bloch_ratio_scan(num, den, 0.0, math.pi, nt, 0.0, 2 * math.pi, np_)
    dt, dp = math.pi / (nt - 1), 2 * math.pi / (np_ - 1)
    t2, p2, val2 = kernels.bloch_ratio_scan(
        num, den, max(t - dt, 0.0), min(t + dt, math.pi), nt, p - dp, p + dp, np_
    )
    return float(max(val, val2))


__all__ = [
    "BLOCH_GRID",
    "REGION_COARSE",
    "REGION_ROUNDS",
    "clone1_nc_oracle",
    "clone2_nc_oracle",
    "clone2_quantum_oracle",
    "confidence_oracle",
    "duan_guo_feasibility",
    "lp2_max",
    "lp2_vertices",
    "susd_nc_oracle",
    "usd_nc_oracle",
    "usd_quantum_oracle",
]
