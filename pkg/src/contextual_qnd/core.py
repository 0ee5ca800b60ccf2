"""Small numerical substrate: 2x2 Hermitian algebra and low-dimensional maximization.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype ``complex128``;
amplitudes are Python/numpy complex scalars.  Every routine is a pure function.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionTooLarge, InvalidInterval, NotHermitian, Singular

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

TOL_ENV_VAR = "CONTEXTUAL_QND_TOL"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances threaded through the package.

    Attributes
    ----------
    tol_eq : float
        Equality / support threshold for exact identities.
    tol_opt : float
        Accuracy expected from numerical optimizers and oracles.
    tol_herm : float
        Maximum allowed deviation from Hermitian symmetry.
    """

    tol_eq: float = 1e-9
    tol_opt: float = 1e-6
    tol_herm: float = 1e-12

    def __post_init__(self):
        for name in ("tol_eq", "tol_opt", "tol_herm"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @classmethod
    def from_env(cls, environ=None) -> "Tolerances":
        """Defaults, with ``tol_opt`` overridden by ``CONTEXTUAL_QND_TOL`` if set."""
        environ = os.environ if environ is None else environ
        raw = environ.get(TOL_ENV_VAR)
        if raw is None or raw.strip() == "":
            return cls()
        return replace(cls(), tol_opt=float(raw))


DEFAULT_TOL = Tolerances()


def mat2(a, b, c, d) -> np.ndarray:
    """Build a 2x2 complex matrix ``[[a, b], [c, d]]``, rejecting NaN/Inf entries."""
    m = np.array([[a, b], [c, d]], dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def as_mat2(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def is_hermitian(m, tol: float = DEFAULT_TOL.tol_herm) -> bool:
    m = as_mat2(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def dagger(m) -> np.ndarray:
    return np.asarray(m).conj().T


def projector(vec) -> np.ndarray:
    """Rank-1 projector onto the (normalized) 2-vector ``vec``."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def eig2_hermitian(m, tol: Tolerances = DEFAULT_TOL):
    """Closed-form eigen-decomposition of a 2x2 Hermitian matrix.

    Returns
    -------
    low, high : float
        Eigenvalues in ascending order.
    vectors : tuple of ndarray
        Orthonormal eigenvectors ``(v_low, v_high)``.
    """
    m = as_mat2(m)
    if not is_hermitian(m, tol.tol_herm):
        raise NotHermitian("matrix is not Hermitian within tol_herm")
    a = m[0, 0].real
    d = m[1, 1].real
    b = m[0, 1]
    mean = 0.5 * (a + d)
    half_gap = math.hypot(0.5 * (a - d), abs(b))
    low, high = mean - half_gap, mean + half_gap

    if abs(b) <= tol.tol_herm * max(1.0, abs(a), abs(d)):
        e0 = np.array([1.0, 0.0], dtype=complex)
        e1 = np.array([0.0, 1.0], dtype=complex)
        return (low, high, (e0, e1)) if a <= d else (low, high, (e1, e0))

    # two algebraically equivalent forms; keep the better conditioned one
    cand1 = np.array([b, high - a], dtype=complex)
    cand2 = np.array([high - d, np.conj(b)], dtype=complex)
    v_high = cand1 if np.linalg.norm(cand1) >= np.linalg.norm(cand2) else cand2
    v_high = v_high / np.linalg.norm(v_high)
    v_low = np.array([-np.conj(v_high[1]), np.conj(v_high[0])], dtype=complex)
    return low, high, (v_low, v_high)


def inv_sqrt2(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse square root of a positive-definite 2x2 Hermitian matrix."""
    low, high, (v0, v1) = eig2_hermitian(m, tol)
    if low <= tol.tol_eq:
        raise Singular(f"eigenvalue {low:.3g} is not above tol_eq")
    r = np.outer(v0, v0.conj()) / math.sqrt(low) + np.outer(v1, v1.conj()) / math.sqrt(high)
    return 0.5 * (r + dagger(r))


def _finite_or_neg_inf(y) -> float:
    y = float(y)
    return y if math.isfinite(y) or y == math.inf else -math.inf


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       xtol: float = 1e-13, max_iter: int = 200):
    """Golden-section search for the maximum of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = _finite_or_neg_inf(f(c))
    fd = _finite_or_neg_inf(f(d))
    for _ in range(max_iter):
        if b - a <= xtol * (1.0 + abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = _finite_or_neg_inf(f(c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = _finite_or_neg_inf(f(d))
    return (c, fc) if fc >= fd else (d, fd)


def maximize_1d(f: Callable[[float], float], lo: float, hi: float, *,
                grid: int = 10_001, xtol: float = 1e-13):
    """Maximize a continuous scalar function on ``[lo, hi]``.

    A uniform scan over ``grid`` points seeds a golden-section refinement on the
    bracket around the best grid point, so non-unimodal objectives are handled
    as long as the grid resolves their peaks.  Non-finite values count as ``-inf``.

    Returns
    -------
    argmax, max : float
    """
    if not (lo < hi):
        raise InvalidInterval(f"need lo < hi, got [{lo}, {hi}]")
    if grid < 3:
        raise ValueError("grid needs at least 3 points")
    xs = np.linspace(lo, hi, grid)
    ys = np.array([_finite_or_neg_inf(f(x)) for x in xs])
    i = int(np.argmax(ys))
    best_x, best_y = float(xs[i]), float(ys[i])
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, grid - 1)]
    gx, gy = golden_section_max(f, float(a), float(b), xtol=xtol)
    if gy > best_y:
        best_x, best_y = float(gx), float(gy)
    return best_x, best_y


def _grid_scan(f, box: np.ndarray, coarse: int):
    axes = [np.linspace(lo, hi, coarse) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    values = np.asarray(f(*mesh), dtype=float)
    values = np.where(np.isnan(values), -np.inf, values)
    idx = np.unravel_index(int(np.argmax(values)), values.shape)
    point = np.array([axes[k][idx[k]] for k in range(len(axes))])
    return point, float(values[idx])


def grid_refine_max(f: Callable, box: Sequence[Sequence[float]], coarse: int = 101,
                    refine_rounds: int = 3, scan: Callable | None = None):
    """Deterministic grid search with successive zooming.

    ``f`` is evaluated vectorized: it receives one coordinate array per
    dimension (``numpy.meshgrid`` ``ij`` layout) and returns an array of values;
    infeasible points should map to ``-inf``.  Each refinement round shrinks the
    box 10x around the incumbent (shifted to stay inside the original box).

    ``scan(box, coarse) -> (point, value)`` replaces the default meshgrid scan,
    which lets callers plug in a compiled kernel.

    Returns
    -------
    argmax : ndarray, max : float
    """
    full = np.asarray(box, dtype=float)
    if full.ndim != 2 or full.shape[1] != 2:
        raise ValueError("box must be a sequence of (lo, hi) pairs")
    if full.shape[0] > 4:
        raise DimensionTooLarge(f"grid_refine_max supports d <= 4, got d={full.shape[0]}")
    if coarse < 11:
        raise ValueError("coarse must be >= 11")
    if np.any(full[:, 0] > full[:, 1]):
        raise InvalidInterval("box bounds must satisfy lo <= hi")
    scan = scan or (lambda b, n: _grid_scan(f, b, n))

    best_x, best_y = scan(full, coarse)
    cur = full.copy()
    for _ in range(refine_rounds):
        width = (cur[:, 1] - cur[:, 0]) / 10.0
        lo = np.clip(best_x - width / 2, full[:, 0], full[:, 1] - width)
        cur = np.stack([lo, lo + width], axis=1)
        x, y = scan(cur, coarse)
        if y > best_y:
            best_x, best_y = x, y
    return np.asarray(best_x, dtype=float), best_y
