"""Maximal-confidence discrimination of two depolarized qubit states.

The dual problem ``min l  s.t.  l*rho - q_k*rho_k >= 0`` is solved exactly:
``l_k`` is the top eigenvalue of ``q_k rho^{-1/2} rho_k rho^{-1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import DEFAULT_TOL, Tolerances, eig2_hermitian, inv_sqrt2, projector
from .errors import Singular, SingularAverage

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def theta_state(theta: float, j: int) -> np.ndarray:
    """``cos(theta/2)|H> - (-1)^(j+1) sin(theta/2)|V>``."""
    sign = 1.0 if j == 1 else -1.0
    return np.array([math.cos(theta / 2), -sign * math.sin(theta / 2)], dtype=complex)


def depolarize(theta: float, p: float, j: int) -> np.ndarray:
    """``p |psi_j><psi_j| + (1 - p) I/2``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if j not in (1, 2):
        raise ValueError("state index must be 1 or 2")
    return p * projector(theta_state(theta, j)) + (1.0 - p) * np.eye(2) / 2


def pauli_coefficients(m) -> np.ndarray:
    """Real ``(tr M, tr M X, tr M Y, tr M Z)`` of a Hermitian 2x2 matrix."""
    return np.array([np.trace(m @ s).real for s in PAULI])


@dataclass(frozen=True)
class QubitEnsemble:
    theta: float
    p: float
    q1: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.q1 <= 1.0:
            raise ValueError(f"q1 must lie in [0, 1], got {self.q1}")

    @property
    def q2(self) -> float:
        return 1.0 - self.q1

    def prior(self, k: int) -> float:
        return self.q1 if k == 1 else self.q2

    @cached_property
    def rho1(self) -> np.ndarray:
        return depolarize(self.theta, self.p, 1)

    @cached_property
    def rho2(self) -> np.ndarray:
        return depolarize(self.theta, self.p, 2)

    def rho_k(self, k: int) -> np.ndarray:
        if k not in (1, 2):
            raise ValueError("outcome must be 1 or 2")
        return self.rho1 if k == 1 else self.rho2

    @cached_property
    def rho(self) -> np.ndarray:
        return self.q1 * self.rho1 + self.q2 * self.rho2


@dataclass(frozen=True)
class ConfidenceResult:
    """Optimal confidence for one outcome together with its dual certificate.

    Attributes
    ----------
    confidence : float
        Primal value ``q_k Tr(rho_k P) / Tr(rho P)`` at the returned projector.
    dual_value : float
        Optimal ``l_k`` of the dual problem.
    optimal_projector : ndarray
        Rank-1 projector attaining the optimum.
    certificate : ndarray
        ``l_k rho - q_k rho_k``; positive semidefinite at the optimum.
    """

    k: int
    confidence: float
    dual_value: float
    optimal_projector: np.ndarray
    certificate: np.ndarray

    @property
    def certificate_min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.certificate)[0])

    @property
    def slackness(self) -> float:
        return float(np.trace(self.certificate @ self.optimal_projector).real)


def confidence_of(ens: QubitEnsemble, k: int, proj) -> float:
    """Posterior probability of state ``k`` given a click of the projector ``proj``."""
    num = ens.prior(k) * np.trace(ens.rho_k(k) @ proj).real
    den = np.trace(ens.rho @ proj).real
    return float(num / den)


def max_confidence(ens: QubitEnsemble, k: int, tol: Tolerances = DEFAULT_TOL) -> ConfidenceResult:
    rho = ens.rho
    try:
        r = inv_sqrt2(rho, tol)
    except Singular as exc:
        raise SingularAverage(f"average state is singular: {exc}") from exc
    qk = ens.prior(k)
    reduced = qk * (r @ ens.rho_k(k) @ r)
    reduced = 0.5 * (reduced + reduced.conj().T)
    _, l_k, (_, top) = eig2_hermitian(reduced, tol)
    direction = r @ top
    proj = projector(direction)
    cert = l_k * rho - qk * ens.rho_k(k)
    return ConfidenceResult(k, confidence_of(ens, k, proj), float(l_k), proj, cert)


def complementary_states(theta: float, p: float):
    """Pure states whose unambiguous discrimination realizes maximal confidence.

    Returns ``(state1, state2, overlap)`` with ``overlap = p*cos(theta)``.
    """
    x = p * math.cos(theta)
    a = math.sqrt((1.0 + x) / 2.0)
    b = math.sqrt((1.0 - x) / 2.0)
    c1 = np.array([a, -b], dtype=complex)
    c2 = np.array([a, b], dtype=complex)
    return c1, c2, float(np.vdot(c1, c2).real)


def verify_slackness(ens: QubitEnsemble, k: int, result: ConfidenceResult, atol: float = 1e-8) -> bool:
    cert = result.dual_value * ens.rho - ens.prior(k) * ens.rho_k(k)
    return float(np.trace(cert @ result.optimal_projector).real) <= atol


def certificate_is_psd(result: ConfidenceResult, atol: float = 1e-9) -> bool:
    return result.certificate_min_eig >= -atol
