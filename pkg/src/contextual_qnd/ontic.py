"""Finite ontological models for non-demolition measurements.

Ontic spaces are ``range(size)``; integrals become sums.  Product spaces are
flattened row-major with the *system* index slow, i.e. the pair
``(s, a)`` of a system point ``s`` and an auxiliary point ``a`` lives at
``s * aux_size + a``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .core import DEFAULT_TOL, Tolerances
from .errors import (
    InfeasibleAlpha,
    InfeasiblePostStates,
    NoNonnegativeDual,
    SpaceMismatch,
    UnknownOutcome,
)

AUX_SIZE = 3  # failure, outcome 1, outcome 2


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EpistemicState:
    """Probability distribution over a finite ontic space.

    Entries down to ``-tol_eq`` are clamped to zero; anything more negative,
    or a total mass off by more than ``tol_eq``, is rejected.
    """

    weights: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a non-empty finite vector")
        if np.any(w < -self.tol.tol_eq):
            raise ValueError("weights must be nonnegative")
        w = np.where(w < 0, 0.0, w)
        if abs(w.sum() - 1.0) > self.tol.tol_eq:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def size(self) -> int:
        return self.weights.size

    def support(self) -> np.ndarray:
        return self.weights > self.tol.tol_eq

    def to_json(self) -> list:
        return self.weights.tolist()

    @classmethod
    def from_json(cls, data) -> "EpistemicState":
        return cls(np.asarray(data, dtype=float))

    def __eq__(self, other):
        return isinstance(other, EpistemicState) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


def point_mass(size: int, index: int) -> EpistemicState:
    w = np.zeros(size)
    w[index] = 1.0
    return EpistemicState(w)


@dataclass(frozen=True)
class StochasticMap:
    """Column-stochastic kernel ``kernel[to, from]`` between ontic spaces."""

    kernel: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        k = np.array(self.kernel, dtype=float)
        if k.ndim != 2 or k.size == 0 or not np.all(np.isfinite(k)):
            raise ValueError("kernel must be a non-empty finite matrix")
        if np.any(k < -self.tol.tol_eq):
            raise ValueError("kernel entries must be nonnegative")
        k = np.where(k < 0, 0.0, k)
        cols = k.sum(axis=0)
        if np.any(np.abs(cols - 1.0) > self.tol.tol_eq):
            raise ValueError(f"kernel columns must sum to 1 (worst {cols[np.argmax(np.abs(cols - 1))]!r})")
        object.__setattr__(self, "kernel", _frozen(k))

    @property
    def from_size(self) -> int:
        return self.kernel.shape[1]

    @property
    def to_size(self) -> int:
        return self.kernel.shape[0]

    def to_json(self) -> list:
        return self.kernel.tolist()

    @classmethod
    def from_json(cls, data) -> "StochasticMap":
        return cls(np.asarray(data, dtype=float))

    def __eq__(self, other):
        return isinstance(other, StochasticMap) and np.array_equal(self.kernel, other.kernel)

    def __hash__(self):
        return hash((self.kernel.shape, self.kernel.tobytes()))


@dataclass(frozen=True)
class ResponseSet:
    """Response functions ``functions[k, lam]`` of a measurement."""

    functions: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        f = np.array(self.functions, dtype=float)
        if f.ndim != 2 or f.size == 0 or not np.all(np.isfinite(f)):
            raise ValueError("response functions must form a finite 2-D array")
        eps = self.tol.tol_eq
        if np.any(f < -eps) or np.any(f > 1 + eps):
            raise ValueError("response values must lie in [0, 1]")
        if np.any(np.abs(f.sum(axis=0) - 1.0) > eps):
            raise ValueError("response functions must sum to 1 at every ontic point")
        object.__setattr__(self, "functions", _frozen(np.clip(f, 0.0, 1.0)))

    @property
    def size(self) -> int:
        return self.functions.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.functions.shape[0]

    def __eq__(self, other):
        return isinstance(other, ResponseSet) and np.array_equal(self.functions, other.functions)

    def __hash__(self):
        return hash((self.functions.shape, self.functions.tobytes()))

    def probability(self, mu: EpistemicState, k: int) -> float:
        _check_same(self.size, mu.size)
        if not 0 <= k < self.n_outcomes:
            raise UnknownOutcome(k)
        return float(self.functions[k] @ mu.weights)


@dataclass(frozen=True)
class DirectMeasurement:
    """Response set whose functions are idempotent and mutually orthogonal."""

    base: ResponseSet

    def __post_init__(self):
        f = self.base.functions
        eps = self.base.tol.tol_eq
        prod = f[:, None, :] * f[None, :, :]
        target = np.eye(f.shape[0])[:, :, None] * f[None, :, :]
        if np.any(np.abs(prod - target) > eps):
            raise ValueError("direct measurement requires 0/1 responses with disjoint supports")

    @property
    def functions(self) -> np.ndarray:
        return self.base.functions


def aux_direct_measurement(size: int = AUX_SIZE) -> DirectMeasurement:
    """Read-out of the auxiliary point: outcome ``k`` fires on point ``k``."""
    return DirectMeasurement(ResponseSet(np.eye(size)))


@dataclass(frozen=True)
class QndMeasurement:
    """Transformation into system x auxiliary space followed by a direct read-out."""

    map: StochasticMap
    direct: DirectMeasurement
    post_states: tuple
    alphas: tuple

    @property
    def aux_size(self) -> int:
        return self.direct.base.size

    @property
    def post_size(self) -> int:
        return self.map.to_size // self.aux_size

    def kernel3(self) -> np.ndarray:
        """Kernel reshaped to ``[post, aux, system]``."""
        return self.map.kernel.reshape(self.post_size, self.aux_size, self.map.from_size)


def _check_same(a: int, b: int):
    if a != b:
        raise SpaceMismatch(f"ontic space sizes differ: {a} vs {b}")


def confusability_both(mu: EpistemicState, nu: EpistemicState):
    """Both one-sided confusabilities ``(sum_{supp mu} nu, sum_{supp nu} mu)``."""
    _check_same(mu.size, nu.size)
    forward = float(nu.weights[mu.support()].sum())
    backward = float(mu.weights[nu.support()].sum())
    return forward, backward


def confusability(mu: EpistemicState, nu: EpistemicState) -> float:
    """Mass of ``nu`` on the support of ``mu``."""
    return confusability_both(mu, nu)[0]


def confusability_asymmetry(mu: EpistemicState, nu: EpistemicState) -> float:
    fwd, bwd = confusability_both(mu, nu)
    return fwd - bwd


def apply_map(lmap: StochasticMap, mu: EpistemicState) -> EpistemicState:
    _check_same(lmap.from_size, mu.size)
    return EpistemicState(lmap.kernel @ mu.weights, lmap.tol)


def tensor(a: EpistemicState, b: EpistemicState) -> EpistemicState:
    return EpistemicState(np.outer(a.weights, b.weights).ravel())


def tensor_map(a: StochasticMap, b: StochasticMap) -> StochasticMap:
    """Product kernel acting on flattened product spaces (first factor slow)."""
    return StochasticMap(np.kron(a.kernel, b.kernel))


def outcome_probability(qnd: QndMeasurement, mu: EpistemicState, k: int) -> float:
    _check_same(qnd.map.from_size, mu.size)
    if not 0 <= k < qnd.aux_size:
        raise UnknownOutcome(k)
    joint = (qnd.map.kernel @ mu.weights).reshape(qnd.post_size, qnd.aux_size)
    return float(joint.sum(axis=0) @ qnd.direct.functions[k])


def _min_max_dual(target: np.ndarray, other: np.ndarray, tol: Tolerances) -> np.ndarray:
    # stage 1: minimize t subject to 0 <= x <= t, <x, target> = 1, <x, other> = 0
    n = target.size
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = np.hstack([np.eye(n), -np.ones((n, 1))])
    a_eq = np.vstack([np.append(target, 0.0), np.append(other, 0.0)])
    b_eq = np.array([1.0, 0.0])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * (n + 1), method="highs")
    if res.status != 0:
        raise NoNonnegativeDual("no nonnegative vector separates the two states")
    t_star = res.x[-1]
    # stage 2: among minimizers of the max entry, take the least total mass
    res2 = linprog(np.ones(n), A_ub=None, b_ub=None, A_eq=a_eq[:, :n], b_eq=b_eq,
                   bounds=[(0, t_star * (1 + 1e-12) + 1e-12)] * n, method="highs")
    x = res2.x if res2.status == 0 else res.x[:n]
    x = np.where(x < tol.tol_eq * 1e-3, 0.0, x)
    # scale so the normalization equality holds exactly
    return x / (x @ target)


def dual_vectors(mu1: EpistemicState, mu2: EpistemicState, tol: Tolerances = DEFAULT_TOL):
    """Nonnegative ``(mubar1, mubar2)`` with ``<mubar_k, mu_l> = delta_kl``.

    Among all solutions, each vector minimizes its largest entry (ties broken
    by least total mass), which keeps the failure response nonnegative for the
    widest range of success probabilities.
    """
    _check_same(mu1.size, mu2.size)
    if np.allclose(mu1.weights, mu2.weights, atol=tol.tol_eq):
        raise NoNonnegativeDual("identical states cannot be separated")
    bar1 = _min_max_dual(mu1.weights, mu2.weights, tol)
    bar2 = _min_max_dual(mu2.weights, mu1.weights, tol)
    return bar1, bar2


def failure_response(bar1, bar2, alpha1: float, alpha2: float) -> np.ndarray:
    return 1.0 - alpha1 * np.asarray(bar1) - alpha2 * np.asarray(bar2)


def _failure_kernel(mus, posts, alphas, xi0, tol: Tolerances) -> np.ndarray:
    """Nonnegative ``F[post, sys]`` with columns summing to ``xi0`` and ``F mu_j = (1-a_j) post_j``."""
    n_post, n_sys = posts[0].size, mus[0].size
    nvar = n_post * n_sys
    rows, rhs = [], []
    for lam in range(n_sys):
        r = np.zeros((n_post, n_sys))
        r[:, lam] = 1.0
        rows.append(r.ravel())
        rhs.append(xi0[lam])
    for mu, post, alpha in zip(mus, posts, alphas):
        for s in range(n_post):
            r = np.zeros((n_post, n_sys))
            r[s, :] = mu.weights
            rows.append(r.ravel())
            rhs.append((1.0 - alpha) * post.weights[s])
    res = linprog(np.zeros(nvar), A_eq=np.array(rows), b_eq=np.array(rhs),
                  bounds=[(0, None)] * nvar, method="highs")
    if res.status != 0:
        raise InfeasiblePostStates("no nonnegative failure branch realizes these post-measurement states")
    return res.x.reshape(n_post, n_sys)


def canonical_post_states(mu1, mu2, alpha1, alpha2, tol: Tolerances = DEFAULT_TOL):
    """Post-measurement states left by the diagonal failure branch.

    The failure branch keeps the ontic point and reweights it by the failure
    response, so ``post_j`` is proportional to ``xi0 * mu_j``.  When
    ``alpha_j == 1`` there is no failure mass and ``mu_j`` itself is used.
    """
    bar1, bar2 = dual_vectors(mu1, mu2, tol)
    xi0 = failure_response(bar1, bar2, alpha1, alpha2)
    posts = []
    for mu in (mu1, mu2):
        w = np.clip(xi0, 0.0, None) * mu.weights
        posts.append(EpistemicState(w / w.sum()) if w.sum() > tol.tol_eq else mu)
    return tuple(posts)


def build_usd_qnd(mu1: EpistemicState, mu2: EpistemicState, alpha1: float, alpha2: float,
                  post1: EpistemicState | None = None, post2: EpistemicState | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> QndMeasurement:
    """Non-demolition measurement that unambiguously discriminates ``mu1`` and ``mu2``.

    Success branches are ``alpha_k * post_k (x) sigma_k (x) mubar_k``.  The
    failure branch sends the residual column mass ``xi0`` to ``sigma_0`` while
    leaving ``(1 - alpha_j) post_j`` on the system, so every input ``mu_j`` is
    mapped to ``post_j (x) (alpha_j sigma_j + (1 - alpha_j) sigma_0)``.

    If no post states are given the diagonal failure branch is used (see
    :func:`canonical_post_states`); otherwise the failure kernel is found by
    a feasibility LP and :class:`InfeasiblePostStates` is raised when none exists.
    """
    _check_same(mu1.size, mu2.size)
    for a in (alpha1, alpha2):
        if not (-tol.tol_eq <= a <= 1 + tol.tol_eq):
            raise InfeasibleAlpha(f"alpha must lie in [0, 1], got {a!r}")
    bar1, bar2 = dual_vectors(mu1, mu2, tol)
    xi0 = failure_response(bar1, bar2, alpha1, alpha2)
    if np.any(xi0 < -tol.tol_eq):
        worst = int(np.argmin(xi0))
        raise InfeasibleAlpha(f"failure response is {xi0[worst]:.6g} < 0 at ontic point {worst}")
    xi0 = np.clip(xi0, 0.0, None)

    if (post1 is None) != (post2 is None):
        raise ValueError("give both post states or neither")
    n_sys = mu1.size
    if post1 is None:
        post1, post2 = canonical_post_states(mu1, mu2, alpha1, alpha2, tol)
        fail = np.stack([w * xi0 for w in np.eye(n_sys)], axis=1)  # diag(xi0)
    else:
        _check_same(post1.size, post2.size)
        fail = _failure_kernel((mu1, mu2), (post1, post2), (alpha1, alpha2), xi0, tol)

    n_post = post1.size
    k3 = np.zeros((n_post, AUX_SIZE, n_sys))
    k3[:, 0, :] = fail
    k3[:, 1, :] = alpha1 * np.outer(post1.weights, bar1)
    k3[:, 2, :] = alpha2 * np.outer(post2.weights, bar2)
    lmap = StochasticMap(k3.reshape(n_post * AUX_SIZE, n_sys), tol)
    return QndMeasurement(lmap, aux_direct_measurement(), (post1, post2), (float(alpha1), float(alpha2)))


def extract_response_functions(qnd: QndMeasurement) -> ResponseSet:
    """Effective response functions on the input space (marginalize the post system)."""
    k3 = qnd.kernel3()
    per_aux = k3.sum(axis=0)  # [aux, system]
    return ResponseSet(qnd.direct.functions @ per_aux, qnd.map.tol)


def check_confusability_preserved(lmap: StochasticMap, mu: EpistemicState, nu: EpistemicState,
                                  tol: Tolerances = DEFAULT_TOL):
    """Confusability before and after ``lmap`` and whether it is preserved."""
    _check_same(mu.size, nu.size)
    before = confusability(mu, nu)
    after = confusability(apply_map(lmap, mu), apply_map(lmap, nu))
    return before, after, abs(before - after) <= tol.tol_eq


# -- bundled toy model and identity replay -----------------------------------

TOY_MU1 = (0.5, 0.5, 0.0, 0.0)
TOY_MU2 = (0.5, 0.0, 0.5, 0.0)


def toy_model():
    """The 4-point model with overlapping supports; confusability 1/2."""
    return EpistemicState(TOY_MU1), EpistemicState(TOY_MU2)


def random_feasible_instance(rng: np.random.Generator, size: int = 6, alpha_equal: bool = True):
    """Random pair of states with overlapping supports and a feasible alpha pair.

    The ontic points are split into a shared block and two nonempty exclusive
    blocks (plus unused points), which guarantees nonnegative duals.
    """
    labels = np.concatenate([[0, 1, 2], rng.integers(0, 4, size - 3)])
    rng.shuffle(labels)
    w1 = np.where(np.isin(labels, (0, 1)), rng.uniform(0.1, 1.0, size), 0.0)
    w2 = np.where(labels == 0, w1, 0.0) + np.where(labels == 2, rng.uniform(0.1, 1.0, size), 0.0)
    mu1 = EpistemicState(w1 / w1.sum())
    mu2 = EpistemicState(w2 / w2.sum())
    bar1, bar2 = dual_vectors(mu1, mu2)
    if alpha_equal:
        a = rng.uniform(0.0, min(1.0, 1.0 / np.max(bar1 + bar2)))
        return mu1, mu2, a, a
    a1 = rng.uniform(0.0, min(1.0, 1.0 / bar1.max()))
    slack = (1.0 - a1 * bar1)[bar2 > 0] / bar2[bar2 > 0]
    a2 = rng.uniform(0.0, min(1.0, slack.min()))
    return mu1, mu2, a1, a2


def verify_identities(mu1: EpistemicState, mu2: EpistemicState, alpha1: float, alpha2: float,
                      post1=None, post2=None, n_random: int = 20, seed: int = 0,
                      tol: Tolerances = DEFAULT_TOL) -> dict:
    """Replay the non-demolition identities on one model instance.

    Returns a dict of named residuals (each should be <= ``tol.tol_eq``).
    """
    qnd = build_usd_qnd(mu1, mu2, alpha1, alpha2, post1, post2, tol)
    p1, p2 = qnd.post_states
    resp = extract_response_functions(qnd)
    rng = np.random.default_rng(seed)
    residuals = {}

    residuals["success_prob"] = max(abs(outcome_probability(qnd, mu1, 1) - alpha1),
                                    abs(outcome_probability(qnd, mu2, 2) - alpha2))
    residuals["no_error"] = max(outcome_probability(qnd, mu1, 2), outcome_probability(qnd, mu2, 1))

    # per-direction confusability relation c = c'(1 - alpha)
    c = confusability(mu1, mu2)
    c_fwd, c_bwd = confusability_both(p1, p2)
    residuals["confusability_relation"] = max(abs(c - c_fwd * (1 - alpha2)),
                                              abs(confusability(mu2, mu1) - c_bwd * (1 - alpha1)))
    before, after, _ = check_confusability_preserved(qnd.map, mu1, mu2, tol)
    residuals["confusability_preserved"] = abs(before - after)

    # transformed states factorize as post (x) (alpha sigma_j + (1-alpha) sigma_0)
    fact = 0.0
    for j, (mu, post, a) in enumerate(((mu1, p1, alpha1), (mu2, p2, alpha2)), start=1):
        aux = np.zeros(AUX_SIZE)
        aux[0], aux[j] = 1.0 - a, a
        expected = np.outer(post.weights, aux).ravel()
        fact = max(fact, float(np.max(np.abs(qnd.map.kernel @ mu.weights - expected))))
    residuals["factorization"] = fact

    norm = resp_agree = 0.0
    for _ in range(n_random):
        mu = EpistemicState(rng.dirichlet(np.ones(mu1.size)))
        probs = [outcome_probability(qnd, mu, k) for k in range(AUX_SIZE)]
        norm = max(norm, abs(sum(probs) - 1.0))
        resp_agree = max(resp_agree, max(abs(resp.probability(mu, k) - probs[k]) for k in range(AUX_SIZE)))
    residuals["normalization"] = norm
    residuals["response_agreement"] = resp_agree
    return residuals


def load_model(path) -> dict:
    """Read a model description ``{"mu1", "mu2", "alpha1", "alpha2", ["post1", "post2"]}``."""
    with open(path) as fh:
        data = json.load(fh)
    model = {
        "mu1": EpistemicState.from_json(data["mu1"]),
        "mu2": EpistemicState.from_json(data["mu2"]),
        "alpha1": float(data["alpha1"]),
        "alpha2": float(data["alpha2"]),
    }
    if "post1" in data:
        model["post1"] = EpistemicState.from_json(data["post1"])
        model["post2"] = EpistemicState.from_json(data["post2"])
    return model


def qnd_to_json(qnd: QndMeasurement) -> dict:
    return {
        "map": qnd.map.to_json(),
        "aux_size": qnd.aux_size,
        "post_states": [p.to_json() for p in qnd.post_states],
        "alphas": list(qnd.alphas),
    }


def random_response_set(rng: np.random.Generator, n_outcomes: int, size: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_outcomes), size=size).T


def corrupt_direct(rng: np.random.Generator, functions: Sequence) -> np.ndarray:
    """Copy of a 0/1 response set with one column replaced by an interior split."""
    f = np.array(functions, dtype=float)
    lam = rng.integers(f.shape[1])
    split = rng.dirichlet(np.ones(f.shape[0]))
    while np.max(split) > 1 - 1e-3:
        split = rng.dirichlet(np.ones(f.shape[0]))
    f[:, lam] = split
    return f
