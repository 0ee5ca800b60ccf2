"""Jones-calculus model of the displaced-Sagnac discrimination setup.

Element order: HWP(phi) on the input, PBS into an H arm with HWP(mu) and a V
arm with HWP(nu), PBS recombination into the success and failure ports, then
on the success port a routing HWP(eta) and PBS into paths p1/p2, each followed
by a correcting HWP (xi1, xi2).  The failure port is path p0.

Half-wave plate convention: ``HWP(a) = [[cos 2a, sin 2a], [sin 2a, -cos 2a]]``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .core import DEFAULT_TOL, Tolerances, maximize_1d
from .errors import DegenerateBasis, NoFeasibleConfig
from .maxconf import complementary_states

PATHS = ("p_init", "p0", "p1", "p2", "p_succ", "p_fail")
POLS = ("H", "V")
_PATH_INDEX = {name: i for i, name in enumerate(PATHS)}

QUARTER = math.pi / 4


def hwp_jones(angle: float) -> np.ndarray:
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]], dtype=complex)


def _sign(j: int) -> float:
    """``(-1)^(j+1)``."""
    if j not in (1, 2):
        raise ValueError("state index must be 1 or 2")
    return 1.0 if j == 1 else -1.0


@dataclass(frozen=True)
class OpticalConfig:
    phi: float
    mu: float
    nu: float
    xi1: float = 0.0
    xi2: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")

    def canonical(self) -> "OpticalConfig":
        """Angles reduced into ``[-pi/4, pi/4)`` (HWP angles matter mod pi/2 up to sign)."""
        red = {k: (v + QUARTER) % (2 * QUARTER) - QUARTER for k, v in asdict(self).items()}
        return OpticalConfig(**red)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PathPolState:
    """Amplitudes over (path, polarization); ``amps[path_index, pol_index]``."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.array(self.amps, dtype=complex)
        if a.shape != (len(PATHS), 2):
            raise ValueError("amplitude array must have shape (6, 2)")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_paths(cls, **paths) -> "PathPolState":
        amps = np.zeros((len(PATHS), 2), dtype=complex)
        for name, vec in paths.items():
            amps[_PATH_INDEX[name]] = vec
        return cls(amps)

    def path(self, name: str) -> np.ndarray:
        return self.amps[_PATH_INDEX[name]]

    def amplitude(self, path: str, pol: str) -> complex:
        return complex(self.amps[_PATH_INDEX[path], POLS.index(pol)])

    def path_probability(self, name: str) -> float:
        return float(np.sum(np.abs(self.path(name)) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def to_dict(self) -> dict:
        return {
            path: {pol: [self.amps[i, k].real, self.amps[i, k].imag] for k, pol in enumerate(POLS)}
            for i, path in enumerate(PATHS)
            if np.any(self.amps[i] != 0)
        }


@dataclass(frozen=True)
class PureOverlap:
    """Pure states ``sqrt((1+s)/2)|H> +- sqrt((1-s)/2)|V>`` with overlap ``s``."""

    s: float

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"s must lie in [0, 1], got {self.s}")

    def state(self, j: int) -> np.ndarray:
        a, b = math.sqrt((1 + self.s) / 2), math.sqrt((1 - self.s) / 2)
        return np.array([a, _sign(j) * b], dtype=complex)

    def perp_state(self, j: int) -> np.ndarray:
        x, y = self.state(j)
        return np.array([-y, x], dtype=complex)

    def target_state(self, j: int) -> np.ndarray:
        """State that must be discriminated unambiguously."""
        return self.state(j)

    def hv(self, j: int, phi: float):
        a, b = math.sqrt((1 + self.s) / 2), math.sqrt((1 - self.s) / 2)
        c2, s2 = math.cos(2 * phi), math.sin(2 * phi)
        sg = _sign(j)
        return a * c2 + sg * b * s2, a * s2 - sg * b * c2

    def target_hv(self, j: int, phi: float):
        return self.hv(j, phi)


@dataclass(frozen=True)
class NoisyTheta:
    """Depolarized states ``p|psi_j><psi_j| + (1-p) I/2`` with ``psi_j`` at angle ``theta``."""

    theta: float
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def state(self, j: int) -> np.ndarray:
        return np.array([math.cos(self.theta / 2), -_sign(j) * math.sin(self.theta / 2)], dtype=complex)

    def perp_state(self, j: int) -> np.ndarray:
        return np.array([math.sin(self.theta / 2), _sign(j) * math.cos(self.theta / 2)], dtype=complex)

    def target_state(self, j: int) -> np.ndarray:
        return complementary_states(self.theta, self.p)[j - 1]

    def hv(self, j: int, phi: float):
        ct, st = math.cos(self.theta / 2), math.sin(self.theta / 2)
        c2, s2 = math.cos(2 * phi), math.sin(2 * phi)
        sg = _sign(j)
        return ct * c2 - sg * st * s2, ct * s2 + sg * st * c2

    def hv_perp(self, j: int, phi: float):
        ct, st = math.cos(self.theta / 2), math.sin(self.theta / 2)
        c2, s2 = math.cos(2 * phi), math.sin(2 * phi)
        sg = _sign(j)
        return st * c2 + sg * ct * s2, st * s2 - sg * ct * c2

    def target_hv(self, j: int, phi: float):
        """Coefficients of the complementary state after HWP(phi)."""
        x = self.p * math.cos(self.theta)
        a, b = math.sqrt((1 + x) / 2), math.sqrt((1 - x) / 2)
        c2, s2 = math.cos(2 * phi), math.sin(2 * phi)
        sg = _sign(j)
        return a * c2 - sg * b * s2, a * s2 + sg * b * c2


InputFamily = PureOverlap | NoisyTheta


# -- transformations ----------------------------------------------------------


def closed_form_transform(family: InputFamily, j: int, phi: float, mu: float, nu: float,
                          perp: bool = False) -> PathPolState:
    """Success/failure amplitudes of the interferometer in closed form."""
    if perp:
        if not isinstance(family, NoisyTheta):
            raise ValueError("orthogonal-state branch is defined for the noisy family only")
        h, v = family.hv_perp(j, phi)
    else:
        h, v = family.hv(j, phi)
    c2m, s2m = math.cos(2 * mu), math.sin(2 * mu)
    c2n, s2n = math.cos(2 * nu), math.sin(2 * nu)
    return PathPolState.from_paths(
        p_succ=[h * c2m, -v * c2n],
        p_fail=[v * s2n, h * s2m],
    )


def _pbs(vec):
    """Polarizing beam splitter: (transmitted H part, reflected V part)."""
    return np.array([vec[0], 0.0], dtype=complex), np.array([0.0, vec[1]], dtype=complex)


def chain_transform(config: OpticalConfig, vec, stage: str = "full") -> PathPolState:
    """Propagate a polarization state through the setup element by element.

    ``stage="sagnac"`` stops at the success/failure ports; ``"full"`` continues
    to the output paths p0, p1, p2.
    """
    if stage not in ("sagnac", "full"):
        raise ValueError("stage must be 'sagnac' or 'full'")
    vec = np.asarray(vec, dtype=complex)
    x = hwp_jones(config.phi) @ vec
    arm_h, arm_v = _pbs(x)
    arm_h = hwp_jones(config.mu) @ arm_h
    arm_v = hwp_jones(config.nu) @ arm_v
    # recombining PBS: H of the H arm and V of the V arm exit together
    h_of_h, v_of_h = _pbs(arm_h)
    h_of_v, v_of_v = _pbs(arm_v)
    succ = h_of_h + v_of_v
    fail = v_of_h + h_of_v
    if stage == "sagnac":
        return PathPolState.from_paths(p_succ=succ, p_fail=fail)
    routed = hwp_jones(config.eta) @ succ
    to_p1, to_p2 = _pbs(routed)
    return PathPolState.from_paths(
        p0=fail,
        p1=hwp_jones(config.xi1) @ to_p1,
        p2=hwp_jones(config.xi2) @ to_p2,
    )


def success_probs(family: InputFamily, phi: float, mu: float, nu: float):
    a, b = math.cos(2 * mu) ** 2, math.cos(2 * nu) ** 2
    out = []
    for j in (1, 2):
        h, v = family.hv(j, phi)
        out.append(h * h * a + v * v * b)
    return tuple(out)


def orthogonality_residual(family: InputFamily, phi: float, mu: float, nu: float) -> float:
    """Signed overlap of the two success-port states to be separated."""
    a, b = math.cos(2 * mu) ** 2, math.cos(2 * nu) ** 2
    h1, v1 = family.target_hv(1, phi)
    h2, v2 = family.target_hv(2, phi)
    return h1 * h2 * a + v1 * v2 * b


def failure_post_states(family: InputFamily, phi: float, mu: float, nu: float, tol: float = 1e-12):
    """Normalized failure-port states (``None`` where the port is empty)."""
    out = []
    for j in (1, 2):
        h, v = family.target_hv(j, phi)
        vec = np.array([v * math.sin(2 * nu), h * math.sin(2 * mu)])
        nrm = np.linalg.norm(vec)
        out.append(vec / nrm if nrm > tol else None)
    return tuple(out)


def failure_overlap(family: InputFamily, phi: float, mu: float, nu: float) -> float:
    """``|<phi_1|phi_2>|``; an empty failure port counts as a perfect match."""
    f1, f2 = failure_post_states(family, phi, mu, nu)
    if f1 is None or f2 is None:
        return 1.0
    return float(abs(f1 @ f2))


def _half_arctan(num: float, den: float, tol: float = 1e-15) -> float:
    """``0.5 * arctan(num / den)`` with the limits ``+-pi/4`` at ``den = 0``."""
    if abs(den) <= tol:
        return 0.0 if abs(num) <= tol else math.copysign(QUARTER, num * (1.0 if den >= 0 else -1.0))
    return 0.5 * math.atan(num / den)


def correction_angles(family: InputFamily, phi: float, mu: float, nu: float):
    """``(xi1, xi2)`` of the HWPs that rotate p1/p2 onto the failure post state."""
    h1, v1 = family.target_hv(1, phi)
    h2, v2 = family.target_hv(2, phi)
    s2m, s2n = math.sin(2 * mu), math.sin(2 * nu)
    return _half_arctan(h1 * s2m, v1 * s2n), _half_arctan(h2 * s2n, v2 * s2m)


def routing_angle(family: InputFamily, phi: float, mu: float, nu: float) -> float:
    """HWP angle sending the outcome-1 success state to H (and outcome 2 to V)."""
    c2m, c2n = math.cos(2 * mu), math.cos(2 * nu)
    h1, v1 = family.target_hv(1, phi)
    chi1 = (h1 * c2m, -v1 * c2n)
    if math.hypot(*chi1) > 1e-12:
        return 0.5 * math.atan2(chi1[1], chi1[0])
    h2, v2 = family.target_hv(2, phi)
    chi2 = (h2 * c2m, -v2 * c2n)
    return 0.5 * math.atan2(chi2[0], -chi2[1])


# -- constrained search -------------------------------------------------------

_BRANCHES = ("nu0", "mu0")


def _branch_weights(family: InputFamily, phi: float, branch: str):
    """``(cos^2 2mu, cos^2 2nu)`` solving the orthogonality constraint on a branch.

    On branch ``nu0`` the V-arm plate sits at 0 (``cos^2 2nu = 1``), on
    ``mu0`` the H-arm plate does; either choice empties one failure component
    so that the two failure post states coincide.
    """
    h1, v1 = family.target_hv(1, phi)
    h2, v2 = family.target_hv(2, phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        if branch == "nu0":
            den = h1 * h2
            a = -v1 * v2 / den if den != 0 else math.nan
            return a, 1.0
        den = v1 * v2
        b = -h1 * h2 / den if den != 0 else math.nan
        return 1.0, b


def _feasible(family, phi, branch, slack=0.0) -> bool:
    a, b = _branch_weights(family, phi, branch)
    return (-slack <= a <= 1.0 + slack) and (-slack <= b <= 1.0 + slack)


def _angles(a: float, b: float):
    a = min(max(a, 0.0), 1.0)
    b = min(max(b, 0.0), 1.0)
    return 0.5 * math.acos(math.sqrt(a)), 0.5 * math.acos(math.sqrt(b))


def _bisect_edge(pred: Callable[[float], bool], good: float, bad: float, xtol: float = 1e-15) -> float:
    while abs(good - bad) > xtol * (1.0 + abs(good)):
        mid = 0.5 * (good + bad)
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good


def feasible_intervals(family: InputFamily, branch: str, grid: int = 4001):
    """Maximal phi-intervals in ``[-pi/4, pi/4]`` where a branch is feasible."""
    phis = np.linspace(-QUARTER, QUARTER, grid)
    ok = np.array([_feasible(family, float(x), branch) for x in phis])
    pred = lambda x: _feasible(family, x, branch)  # noqa: E731
    out = []
    i = 0
    while i < grid:
        if not ok[i]:
            i += 1
            continue
        start = i
        while i + 1 < grid and ok[i + 1]:
            i += 1
        lo = float(phis[start]) if start == 0 else _bisect_edge(pred, float(phis[start]), float(phis[start - 1]))
        hi = float(phis[i]) if i == grid - 1 else _bisect_edge(pred, float(phis[i]), float(phis[i + 1]))
        out.append((lo, hi))
        i += 1
    return out


def _search(family: InputFamily, objective: Callable[[float, float, float], float]):
    """Maximize ``objective(phi, mu, nu)`` over the constraint slices."""
    best = None
    for branch in _BRANCHES:
        def f(phi, branch=branch):
            if not _feasible(family, phi, branch):
                return -math.inf
            mu, nu = _angles(*_branch_weights(family, phi, branch))
            return objective(phi, mu, nu)

        for lo, hi in feasible_intervals(family, branch):
            candidates = [(lo, f(lo)), (hi, f(hi))]
            if hi - lo > 1e-12:
                candidates.append(maximize_1d(f, lo, hi, grid=2001))
            for phi, val in candidates:
                if math.isfinite(val) and (best is None or val > best[1]):
                    best = (phi, val, branch)
    if best is None:
        raise NoFeasibleConfig("no configuration satisfies the constraints")
    phi, val, branch = best
    mu, nu = _angles(*_branch_weights(family, phi, branch))
    return phi, mu, nu, val


def _complete_config(family: InputFamily, phi: float, mu: float, nu: float) -> OpticalConfig:
    xi1, xi2 = correction_angles(family, phi, mu, nu)
    eta = routing_angle(family, phi, mu, nu)
    return OpticalConfig(phi, mu, nu, xi1, xi2, eta)


def _check_constraints(family, cfg: OpticalConfig, tol: Tolerances):
    res = orthogonality_residual(family, cfg.phi, cfg.mu, cfg.nu)
    ovl = failure_overlap(family, cfg.phi, cfg.mu, cfg.nu)
    if abs(res) > tol.tol_opt or ovl < 1.0 - tol.tol_opt:
        raise NoFeasibleConfig(f"constraints violated: residual {res:.3g}, failure overlap {ovl:.9f}")
    return res, ovl


def solve_usd_config(q1: float, s: float, tol: Tolerances = DEFAULT_TOL):
    """Plate angles maximizing ``q1*alpha1 + q2*alpha2`` for pure inputs of overlap ``s``.

    Returns ``(config, achieved)``.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if not 0.0 <= q1 <= 1.0:
        raise ValueError(f"q1 must lie in [0, 1], got {q1}")
    family = PureOverlap(s)

    def objective(phi, mu, nu):
        a1, a2 = success_probs(family, phi, mu, nu)
        return q1 * a1 + (1.0 - q1) * a2

    phi, mu, nu, val = _search(family, objective)
    cfg = _complete_config(family, phi, mu, nu)
    _check_constraints(family, cfg, tol)
    return cfg, val


def mc_outcome_prob(theta: float, p: float, phi: float, mu: float, nu: float, j: int, k: int,
                    tol: Tolerances = DEFAULT_TOL) -> float:
    """Probability that a success-port click in basis state ``k`` follows input ``rho_j``."""
    fam = NoisyTheta(theta, p)
    a, b = math.cos(2 * mu) ** 2, math.cos(2 * nu) ** 2
    hc, vc = fam.target_hv(k, phi)
    norm = hc * hc * a + vc * vc * b
    if norm <= tol.tol_eq:
        raise DegenerateBasis(f"measurement vector {k} vanishes at this configuration")
    h, v = fam.hv(j, phi)
    hb, vb = fam.hv_perp(j, phi)
    f = (h * hc * a + v * vc * b) ** 2
    fbar = (hb * hc * a + vb * vc * b) ** 2
    return ((1 + p) * f + (1 - p) * fbar) / (2 * norm)


def mc_confidences(q1: float, theta: float, p: float, phi: float, mu: float, nu: float):
    q = (q1, 1.0 - q1)
    out = []
    for k in (1, 2):
        probs = [mc_outcome_prob(theta, p, phi, mu, nu, j, k) for j in (1, 2)]
        den = q[0] * probs[0] + q[1] * probs[1]
        out.append(q[k - 1] * probs[k - 1] / den)
    return tuple(out)


def solve_mc_config(q1: float, theta: float, p: float, tol: Tolerances = DEFAULT_TOL):
    """Plate angles for maximal-confidence discrimination of depolarized states.

    The setup is configured to unambiguously discriminate the complementary
    states; returns ``(config, C1, C2)``.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if not 0.0 < theta <= math.pi / 2 + 1e-12:
        raise ValueError(f"theta must lie in (0, pi/2], got {theta}")
    family = NoisyTheta(theta, p)

    def objective(phi, mu, nu):
        try:
            return sum(mc_confidences(q1, theta, p, phi, mu, nu))
        except (DegenerateBasis, ZeroDivisionError):
            return -math.inf

    phi, mu, nu, _ = _search(family, objective)
    cfg = _complete_config(family, phi, mu, nu)
    _check_constraints(family, cfg, tol)
    c1, c2 = mc_confidences(q1, theta, p, phi, mu, nu)
    return cfg, c1, c2


def simulate_mc_confidences(q1: float, theta: float, p: float, config: OpticalConfig):
    """Confidences from the element-by-element chain with depolarized inputs.

    Each ``rho_j`` is propagated as the mixture of ``psi_j`` (weight
    ``(1+p)/2``) and its orthogonal partner (weight ``(1-p)/2``).
    """
    fam = NoisyTheta(theta, p)
    q = (q1, 1.0 - q1)
    click = np.zeros((2, 2))  # [state j, path k]
    for j in (1, 2):
        for vec, w in ((fam.state(j), (1 + p) / 2), (fam.perp_state(j), (1 - p) / 2)):
            out = chain_transform(config, vec)
            for k, path in ((1, "p1"), (2, "p2")):
                click[j - 1, k - 1] += w * out.path_probability(path)
    return tuple(q[k] * click[k, k] / (q[0] * click[0, k] + q[1] * click[1, k]) for k in (0, 1))


def usd_report(q1: float, s: float, config: OpticalConfig) -> dict:
    """Alphas, residuals and re-simulated path probabilities of a USD configuration."""
    family = PureOverlap(s)
    a1, a2 = success_probs(family, config.phi, config.mu, config.nu)
    sim = [chain_transform(config, family.state(j)) for j in (1, 2)]
    return {
        "alphas": [a1, a2],
        "achieved": q1 * a1 + (1 - q1) * a2,
        "orthogonality_residual": orthogonality_residual(family, config.phi, config.mu, config.nu),
        "failure_overlap": failure_overlap(family, config.phi, config.mu, config.nu),
        "simulated": {
            f"state{j}": {path: sim[j - 1].path_probability(path) for path in ("p0", "p1", "p2")}
            for j in (1, 2)
        },
    }
