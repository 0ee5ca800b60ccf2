"""Analytic-versus-oracle check suites behind ``contextual-qnd verify``."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from importlib import resources

import numpy as np

from . import bounds as B
from . import oracle as O
from . import ontic, optics
from .core import DEFAULT_TOL, Tolerances
from .maxconf import QubitEnsemble, certificate_is_psd, max_confidence, verify_slackness

SUITES = ("bounds", "maxconf", "optics", "ontic")

WORKED_POINT = {"theta": 0.42 * math.pi, "p": 0.58, "q1": 0.65}
WORKED_CONFIDENCES = (0.870719, 0.661335)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    points: int
    max_dev: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_dev <= self.tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _grid(n: int = 21):
    return np.linspace(0.0, 1.0, n)


def _max_dev(pairs) -> tuple[int, float]:
    devs = [abs(a - b) for a, b in pairs]
    return len(devs), float(max(devs))


def bounds_suite(tol: Tolerances = DEFAULT_TOL, n: int = 21) -> list[CheckResult]:
    g = _grid(n)
    out = []

    def add(name, pairs):
        pts, dev = _max_dev(pairs)
        out.append(CheckResult("bounds", name, pts, dev, tol.tol_opt))

    add("nc_usd_max", ((B.nc_usd_max(q, c), O.usd_nc_oracle(q, c)) for q in g for c in g))
    add("q_usd_max", ((B.q_usd_max(q, c), O.usd_quantum_oracle(q, c)) for q in g for c in g))
    add("nc_susd_max", ((B.nc_susd_max(q, c, N), O.susd_nc_oracle(q, c, N))
                        for N in (2, 3) for q in g for c in g))
    add("nc_clone1_max", ((B.nc_clone1_max(q, c), O.clone1_nc_oracle(q, c)) for q in g for c in g))
    add("nc_clone2_max", ((B.nc_clone2_max(q, c, a, b), O.clone2_nc_oracle(q, c, a, b))
                          for a, b in ((1, 2), (1, 3), (2, 3)) for q in g for c in g))
    # identical inputs (c = 1) are trivially clonable; the closed form is only the limit there
    cs = np.linspace(0.0, 0.99, n * n)
    add("q_clone2_max_equal", ((B.q_clone2_max_equal(c, a, b), O.clone2_quantum_oracle(0.5, math.sqrt(c), a, b)[0])
                               for a, b in ((1, 2), (1, 3), (2, 3)) for c in cs))
    return out


def random_ensembles(count: int, seed: int = 2024):
    rng = np.random.default_rng(seed)
    ens = []
    while len(ens) < count:
        e = QubitEnsemble(rng.uniform(0.05, math.pi / 2), rng.uniform(0.02, 0.98), rng.uniform(0.05, 0.95))
        ens.append(e)
    return ens


def maxconf_suite(tol: Tolerances = DEFAULT_TOL, count: int = 200) -> list[CheckResult]:
    ens = QubitEnsemble(**WORKED_POINT)
    got = [max_confidence(ens, k).confidence for k in (1, 2)]
    out = [CheckResult("maxconf", "worked_point", 2, _max_dev(zip(got, WORKED_CONFIDENCES))[1], 1e-4)]
    gap = psd = slack = 0.0
    for e in random_ensembles(count):
        for k in (1, 2):
            r = max_confidence(e, k)
            gap = max(gap, abs(O.confidence_oracle(e, k) - r.dual_value))
            psd = max(psd, -r.certificate_min_eig)
            slack = max(slack, abs(r.slackness))
            assert certificate_is_psd(r) == (r.certificate_min_eig >= -1e-9)
            assert verify_slackness(e, k, r) == (r.slackness <= 1e-8)
    out.append(CheckResult("maxconf", "primal_dual_gap", 2 * count, gap, 1e-4))
    out.append(CheckResult("maxconf", "certificate_psd", 2 * count, max(psd, 0.0), 1e-9))
    out.append(CheckResult("maxconf", "slackness", 2 * count, slack, 1e-8))
    return out


USD_GRID = [(q1, s) for q1 in (0.5, 0.7, 0.9) for s in (0.2, 0.5, 0.8)]


def random_configs(count: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        angles = rng.uniform(-math.pi, math.pi, 3)
        fam = optics.PureOverlap(rng.uniform(0, 1)) if rng.random() < 0.5 else \
            optics.NoisyTheta(rng.uniform(-math.pi, math.pi), rng.uniform(0, 1))
        yield fam, int(rng.integers(1, 3)), angles


def chain_closed_form_deviation(count: int = 1000, seed: int = 7) -> float:
    dev = 0.0
    for fam, j, (phi, mu, nu) in random_configs(count, seed):
        cfg = optics.OpticalConfig(phi, mu, nu)
        chain = optics.chain_transform(cfg, fam.state(j), stage="sagnac")
        closed = optics.closed_form_transform(fam, j, phi, mu, nu)
        dev = max(dev, float(np.max(np.abs(chain.amps - closed.amps))))
        if isinstance(fam, optics.NoisyTheta):
            chain = optics.chain_transform(cfg, fam.perp_state(j), stage="sagnac")
            closed = optics.closed_form_transform(fam, j, phi, mu, nu, perp=True)
            dev = max(dev, float(np.max(np.abs(chain.amps - closed.amps))))
    return dev


def optics_suite(tol: Tolerances = DEFAULT_TOL, configs: int = 1000) -> list[CheckResult]:
    pairs = [(optics.solve_usd_config(q1, s, tol)[1], B.q_usd_max(q1, s * s)) for q1, s in USD_GRID]
    out = [CheckResult("optics", "usd_idp_bridge", len(pairs), _max_dev(pairs)[1], tol.tol_opt)]
    _, c1, c2 = optics.solve_mc_config(WORKED_POINT["q1"], WORKED_POINT["theta"], WORKED_POINT["p"], tol)
    out.append(CheckResult("optics", "mc_worked_point", 2, _max_dev(zip((c1, c2), WORKED_CONFIDENCES))[1], 1e-4))
    out.append(CheckResult("optics", "chain_vs_closed_form", configs, chain_closed_form_deviation(configs), 1e-12))
    return out


def bundled_models() -> dict:
    """Toy models shipped with the package, by file stem."""
    out = {}
    for entry in sorted(resources.files("contextual_qnd").joinpath("data").iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            with resources.as_file(entry) as path:
                out[entry.name[:-5]] = ontic.load_model(path)
    return out


def ontic_residuals(models: dict, n_random: int = 50, seed: int = 11) -> dict:
    """Largest residual per identity over the given models plus random instances."""
    worst: dict[str, float] = {}

    def merge(res):
        for key, val in res.items():
            worst[key] = max(worst.get(key, 0.0), float(val))

    for model in models.values():
        merge(ontic.verify_identities(**model))
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        mu1, mu2, a1, a2 = ontic.random_feasible_instance(rng, size=int(rng.integers(4, 9)))
        merge(ontic.verify_identities(mu1, mu2, a1, a2, seed=i))
    return worst


def ontic_suite(tol: Tolerances = DEFAULT_TOL, n_random: int = 50) -> list[CheckResult]:
    models = bundled_models()
    res = ontic_residuals(models, n_random)
    count = len(models) + n_random
    return [CheckResult("ontic", name, count, val, tol.tol_eq) for name, val in res.items()]


_RUNNERS = {
    "bounds": bounds_suite,
    "maxconf": maxconf_suite,
    "optics": optics_suite,
    "ontic": ontic_suite,
}


def run_suite(name: str, tol: Tolerances = DEFAULT_TOL) -> list[CheckResult]:
    names = SUITES if name == "all" else (name,)
    out = []
    for n in names:
        if n not in _RUNNERS:
            raise ValueError(f"unknown suite {n!r}")
        out.extend(_RUNNERS[n](tol))
    return out
