import math

import numpy as np
import pytest

from contextual_qnd.errors import SingularAverage
from contextual_qnd.maxconf import (
    QubitEnsemble,
    certificate_is_psd,
    complementary_states,
    confidence_of,
    depolarize,
    max_confidence,
    theta_state,
    verify_slackness,
)

WORKED = QubitEnsemble(0.42 * math.pi, 0.58, 0.65)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def random_ensembles(rng, n):
    return [QubitEnsemble(rng.uniform(0.01, math.pi / 2), rng.uniform(0.0, 0.999), rng.uniform(0.02, 0.98))
            for _ in range(n)]


def test_theta_states():
    assert np.allclose(theta_state(0.0, 1), [1, 0])
    assert np.allclose(theta_state(math.pi / 2, 1), [1 / math.sqrt(2), -1 / math.sqrt(2)])
    assert np.allclose(theta_state(math.pi / 2, 2), [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_depolarize():
    assert np.allclose(depolarize(0.3, 1.0, 1), np.outer(theta_state(0.3, 1), theta_state(0.3, 1)))
    assert np.allclose(depolarize(0.3, 0.0, 2), np.eye(2) / 2)
    rho = depolarize(0.42 * math.pi, 0.58, 1)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho) == pytest.approx([0.21, 0.79])
    with pytest.raises(ValueError):
        depolarize(0.1, 1.2, 1)
    with pytest.raises(ValueError):
        depolarize(0.1, 0.5, 3)


def test_worked_point():
    c1, c2 = (max_confidence(WORKED, k) for k in (1, 2))
    assert c1.confidence == pytest.approx(0.870719, abs=1e-4)
    assert c2.confidence == pytest.approx(0.661335, abs=1e-4)
    for k, r in ((1, c1), (2, c2)):
        assert verify_slackness(WORKED, k, r)
        assert certificate_is_psd(r)


def test_pure_states_give_certainty():
    e = QubitEnsemble(math.pi / 4, 1.0 - 1e-12, 0.5)
    for k in (1, 2):
        assert max_confidence(e, k).confidence == pytest.approx(1.0, abs=1e-6)


def test_identical_states_give_prior():
    e = QubitEnsemble(0.0, 0.5, 0.65)
    r1, r2 = max_confidence(e, 1), max_confidence(e, 2)
    assert r1.confidence == pytest.approx(0.65)
    assert r2.confidence == pytest.approx(0.35)
    assert verify_slackness(e, 1, r1)
    assert np.allclose(r1.certificate, 0, atol=1e-12)


def test_singular_average_rejected():
    with pytest.raises(SingularAverage):
        max_confidence(QubitEnsemble(0.0, 1.0, 0.5), 1)
    with pytest.raises(SingularAverage):
        max_confidence(QubitEnsemble(0.3, 1.0, 1.0), 1)


def test_ensemble_validation():
    with pytest.raises(ValueError):
        QubitEnsemble(0.1, -0.1, 0.5)
    with pytest.raises(ValueError):
        QubitEnsemble(0.1, 0.5, 1.5)
    with pytest.raises(ValueError):
        WORKED.rho_k(3)


def test_strong_duality_random(rng):
    for e in random_ensembles(rng, 200):
        for k in (1, 2):
            r = max_confidence(e, k)
            assert r.confidence == pytest.approx(r.dual_value, abs=1e-9)
            assert r.certificate_min_eig >= -1e-9
            assert abs(r.slackness) <= 1e-8
            assert r.confidence >= e.prior(k) - 1e-12
            assert r.confidence <= 1 + 1e-12
            p = r.optimal_projector
            assert np.allclose(p @ p, p) and np.trace(p).real == pytest.approx(1.0)


def test_primal_never_beats_dual(rng):
    for e in random_ensembles(rng, 20):
        for k in (1, 2):
            r = max_confidence(e, k)
            for _ in range(50):
                v = rng.normal(size=2) + 1j * rng.normal(size=2)
                proj = np.outer(v, v.conj()) / np.vdot(v, v).real
                assert confidence_of(e, k, proj) <= r.dual_value + 1e-12


def test_perturbed_projector_breaks_slackness():
    r = max_confidence(WORKED, 1)
    rot = rotation(0.1)
    perturbed = rot @ r.optimal_projector @ rot.T
    cert = r.dual_value * WORKED.rho - WORKED.q1 * WORKED.rho1
    assert np.trace(cert @ perturbed).real > 1e-8
    fake = type(r)(r.k, r.confidence, r.dual_value, perturbed, r.certificate)
    assert not verify_slackness(WORKED, 1, fake)


def test_confidence_nondecreasing_in_purity():
    for theta in (0.2, 0.42 * math.pi, math.pi / 2):
        for q1 in (0.3, 0.5, 0.65):
            for k in (1, 2):
                vals = [max_confidence(QubitEnsemble(theta, p, q1), k).confidence
                        for p in np.linspace(0.0, 0.99, 34)]
                assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_prior_swap_symmetry(rng):
    for e in random_ensembles(rng, 30):
        swapped = QubitEnsemble(e.theta, e.p, 1 - e.q1)
        assert max_confidence(e, 1).confidence == pytest.approx(max_confidence(swapped, 2).confidence, abs=1e-12)


def test_complementary_states():
    c1, c2, overlap = complementary_states(0.8, 1.0)
    assert np.allclose(c1, theta_state(0.8, 1)) and np.allclose(c2, theta_state(0.8, 2))
    c1, c2, overlap = complementary_states(0.8, 0.0)
    assert np.allclose(c1, [1 / math.sqrt(2), -1 / math.sqrt(2)]) and overlap == pytest.approx(0.0)
    _, _, overlap = complementary_states(0.42 * math.pi, 0.58)
    assert overlap == pytest.approx(0.58 * math.cos(0.42 * math.pi))


def test_orthogonal_limit_confidence():
    for p in (0.2, 0.58, 0.9):
        e = QubitEnsemble(math.pi / 2, p, 0.5)
        for k in (1, 2):
            assert max_confidence(e, k).confidence == pytest.approx((1 + p) / 2)
