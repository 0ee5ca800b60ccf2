import math

import numpy as np
import pytest

from contextual_qnd import kernels
from contextual_qnd.maxconf import QubitEnsemble, pauli_coefficients

BACKENDS = kernels.available_backends()


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_region_scan_triangle_free(name):
    k = BACKENDS[name]
    a1, a2, v = k.linear_region_scan(0.5, 0.5, 0, 0.25, 0.0, 1, 1, 0.0, 1.0, 0.0, 1.0, 101, 0.0)
    assert v == pytest.approx(0.5, abs=1e-9)
    assert (1 - a1) * (1 - a2) >= 0.25 - 1e-15


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_region_scan_edge_is_feasible(name):
    k = BACKENDS[name]
    s = 0.6
    a1, a2, v = k.linear_region_scan(0.3, 0.7, 1, 0.0, s, 1, 2, 0.0, 1.0, 0.0, 1.0, 51, 0.0)
    assert (1 - a1) * (1 - a2) >= (s - math.sqrt(a1 * a2) * s**2) ** 2
    assert v == pytest.approx(0.3 * a1 + 0.7 * a2)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_region_scan_infeasible_box(name):
    k = BACKENDS[name]
    _, _, v = k.linear_region_scan(0.5, 0.5, 0, 0.9, 0.0, 1, 1, 0.5, 1.0, 0.5, 1.0, 21, 0.0)
    assert v == -math.inf


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
def test_backends_agree_on_region_scans(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for _ in range(50):
        q = rng.uniform()
        region = int(rng.integers(0, 2))
        c, s = rng.uniform(), rng.uniform()
        lo1, lo2 = rng.uniform(0, 0.5, 2)
        args = (q, 1 - q, region, c, s, 1, int(rng.integers(1, 4)), lo1, lo1 + 0.5, lo2, lo2 + 0.5, 61, 0.0)
        r_py, r_cy = py.linear_region_scan(*args), cy.linear_region_scan(*args)
        assert r_py[2] == pytest.approx(r_cy[2], abs=1e-12)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
def test_backends_agree_on_bloch_scans(rng):
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    for _ in range(20):
        e = QubitEnsemble(rng.uniform(0, math.pi / 2), rng.uniform(0, 0.99), rng.uniform(0.05, 0.95))
        num = pauli_coefficients(e.q1 * e.rho1)
        den = pauli_coefficients(e.rho)
        args = (num, den, 0.0, math.pi, 91, 0.0, 2 * math.pi, 181)
        r_py, r_cy = py.bloch_ratio_scan(*args), cy.bloch_ratio_scan(*args)
        assert r_py[2] == pytest.approx(r_cy[2], abs=1e-12)
        assert r_py[0] == pytest.approx(r_cy[0], abs=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_bloch_scan_matches_eigenvalue(name):
    # ratio Tr(A P) / Tr(P) over projectors is the top eigenvalue of A
    a = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    num = np.ascontiguousarray(pauli_coefficients(a))
    den = np.ascontiguousarray(pauli_coefficients(np.eye(2)))
    _, _, v = BACKENDS[name].bloch_ratio_scan(num, den, 0.0, math.pi, 721, 0.0, 2 * math.pi, 1441)
    assert v == pytest.approx(np.linalg.eigvalsh(a)[-1], abs=1e-5)
