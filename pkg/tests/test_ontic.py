import json

import numpy as np
import pytest

from contextual_qnd import ontic
from contextual_qnd.errors import (
    InfeasibleAlpha,
    InfeasiblePostStates,
    NoNonnegativeDual,
    SpaceMismatch,
    UnknownOutcome,
)
from contextual_qnd.ontic import (
    DirectMeasurement,
    EpistemicState,
    ResponseSet,
    StochasticMap,
    apply_map,
    build_usd_qnd,
    check_confusability_preserved,
    confusability,
    confusability_both,
    dual_vectors,
    extract_response_functions,
    outcome_probability,
    tensor,
    tensor_map,
    toy_model,
)


def random_state(rng, n):
    return EpistemicState(rng.dirichlet(np.ones(n)))


def random_map(rng, n_to, n_from):
    return StochasticMap(rng.dirichlet(np.ones(n_to), size=n_from).T)


# -- value types --------------------------------------------------------------


def test_epistemic_state_validation():
    assert np.array_equal(EpistemicState([0.5, 0.5 + 5e-10, -5e-10]).weights[2:], [0.0])
    with pytest.raises(ValueError):
        EpistemicState([0.6, 0.6])
    with pytest.raises(ValueError):
        EpistemicState([1.1, -0.1])
    with pytest.raises(ValueError):
        EpistemicState([])
    with pytest.raises(ValueError):
        EpistemicState([np.nan, 1.0])


def test_epistemic_state_is_immutable():
    mu = EpistemicState([0.25, 0.75])
    with pytest.raises(ValueError):
        mu.weights[0] = 1.0


def test_epistemic_state_json_roundtrip():
    mu = EpistemicState([0.125, 0.375, 0.5])
    assert EpistemicState.from_json(json.loads(json.dumps(mu.to_json()))) == mu


def test_stochastic_map_validation():
    StochasticMap([[1, 0.5], [0, 0.5]])
    with pytest.raises(ValueError):
        StochasticMap([[1, 0.5], [0, 0.6]])
    with pytest.raises(ValueError):
        StochasticMap([[1.2, 0.5], [-0.2, 0.5]])
    k = StochasticMap([[0.25, 1.0], [0.75, 0.0], [0.0, 0.0]])
    assert (k.to_size, k.from_size) == (3, 2)
    assert StochasticMap.from_json(k.to_json()) == k


def test_response_set_validation():
    ResponseSet([[0.2, 1.0], [0.8, 0.0]])
    with pytest.raises(ValueError):
        ResponseSet([[0.2, 1.0], [0.7, 0.0]])
    with pytest.raises(ValueError):
        ResponseSet([[1.5, 1.0], [-0.5, 0.0]])


def test_response_probability_unknown_outcome():
    r = ResponseSet(np.eye(2))
    with pytest.raises(UnknownOutcome):
        r.probability(EpistemicState([1, 0]), 2)


def test_direct_measurement_accepts_indicators():
    DirectMeasurement(ResponseSet(np.eye(3)))
    DirectMeasurement(ResponseSet([[1, 1, 0, 0], [0, 0, 1, 1]]))


@pytest.mark.parametrize("value", [0.5, 0.3, 0.01])
def test_direct_measurement_rejects_interior_value(value):
    with pytest.raises(ValueError):
        DirectMeasurement(ResponseSet([[1, value, 0], [0, 1 - value, 1]]))


def test_direct_measurement_rejects_all_corruptions(rng):
    base = np.eye(3)
    for _ in range(500):
        with pytest.raises(ValueError):
            DirectMeasurement(ResponseSet(ontic.corrupt_direct(rng, base)))


# -- confusability ------------------------------------------------------------


def test_toy_confusability():
    mu1, mu2 = toy_model()
    assert confusability_both(mu1, mu2) == (0.5, 0.5)
    assert confusability(mu1, mu1) == 1.0
    assert confusability(EpistemicState([1, 0]), EpistemicState([0, 1])) == 0.0


def test_confusability_asymmetry_reported():
    mu = EpistemicState([0.5, 0.5, 0.0])
    nu = EpistemicState([0.2, 0.0, 0.8])
    assert confusability_both(mu, nu) == pytest.approx((0.2, 0.5))
    assert ontic.confusability_asymmetry(mu, nu) == pytest.approx(-0.3)


def test_confusability_space_mismatch():
    with pytest.raises(SpaceMismatch):
        confusability(EpistemicState([1.0]), EpistemicState([0.5, 0.5]))


# -- maps ---------------------------------------------------------------------


def test_apply_map_identity_and_rank_one(rng):
    mu = random_state(rng, 4)
    assert np.allclose(apply_map(StochasticMap(np.eye(4)), mu).weights, mu.weights)
    v = rng.dirichlet(np.ones(3))
    lmap = StochasticMap(np.tile(v[:, None], (1, 4)))
    assert np.allclose(apply_map(lmap, mu).weights, v)


def test_apply_map_space_mismatch():
    with pytest.raises(SpaceMismatch):
        apply_map(StochasticMap(np.eye(3)), EpistemicState([0.5, 0.5]))


def test_tensor_product_compatibility(rng):
    for _ in range(20):
        a, b = random_map(rng, 3, 2), random_map(rng, 2, 4)
        mu, nu = random_state(rng, 2), random_state(rng, 4)
        lhs = apply_map(tensor_map(a, b), tensor(mu, nu))
        rhs = tensor(apply_map(a, mu), apply_map(b, nu))
        assert np.allclose(lhs.weights, rhs.weights, atol=1e-12)


def test_permutation_preserves_confusability(rng):
    for _ in range(20):
        perm = np.eye(5)[rng.permutation(5)]
        mu, nu = random_state(rng, 5), EpistemicState(np.r_[rng.dirichlet(np.ones(3)), 0, 0])
        assert check_confusability_preserved(StochasticMap(perm), mu, nu)[2]


def test_rank_one_map_destroys_distinguishability():
    mu, nu = toy_model()
    lmap = StochasticMap(np.tile(np.array([[0.3], [0.7]]), (1, 4)))
    before, after, preserved = check_confusability_preserved(lmap, mu, nu)
    assert before == 0.5 and after == pytest.approx(1.0) and not preserved


# -- duals --------------------------------------------------------------------


def test_toy_dual_vectors():
    bar1, bar2 = dual_vectors(*toy_model())
    assert np.allclose(bar1, [0, 2, 0, 0])
    assert np.allclose(bar2, [0, 0, 2, 0])


def test_orthogonal_point_masses_dual():
    bar1, bar2 = dual_vectors(EpistemicState([1, 0]), EpistemicState([0, 1]))
    assert np.allclose(bar1, [1, 0]) and np.allclose(bar2, [0, 1])


def test_identical_states_have_no_dual():
    mu1, _ = toy_model()
    with pytest.raises(NoNonnegativeDual):
        dual_vectors(mu1, mu1)


def test_support_inclusion_has_no_dual():
    # mu2 covers supp(mu1) entirely with proportional weights: no separation possible
    with pytest.raises(NoNonnegativeDual):
        dual_vectors(EpistemicState([0.5, 0.5, 0.0]), EpistemicState([0.25, 0.25, 0.5]))


def test_dual_biorthogonality_random(rng):
    for _ in range(30):
        mu1, mu2, _, _ = ontic.random_feasible_instance(rng, size=int(rng.integers(4, 9)))
        bar1, bar2 = dual_vectors(mu1, mu2)
        assert np.all(bar1 >= 0) and np.all(bar2 >= 0)
        gram = np.array([[bar1 @ mu1.weights, bar1 @ mu2.weights], [bar2 @ mu1.weights, bar2 @ mu2.weights]])
        assert np.allclose(gram, np.eye(2), atol=1e-9)


# -- USD construction ---------------------------------------------------------


def test_toy_build_equal_alpha():
    mu1, mu2 = toy_model()
    qnd = build_usd_qnd(mu1, mu2, 0.4, 0.4)
    p1, p2 = qnd.post_states
    assert confusability(p1, p2) == pytest.approx(0.5 / 0.6, abs=1e-12)
    assert confusability(mu1, mu2) == pytest.approx(confusability(p1, p2) * (1 - 0.4), abs=1e-12)
    for j, mu in ((1, mu1), (2, mu2)):
        assert outcome_probability(qnd, mu, j) == pytest.approx(0.4, abs=1e-12)
        assert outcome_probability(qnd, mu, 3 - j) == pytest.approx(0.0, abs=1e-12)


def test_toy_response_functions():
    qnd = build_usd_qnd(*toy_model(), 0.4, 0.4)
    resp = extract_response_functions(qnd)
    assert np.allclose(resp.functions[1], [0, 0.8, 0, 0])
    assert np.allclose(resp.functions[2], [0, 0, 0.8, 0])
    assert np.allclose(resp.functions[0], [1, 0.2, 0.2, 1])


def test_zero_alpha_always_fails(rng):
    qnd = build_usd_qnd(*toy_model(), 0.0, 0.0)
    assert np.allclose(extract_response_functions(qnd).functions[0], 1.0)
    for _ in range(10):
        assert outcome_probability(qnd, random_state(rng, 4), 0) == pytest.approx(1.0)


def test_toy_infeasible_alpha():
    with pytest.raises(InfeasibleAlpha, match="ontic point 1"):
        build_usd_qnd(*toy_model(), 0.6, 0.1)
    with pytest.raises(InfeasibleAlpha):
        build_usd_qnd(*toy_model(), 1.2, 0.0)


def test_build_with_given_posts():
    mu1, mu2 = toy_model()
    p1 = EpistemicState([5 / 6, 1 / 6, 0, 0])
    p2 = EpistemicState([5 / 6, 0, 1 / 6, 0])
    qnd = build_usd_qnd(mu1, mu2, 0.4, 0.4, p1, p2)
    assert qnd.post_states == (p1, p2)
    res = ontic.verify_identities(mu1, mu2, 0.4, 0.4, p1, p2)
    assert max(res.values()) < 1e-9


def test_build_with_impossible_posts():
    mu1, mu2 = toy_model()
    # disjoint post states would make confusability vanish without disturbance
    with pytest.raises(InfeasiblePostStates):
        build_usd_qnd(mu1, mu2, 0.4, 0.4, EpistemicState([1, 0, 0, 0]), EpistemicState([0, 0, 0, 1]))


def test_map_is_column_stochastic_and_factorizes():
    mu1, mu2 = toy_model()
    qnd = build_usd_qnd(mu1, mu2, 0.3, 0.15)
    assert np.allclose(qnd.map.kernel.sum(axis=0), 1.0)
    out = apply_map(qnd.map, mu1).weights.reshape(qnd.post_size, qnd.aux_size)
    expected = np.outer(qnd.post_states[0].weights, [0.7, 0.3, 0.0])
    assert np.allclose(out, expected, atol=1e-12)


def test_unequal_alpha_relation_holds_per_direction():
    mu1, mu2 = toy_model()
    a1, a2 = 0.3, 0.15
    p1, p2 = build_usd_qnd(mu1, mu2, a1, a2).post_states
    fwd, bwd = confusability_both(p1, p2)
    assert confusability(mu1, mu2) == pytest.approx(fwd * (1 - a2), abs=1e-12)
    assert confusability(mu2, mu1) == pytest.approx(bwd * (1 - a1), abs=1e-12)


def test_usd_build_preserves_confusability():
    mu1, mu2 = toy_model()
    qnd = build_usd_qnd(mu1, mu2, 0.4, 0.4)
    before, after, preserved = check_confusability_preserved(qnd.map, mu1, mu2)
    assert preserved and before == pytest.approx(after)


def test_outcome_normalization_random_states(rng):
    qnd = build_usd_qnd(*toy_model(), 0.25, 0.35)
    for _ in range(100):
        mu = random_state(rng, 4)
        assert sum(outcome_probability(qnd, mu, k) for k in range(3)) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(UnknownOutcome):
        outcome_probability(qnd, mu, 3)


def test_response_extraction_agrees(rng):
    mu1, mu2, a1, a2 = ontic.random_feasible_instance(rng, size=7, alpha_equal=False)
    qnd = build_usd_qnd(mu1, mu2, a1, a2)
    resp = extract_response_functions(qnd)
    bar1, bar2 = dual_vectors(mu1, mu2)
    assert np.allclose(resp.functions[1], a1 * bar1, atol=1e-12)
    assert np.allclose(resp.functions[2], a2 * bar2, atol=1e-12)
    for _ in range(100):
        mu = random_state(rng, 7)
        for k in range(3):
            assert resp.probability(mu, k) == pytest.approx(outcome_probability(qnd, mu, k), abs=1e-9)


def test_identity_relation_random_equal_alpha(rng):
    for _ in range(50):
        mu1, mu2, a, _ = ontic.random_feasible_instance(rng, size=int(rng.integers(4, 9)))
        p1, p2 = build_usd_qnd(mu1, mu2, a, a).post_states
        assert abs(confusability(mu1, mu2) - confusability(p1, p2) * (1 - a)) < 1e-9


def test_verify_identities_random_unequal(rng):
    for i in range(20):
        mu1, mu2, a1, a2 = ontic.random_feasible_instance(rng, size=6, alpha_equal=False)
        res = ontic.verify_identities(mu1, mu2, a1, a2, seed=i)
        assert max(res.values()) < 1e-9, res


def test_load_model_and_qnd_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"mu1": [0.5, 0.5, 0, 0], "mu2": [0.5, 0, 0.5, 0], "alpha1": 0.2, "alpha2": 0.2}))
    model = ontic.load_model(path)
    qnd = build_usd_qnd(**model)
    data = json.loads(json.dumps(ontic.qnd_to_json(qnd)))
    assert StochasticMap.from_json(data["map"]) == qnd.map
    assert data["aux_size"] == 3
