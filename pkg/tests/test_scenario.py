import numpy as np
import pytest

from bellkit.scenario import Behavior, Scenario, ScenarioMismatchError, tripartite


def test_tripartite_shape():
    sc = tripartite(3)
    assert sc.parties == 3
    assert sc.inputs_per_party == (2, 2, 2)
    assert sc.outputs == 3
    assert sc.n_strategies == 3**6
    assert sc.n_input_combos == 8
    assert sc.behavior_shape() == (2, 2, 2, 3, 3, 3)


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(0, (), 2)
    with pytest.raises(ValueError):
        Scenario(2, (2,), 2)
    with pytest.raises(ValueError):
        Scenario(1, (0,), 2)
    with pytest.raises(ValueError):
        Scenario(1, (1,), 1)


def test_slot_indexing():
    sc = Scenario(3, (2, 3, 1), 2)
    assert sc.slot(0, 0) == 0
    assert sc.slot(0, 1) == 1
    assert sc.slot(1, 2) == 4
    assert sc.slot(2, 0) == 5
    with pytest.raises(ScenarioMismatchError):
        sc.slot(2, 1)
    with pytest.raises(ScenarioMismatchError):
        sc.slot(3, 0)


def test_deterministic_behavior_is_delta():
    sc = tripartite(3)
    outs = ((1, 2), (0, 1), (2, 2))
    beh = Behavior.deterministic(sc, outs)
    assert beh.probabilities[0, 0, 0, 1, 0, 2] == 1.0
    assert beh.probabilities[1, 1, 1, 2, 1, 2] == 1.0
    assert beh.probabilities.sum() == sc.n_input_combos


def test_behavior_normalization_enforced():
    sc = tripartite(2)
    bad = np.zeros(sc.behavior_shape())
    with pytest.raises(ValueError):
        Behavior(sc, bad)
    with pytest.raises(ValueError):
        Behavior(sc, np.full(sc.behavior_shape(), -0.125))
    with pytest.raises(ScenarioMismatchError):
        Behavior(sc, np.zeros((2, 2, 2, 3, 3, 3)))


def test_uniform_behavior():
    sc = tripartite(3)
    beh = Behavior.uniform(sc)
    assert np.allclose(beh.probabilities, 1 / 27)


def test_permute_parties_roundtrip():
    sc = tripartite(2)
    beh = Behavior.deterministic(sc, ((0, 1), (1, 0), (1, 1)))
    perm = (2, 0, 1)
    inverse = (1, 2, 0)
    back = beh.permute_parties(perm).permute_parties(inverse)
    assert np.array_equal(back.probabilities, beh.probabilities)
    with pytest.raises(ValueError):
        beh.permute_parties((0, 0, 1))


def test_symmetric_marginal_deterministic():
    sc = tripartite(3)
    beh = Behavior.deterministic(sc, ((1, 0), (2, 0), (2, 0)))
    marg = beh.symmetric_marginal((0, 0, 0))
    expected = np.zeros(3)
    expected[(1 + 2 + 2) % 3] = 1.0
    assert np.array_equal(marg, expected)


def test_correlator_ghz_paradox_signs():
    # deterministic strategy a=b=c=0 has all correlators +1
    sc = tripartite(2)
    beh = Behavior.deterministic(sc, ((0, 0), (0, 0), (0, 0)))
    assert beh.correlator(1, 1, 1) == 1.0
    assert beh.correlator(2, 2, 2) == 1.0
    flip = Behavior.deterministic(sc, ((0, 1), (0, 0), (0, 0)))
    assert flip.correlator(2, 1, 1) == -1.0


def test_correlator_input_validation():
    sc = tripartite(2)
    beh = Behavior.uniform(sc)
    with pytest.raises(ScenarioMismatchError):
        beh.correlator(3, 1, 1)
    with pytest.raises(ValueError):
        Behavior.uniform(tripartite(3)).correlator(1, 1, 1)
