import itertools

import numpy as np
import pytest

from bellkit.quantum import MeasurementAssemblage, QuantumModel, haar_random_ket, random_povm
from bellkit.scenario import Behavior, Scenario


def all_deterministic_behaviors(scenario: Scenario):
    """Every deterministic behavior of the scenario, in enumeration order."""
    K = scenario.outputs
    ranges = [
        itertools.product(range(K), repeat=m) for m in scenario.inputs_per_party
    ]
    for outs in itertools.product(*ranges):
        yield outs, Behavior.deterministic(scenario, outs)


def random_model(dims, K, n_inputs, rng) -> QuantumModel:
    state = haar_random_ket(tuple(dims), rng)
    povms = tuple(
        tuple(random_povm(d, K, rng) for _ in range(m))
        for d, m in zip(dims, n_inputs)
    )
    return QuantumModel(state, MeasurementAssemblage(povms))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
