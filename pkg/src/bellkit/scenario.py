"""Bell scenarios and behaviors (joint conditional probability tensors)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

PROB_SUM_TOL = 1e-9
PROB_NEG_TOL = 1e-12


class ScenarioMismatchError(ValueError):
    """Raised when an expression/behavior pair refers to different scenarios."""


@dataclass(frozen=True)
class Scenario:
    """A multipartite Bell scenario with a uniform number of outcomes.

    ``inputs_per_party[p]`` is the number of measurement settings of party
    ``p``; every setting has ``outputs`` outcomes labelled ``0..outputs-1``.
    Party and input indices are 0-based internally (the text format and the
    literature use 1-based tags such as ``A2``).
    """

    parties: int
    inputs_per_party: tuple[int, ...]
    outputs: int

    def __post_init__(self):
        if self.parties < 1:
            raise ValueError("need at least one party")
        if len(self.inputs_per_party) != self.parties:
            raise ValueError("inputs_per_party length must equal parties")
        if any(m < 1 for m in self.inputs_per_party):
            raise ValueError("every party needs at least one input")
        if self.outputs < 2:
            raise ValueError("need at least two outcomes")

    @property
    def total_inputs(self) -> int:
        return sum(self.inputs_per_party)

    @property
    def n_strategies(self) -> int:
        return self.outputs ** self.total_inputs

    @property
    def n_input_combos(self) -> int:
        out = 1
        for m in self.inputs_per_party:
            out *= m
        return out

    def slot(self, party: int, inp: int) -> int:
        """Flat index of (party, input) into a strategy's output list."""
        if not (0 <= party < self.parties):
            raise ScenarioMismatchError(f"party {party} out of range")
        if not (0 <= inp < self.inputs_per_party[party]):
            raise ScenarioMismatchError(f"input {inp} invalid for party {party}")
        return sum(self.inputs_per_party[:party]) + inp

    def input_combos(self):
        return itertools.product(*[range(m) for m in self.inputs_per_party])

    def behavior_shape(self) -> tuple[int, ...]:
        return tuple(self.inputs_per_party) + (self.outputs,) * self.parties


def tripartite(outputs: int) -> Scenario:
    """The scenario of the catalog inequalities: 3 parties, 2 inputs each."""
    return Scenario(3, (2, 2, 2), outputs)


@dataclass
class Behavior:
    """P(a,b,c,...|x,y,z,...), stored dense with input axes before output axes."""

    scenario: Scenario
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != self.scenario.behavior_shape():
            raise ScenarioMismatchError(
                f"probability tensor shape {p.shape} != {self.scenario.behavior_shape()}"
            )
        if p.min() < -PROB_NEG_TOL:
            raise ValueError(f"negative probability {p.min():.3e}")
        sums = p.reshape(tuple(self.scenario.inputs_per_party) + (-1,)).sum(axis=-1)
        if np.max(np.abs(sums - 1.0)) > PROB_SUM_TOL:
            raise ValueError("outcome probabilities do not sum to 1 per input combo")
        self.probabilities = p

    @classmethod
    def deterministic(cls, scenario: Scenario, outputs) -> "Behavior":
        """Delta behavior of a deterministic strategy.

        ``outputs[p][x]`` is party p's output for input x.
        """
        p = np.zeros(scenario.behavior_shape())
        for combo in scenario.input_combos():
            a = tuple(outputs[pty][combo[pty]] for pty in range(scenario.parties))
            p[combo + a] = 1.0
        return cls(scenario, p)

    @classmethod
    def uniform(cls, scenario: Scenario) -> "Behavior":
        p = np.full(scenario.behavior_shape(), scenario.outputs ** -scenario.parties)
        return cls(scenario, p)

    def permute_parties(self, perm) -> "Behavior":
        """Behavior with party roles permuted: new party i is old party perm[i]."""
        n = self.scenario.parties
        perm = tuple(perm)
        if sorted(perm) != list(range(n)):
            raise ValueError("not a permutation")
        new_inputs = tuple(self.scenario.inputs_per_party[p] for p in perm)
        axes = [perm[i] for i in range(n)] + [n + perm[i] for i in range(n)]
        sc = Scenario(n, new_inputs, self.scenario.outputs)
        return Behavior(sc, np.transpose(self.probabilities, axes))

    def symmetric_marginal(self, inputs: tuple[int, ...]) -> np.ndarray:
        """Distribution of the output sum mod K at a fixed input combination.

        Entry j is P(sum of all parties' outputs = j mod K | inputs).
        """
        sc = self.scenario
        K = sc.outputs
        block = self.probabilities[tuple(inputs)]
        out = np.zeros(K)
        for a in itertools.product(range(K), repeat=sc.parties):
            out[sum(a) % K] += block[a]
        return out

    def correlator(self, *inputs: int) -> float:
        """Parity correlator E(x,y,...) for binary outcomes (1-based inputs)."""
        sc = self.scenario
        if sc.outputs != 2:
            raise ValueError("correlators are defined for K=2 only")
        combo = tuple(x - 1 for x in inputs)
        if len(combo) != sc.parties or any(
            not (0 <= combo[p] < sc.inputs_per_party[p]) for p in range(sc.parties)
        ):
            raise ScenarioMismatchError(f"bad input combination {inputs}")
        block = self.probabilities[combo]
        signs = np.ones((2,) * sc.parties)
        for a in itertools.product(range(2), repeat=sc.parties):
            signs[a] = (-1) ** sum(a)
        return float((signs * block).sum())
