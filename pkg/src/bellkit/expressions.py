"""Modular-bracket Bell expressions and the operations on them.

A bracket ``<[ a*A_x + b*B_y + c*C_z + offset ]_K>`` is the expectation of
the integer combination of outputs reduced mod K.  A Bell expression is a
weighted sum of brackets together with a comparator and a classical bound.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .scenario import Behavior, Scenario, ScenarioMismatchError

GE = ">="
LE = "<="


@dataclass(frozen=True)
class BracketTerm:
    """One weighted bracket.

    ``settings[p]`` is either None (party absent from the bracket) or a pair
    ``(input_index, coefficient)`` with a nonzero integer coefficient.
    """

    weight: Fraction
    settings: tuple[tuple[int, int] | None, ...]
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        for s in self.settings:
            if s is not None and s[1] == 0:
                raise ValueError("coefficient 0 must be encoded as an absent party")

    def value_on(self, outputs, K: int) -> int:
        """Bracket value in {0..K-1} for a deterministic output assignment."""
        x = self.offset
        for p, s in enumerate(self.settings):
            if s is not None:
                inp, coeff = s
                x += coeff * outputs[p][inp]
        return x % K

    def canonical(self, K: int) -> "BracketTerm":
        """Offset reduced to {0..K-1}; the representation used for merging."""
        return replace(self, offset=self.offset % K)

    def permute_parties(self, perm) -> "BracketTerm":
        """New party i carries old party perm[i]'s setting."""
        return replace(self, settings=tuple(self.settings[p] for p in perm))


@dataclass(frozen=True)
class BellExpression:
    scenario: Scenario
    terms: tuple[BracketTerm, ...]
    comparator: str = GE
    bound: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "bound", Fraction(self.bound))
        if self.comparator not in (GE, LE):
            raise ValueError(f"comparator must be '>=' or '<=', got {self.comparator!r}")
        for t in self.terms:
            if len(t.settings) != self.scenario.parties:
                raise ScenarioMismatchError("term has wrong number of parties")
            for p, s in enumerate(t.settings):
                if s is not None and not (0 <= s[0] < self.scenario.inputs_per_party[p]):
                    raise ScenarioMismatchError(f"input {s[0]} invalid for party {p}")

    def value_on_outputs(self, outputs) -> Fraction:
        """Exact value on a deterministic assignment ``outputs[p][x]``."""
        K = self.scenario.outputs
        return sum(
            (t.weight * t.value_on(outputs, K) for t in self.terms), Fraction(0)
        )

    def satisfied_by(self, value) -> bool:
        return value >= self.bound if self.comparator == GE else value <= self.bound

    def canonical(self) -> "BellExpression":
        """Offsets reduced mod K; term order preserved."""
        K = self.scenario.outputs
        return replace(self, terms=tuple(t.canonical(K) for t in self.terms))


@dataclass(frozen=True)
class SymmetricSumExpression:
    """Expression written in the output-sum marginals E(j|xyz).

    ``coefficients`` maps (input combination, residue j) to a rational weight;
    the value on a behavior is sum of w * P(sum of outputs = j mod K | inputs).
    """

    scenario: Scenario
    coefficients: tuple[tuple[tuple[int, ...], int, Fraction], ...]
    comparator: str = LE
    bound: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "bound", Fraction(self.bound))
        norm = []
        for inputs, j, w in self.coefficients:
            norm.append((tuple(inputs), j % self.scenario.outputs, Fraction(w)))
        object.__setattr__(self, "coefficients", tuple(norm))

    def value_on_outputs(self, outputs) -> Fraction:
        K = self.scenario.outputs
        total = Fraction(0)
        for inputs, j, w in self.coefficients:
            s = sum(outputs[p][inputs[p]] for p in range(self.scenario.parties))
            if s % K == j:
                total += w
        return total

    def satisfied_by(self, value) -> bool:
        return value >= self.bound if self.comparator == GE else value <= self.bound


def _check_scenario(expr, behavior: Behavior):
    if expr.scenario != behavior.scenario:
        raise ScenarioMismatchError("expression and behavior use different scenarios")


def bracket_expectation(term: BracketTerm, behavior: Behavior) -> float:
    """<[X]_K> = sum_j j P(X = j mod K), the term's weight not applied.

    Parties absent from the bracket are marginalized over their input 0
    (the fixed marginal-embedding convention).
    """
    sc = behavior.scenario
    if len(term.settings) != sc.parties:
        raise ScenarioMismatchError("term has wrong number of parties")
    K = sc.outputs
    combo = tuple(
        (term.settings[p][0] if term.settings[p] is not None else 0)
        for p in range(sc.parties)
    )
    for p in range(sc.parties):
        if combo[p] >= sc.inputs_per_party[p]:
            raise ScenarioMismatchError(f"input {combo[p]} invalid for party {p}")
    block = behavior.probabilities[combo]
    total = 0.0
    for a in itertools.product(range(K), repeat=sc.parties):
        x = term.offset + sum(
            term.settings[p][1] * a[p]
            for p in range(sc.parties)
            if term.settings[p] is not None
        )
        total += (x % K) * block[a]
    return total


def evaluate(expr, behavior: Behavior) -> float:
    """Value of a Bell expression (bracket or output-sum form) on a behavior."""
    _check_scenario(expr, behavior)
    if isinstance(expr, SymmetricSumExpression):
        total = 0.0
        cache: dict[tuple[int, ...], np.ndarray] = {}
        for inputs, j, w in expr.coefficients:
            if inputs not in cache:
                cache[inputs] = behavior.symmetric_marginal(inputs)
            total += float(w) * cache[inputs][j]
        return total
    return sum(
        float(t.weight) * bracket_expectation(t, behavior) for t in expr.terms
    )


def expand_to_coefficients(expr) -> np.ndarray:
    """Per-probability coefficients c with evaluate = sum c * P.

    Shape matches the behavior tensor (input axes then output axes).  Brackets
    that omit a party are expanded over that party's input 0.
    """
    sc = expr.scenario
    K = sc.outputs
    c = np.zeros(sc.behavior_shape())
    if isinstance(expr, SymmetricSumExpression):
        outs = np.indices((K,) * sc.parties).sum(axis=0) % K
        for inputs, j, w in expr.coefficients:
            c[tuple(inputs)] += float(w) * (outs == j)
        return c
    for t in expr.terms:
        combo = tuple(
            (t.settings[p][0] if t.settings[p] is not None else 0)
            for p in range(sc.parties)
        )
        x = np.full((K,) * sc.parties, t.offset, dtype=np.int64)
        grids = np.indices((K,) * sc.parties)
        for p in range(sc.parties):
            if t.settings[p] is not None:
                x += t.settings[p][1] * grids[p]
        c[combo] += float(t.weight) * (x % K)
    return c


def merge_terms(scenario: Scenario, terms) -> tuple[BracketTerm, ...]:
    """Sum weights of brackets identical after offset canonicalization."""
    K = scenario.outputs
    acc: dict[tuple, Fraction] = {}
    order: list[tuple] = []
    for t in terms:
        tc = t.canonical(K)
        key = (tc.settings, tc.offset)
        if key not in acc:
            acc[key] = Fraction(0)
            order.append(key)
        acc[key] += tc.weight
    return tuple(
        BracketTerm(acc[key], key[0], key[1]) for key in order if acc[key] != 0
    )


def _permutation_group(n: int, group: str):
    if group == "cyclic":
        base = list(range(n))
        return [tuple(base[i:] + base[:i]) for i in range(n)]
    if group == "full":
        return list(itertools.permutations(range(n)))
    raise ValueError(f"unknown group {group!r}")


def _require_homogeneous(scenario: Scenario):
    if len(set(scenario.inputs_per_party)) != 1:
        raise ScenarioMismatchError("party permutation needs identical input counts")


def symmetrize(expr: BellExpression, group: str = "full") -> BellExpression:
    """Group-sum over party permutations, duplicate brackets merged.

    The result evaluated on any behavior equals the sum over group elements
    of the original evaluated on the correspondingly permuted behavior.
    """
    _require_homogeneous(expr.scenario)
    perms = _permutation_group(expr.scenario.parties, group)
    terms = [t.permute_parties(perm) for perm in perms for t in expr.terms]
    return replace(expr, terms=merge_terms(expr.scenario, terms))


def orbit_complete(expr: BellExpression, group: str = "full") -> BellExpression:
    """Add each listed bracket's permutation orbit once, at the bracket's weight.

    This is the reading of a trailing "+ permutations" in a printed
    inequality: orbits are completed without multiplying symmetric terms.
    """
    _require_homogeneous(expr.scenario)
    K = expr.scenario.outputs
    perms = _permutation_group(expr.scenario.parties, group)
    seen: set[tuple] = set()
    out: list[BracketTerm] = []
    for t in expr.terms:
        for perm in perms:
            tc = t.permute_parties(perm).canonical(K)
            key = (tc.settings, tc.offset)
            if key not in seen:
                seen.add(key)
                out.append(tc)
    return replace(expr, terms=merge_terms(expr.scenario, out))


def orbit_complete_symmetric_sum(
    expr: SymmetricSumExpression, group: str = "full"
) -> SymmetricSumExpression:
    """Orbit completion for output-sum expressions: permute the input combo."""
    _require_homogeneous(expr.scenario)
    perms = _permutation_group(expr.scenario.parties, group)
    seen: set[tuple] = set()
    out = []
    for inputs, j, w in expr.coefficients:
        for perm in perms:
            key = (tuple(inputs[p] for p in perm), j)
            if key not in seen:
                seen.add(key)
                out.append((key[0], j, w))
    return replace(expr, coefficients=tuple(out))


def relabel_outputs(
    expr: BellExpression, party: int, inp: int, scale: int, shift: int = 0
) -> BellExpression:
    """Apply the output relabeling a -> scale*a + shift (mod K) to one setting.

    ``scale`` must be invertible mod K for the relabeling to be a bijection.
    """
    K = expr.scenario.outputs
    if math.gcd(scale % K, K) != 1:
        raise ValueError(f"scale {scale} is not invertible mod {K}")
    new_terms = []
    for t in expr.terms:
        s = t.settings[party]
        if s is not None and s[0] == inp:
            coeff = s[1] * scale
            settings = list(t.settings)
            settings[party] = (inp, coeff)
            new_terms.append(
                BracketTerm(t.weight, tuple(settings), t.offset + s[1] * shift)
            )
        else:
            new_terms.append(t)
    return replace(expr, terms=merge_terms(expr.scenario, new_terms))


def swap_inputs(expr: BellExpression, party: int, a: int, b: int) -> BellExpression:
    new_terms = []
    for t in expr.terms:
        s = t.settings[party]
        if s is not None and s[0] in (a, b):
            settings = list(t.settings)
            settings[party] = (b if s[0] == a else a, s[1])
            new_terms.append(replace(t, settings=tuple(settings)))
        else:
            new_terms.append(t)
    return replace(expr, terms=merge_terms(expr.scenario, new_terms))


def drop_party(expr: BellExpression, party: int, output_value: int = 0) -> BellExpression:
    """Restrict a party to a deterministic output and remove it.

    Used for the bipartite reduction: fixing the third party's outputs to 0
    turns the tripartite family into the bipartite one.
    """
    sc = expr.scenario
    new_sc = Scenario(
        sc.parties - 1,
        tuple(m for p, m in enumerate(sc.inputs_per_party) if p != party),
        sc.outputs,
    )
    new_terms = []
    for t in expr.terms:
        s = t.settings[party]
        offset = t.offset + (s[1] * output_value if s is not None else 0)
        settings = tuple(x for p, x in enumerate(t.settings) if p != party)
        new_terms.append(BracketTerm(t.weight, settings, offset))
    return BellExpression(
        new_sc, merge_terms(new_sc, new_terms), expr.comparator, expr.bound
    )


def lift_with_trivial_party(expr: BellExpression, inputs: int = 2) -> BellExpression:
    """Embed an expression into a scenario with one extra (untouched) party."""
    sc = expr.scenario
    new_sc = Scenario(sc.parties + 1, sc.inputs_per_party + (inputs,), sc.outputs)
    new_terms = tuple(
        BracketTerm(t.weight, t.settings + (None,), t.offset) for t in expr.terms
    )
    return BellExpression(new_sc, new_terms, expr.comparator, expr.bound)
