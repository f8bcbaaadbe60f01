"""Exact classical analysis of the local polytope.

Deterministic strategies are enumerated in a fixed mixed-radix order; local
bounds use exact integer bracket arithmetic.  Affine ranks are computed by
streaming row reduction modulo a random 31-bit prime, the collected basis is
certified independent over Q modulo a second prime, and small instances are
additionally cross-checked by rational elimination.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np
from scipy import sparse

from ._modp import ModpEchelon, rank_fraction, sample_prime_31
from .expressions import GE, BellExpression, SymmetricSumExpression
from .scenario import Scenario

MAX_STRATEGIES = 20_000_000
EXACT_PASS_MAX_COLS = 300  # rational cross-check threshold


@dataclass(frozen=True)
class DeterministicStrategy:
    """Per-party output assignment; ``outputs[p][x]`` answers input x."""

    outputs: tuple[tuple[int, ...], ...]

    @classmethod
    def from_index(cls, scenario: Scenario, index: int) -> "DeterministicStrategy":
        K = scenario.outputs
        digits = []
        for _ in range(scenario.total_inputs):
            digits.append(index % K)
            index //= K
        digits.reverse()  # first slot is the most significant digit
        outputs, pos = [], 0
        for m in scenario.inputs_per_party:
            outputs.append(tuple(digits[pos:pos + m]))
            pos += m
        return cls(tuple(outputs))

    def index(self, scenario: Scenario) -> int:
        K = scenario.outputs
        idx = 0
        for party in self.outputs:
            for o in party:
                idx = idx * K + o
        return idx


@dataclass(frozen=True)
class FacetReport:
    polytope_dimension: int
    saturating_vertex_count: int
    saturating_affine_rank: int
    is_tight: bool
    is_valid: bool
    bound: Fraction
    violation_witness: DeterministicStrategy | None = None

    def to_dict(self) -> dict:
        return {
            "polytope_dimension": self.polytope_dimension,
            "saturating_vertex_count": self.saturating_vertex_count,
            "saturating_affine_rank": self.saturating_affine_rank,
            "is_tight": self.is_tight,
            "is_valid": self.is_valid,
            "bound": str(self.bound),
            "violation_witness": None
            if self.violation_witness is None
            else [list(o) for o in self.violation_witness.outputs],
        }


def _guard(scenario: Scenario):
    if scenario.n_strategies > MAX_STRATEGIES:
        raise OverflowError(
            f"{scenario.n_strategies} deterministic strategies exceed the "
            f"enumeration limit {MAX_STRATEGIES}"
        )


def enumerate_strategies(scenario: Scenario) -> Iterator[DeterministicStrategy]:
    """All K^(total inputs) strategies, in index order."""
    _guard(scenario)
    for idx in range(scenario.n_strategies):
        yield DeterministicStrategy.from_index(scenario, idx)


def strategy_output_table(scenario: Scenario) -> np.ndarray:
    """(n_strategies, total_inputs) int8 table, row i = strategy index i."""
    _guard(scenario)
    K = scenario.outputs
    n = scenario.total_inputs
    idx = np.arange(scenario.n_strategies, dtype=np.int64)
    table = np.empty((scenario.n_strategies, n), dtype=np.int8)
    for slot in range(n - 1, -1, -1):
        table[:, slot] = idx % K
        idx //= K
    return table


def deterministic_values(expr, table: np.ndarray) -> tuple[np.ndarray, int]:
    """Exact expression values on every strategy row of ``table``.

    Returns (scaled int64 values, scale) with value = scaled/scale, where
    scale is the lcm of the weight denominators.
    """
    sc = expr.scenario
    K = sc.outputs
    if isinstance(expr, SymmetricSumExpression):
        weights = [w for _, _, w in expr.coefficients]
    else:
        weights = [t.weight for t in expr.terms]
    scale = 1
    for w in weights:
        scale = scale * w.denominator // math.gcd(scale, w.denominator)
    vals = np.zeros(table.shape[0], dtype=np.int64)
    if isinstance(expr, SymmetricSumExpression):
        for inputs, j, w in expr.coefficients:
            s = np.zeros(table.shape[0], dtype=np.int64)
            for p in range(sc.parties):
                s += table[:, sc.slot(p, inputs[p])]
            vals += int(w * scale) * (s % K == j)
        return vals, scale
    for t in expr.terms:
        x = np.full(table.shape[0], t.offset, dtype=np.int64)
        for p, s in enumerate(t.settings):
            if s is not None:
                x += s[1] * table[:, sc.slot(p, s[0])].astype(np.int64)
        vals += int(t.weight * scale) * (x % K)
    return vals, scale


def local_bound(expr) -> tuple[Fraction, list[DeterministicStrategy]]:
    """Exact optimum of the expression over deterministic strategies.

    Minimum for >=-type expressions, maximum for <=-type; the second element
    lists every optimizer, in enumeration order.
    """
    sc = expr.scenario
    table = strategy_output_table(sc)
    vals, scale = deterministic_values(expr, table)
    opt = vals.min() if expr.comparator == GE else vals.max()
    idxs = np.flatnonzero(vals == opt)
    strategies = [DeterministicStrategy.from_index(sc, int(i)) for i in idxs]
    return Fraction(int(opt), scale), strategies


def behavior_vectors(scenario: Scenario, table: np.ndarray) -> sparse.csr_matrix:
    """0/1 behavior vectors (full probability parametrization, homogenized).

    Row layout: for each input combo (row-major over parties) the K^parties
    outcome probabilities, then a trailing affine 1.
    """
    K = scenario.outputs
    n = table.shape[0]
    combos = list(scenario.input_combos())
    ncols = len(combos) * K**scenario.parties + 1
    cols = np.empty((n, len(combos) + 1), dtype=np.int64)
    for t, combo in enumerate(combos):
        out_idx = np.zeros(n, dtype=np.int64)
        for p in range(scenario.parties):
            out_idx = out_idx * K + table[:, scenario.slot(p, combo[p])]
        cols[:, t] = t * K**scenario.parties + out_idx
    cols[:, -1] = ncols - 1
    data = np.ones(cols.size, dtype=np.int8)
    indptr = np.arange(0, cols.size + 1, len(combos) + 1)
    return sparse.csr_matrix(
        (data, cols.reshape(-1), indptr), shape=(n, ncols)
    )


def _certify_basis(
    scenario: Scenario, table: np.ndarray, basis_sources, ncols, p2, exact=False
) -> None:
    """Certify the selected vertex rows are independent over Q.

    Full rank modulo an independent prime implies a nonzero integer minor,
    which is an exact certificate.  ``exact`` additionally runs rational
    elimination (for small instances).
    """
    if not basis_sources:
        return
    sub = table[np.asarray(basis_sources, dtype=np.int64)]
    rows = np.asarray(
        behavior_vectors(scenario, sub).todense(), dtype=np.int64
    )
    ech = ModpEchelon(ncols, p2)
    ech.add_rows(rows)
    if ech.rank != len(basis_sources):
        raise ArithmeticError(
            "mod-p rank filter produced a dependent basis; rerun with a new prime"
        )
    if exact and rank_fraction(rows) != len(basis_sources):
        raise ArithmeticError("rational elimination disagrees with mod-p rank")


def _affine_rank_of_rows(
    scenario: Scenario, table: np.ndarray, row_indices, seed: int = 0
) -> int:
    """Exactly certified affine rank of the behavior vectors of the rows."""
    rng = np.random.default_rng(seed)
    p1, p2 = sample_prime_31(rng), sample_prime_31(rng)
    sub = table[row_indices] if row_indices is not None else table
    vecs = behavior_vectors(scenario, sub)
    ncols = vecs.shape[1]
    ech = ModpEchelon(ncols, p1)
    chunk = 2048
    for start in range(0, vecs.shape[0], chunk):
        block = vecs[start:start + chunk]
        ech.add_sparse_01(block, range(start, start + block.shape[0]))
    sources = (
        [int(i) for i in ech.basis_sources]
        if row_indices is None
        else [int(np.asarray(row_indices)[i]) for i in ech.basis_sources]
    )
    _certify_basis(
        scenario,
        table,
        sources,
        ncols,
        p2,
        exact=ncols <= EXACT_PASS_MAX_COLS,
    )
    return ech.rank - 1  # homogenized: affine rank = linear rank - 1


_DIM_CACHE: dict[Scenario, int] = {}


def polytope_dimension(scenario: Scenario, seed: int = 0) -> int:
    """Affine dimension of the local polytope in the full parametrization."""
    if scenario not in _DIM_CACHE:
        _guard(scenario)
        table = strategy_output_table(scenario)
        _DIM_CACHE[scenario] = _affine_rank_of_rows(scenario, table, None, seed)
    return _DIM_CACHE[scenario]


def facet_check(expr, seed: int = 0) -> FacetReport:
    """Tightness report: saturating vertices and their exact affine rank."""
    sc = expr.scenario
    table = strategy_output_table(sc)
    vals, scale = deterministic_values(expr, table)
    bound_scaled = expr.bound * scale
    if bound_scaled.denominator == 1:
        b = int(bound_scaled)
        if expr.comparator == GE:
            bad = np.flatnonzero(vals < b)
        else:
            bad = np.flatnonzero(vals > b)
        sat = np.flatnonzero(vals == b)
    else:  # fractional bound cannot be met exactly by integer-valued vertices
        bad = np.array(
            [], dtype=np.int64
        ) if _bound_respected(vals, bound_scaled, expr.comparator) else np.array([0])
        sat = np.array([], dtype=np.int64)
    dim = polytope_dimension(sc, seed)
    if bad.size:
        witness = DeterministicStrategy.from_index(sc, int(bad[0]))
        return FacetReport(dim, 0, -1, False, False, expr.bound, witness)
    if sat.size == 0:
        return FacetReport(dim, 0, -1, False, True, expr.bound)
    rank = _affine_rank_of_rows(sc, table, sat, seed)
    return FacetReport(dim, int(sat.size), rank, rank == dim - 1, True, expr.bound)


def _bound_respected(vals: np.ndarray, bound_scaled: Fraction, comparator: str) -> bool:
    if comparator == GE:
        return Fraction(int(vals.min())) >= bound_scaled
    return Fraction(int(vals.max())) <= bound_scaled
