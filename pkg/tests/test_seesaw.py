import numpy as np
import pytest

from bellkit.catalog import catalog
from bellkit.quantum import (
    QuantumModel,
    behavior_of,
    deterministic_assemblage,
    mermin_assemblage,
    state_factory,
)
from bellkit.scenario import ScenarioMismatchError
from bellkit.seesaw import (
    SeesawConfig,
    initialize_random,
    seesaw,
    seesaw_fixed_measurements,
    seesaw_fixed_state,
)


def max_step_increase(result, comparator=">="):
    sign = 1 if comparator == ">=" else -1
    worst = -np.inf
    for trace in result.traces:
        if len(trace.values) > 1:
            worst = max(worst, sign * np.diff(trace.values).max())
    return worst


def test_config_validation():
    with pytest.raises(ValueError):
        SeesawConfig((2, 0, 2))
    with pytest.raises(ValueError):
        SeesawConfig((2, 2, 2), restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig((2, 2, 2), mode="annealing")
    assert SeesawConfig((2, 2, 2)).effective_restarts == 50
    assert SeesawConfig((4, 4, 2)).effective_restarts == 200
    assert SeesawConfig((4, 4, 2), restarts=7).effective_restarts == 7


def test_initialize_random_determinism():
    a = initialize_random((2, 3, 2), 3, 42)
    b = initialize_random((2, 3, 2), 3, 42)
    assert np.array_equal(a.state.amplitudes, b.state.amplitudes)
    for pa, pb in zip(a.assemblage.povms, b.assemblage.povms):
        for qa, qb in zip(pa, pb):
            for ea, eb in zip(qa.elements, qb.elements):
                assert np.array_equal(ea, eb)
    c = initialize_random((2, 3, 2), 3, 43)
    assert not np.array_equal(a.state.amplitudes, c.state.amplitudes)


def test_initialize_random_outcome_distribution():
    """On the maximally mixed state P(outcome k) averages rank_k / d."""
    rng_seed = 0
    d, K, draws = 3, 3, 10_000
    freq = np.zeros(K)
    expected = np.zeros(K)
    rng = np.random.default_rng(rng_seed)
    from bellkit.quantum import random_povm

    for _ in range(draws):
        povm = random_povm(d, K, rng)
        for k, e in enumerate(povm.elements):
            p = float(np.trace(e).real) / d
            freq[k] += p
            expected[k] += round(np.trace(e).real) / d
    # identical by construction (trace of a projector is its rank), and the
    # average rank profile is symmetric across outcomes
    assert np.allclose(freq / draws, expected / draws, atol=1e-12)
    assert np.allclose(freq / draws, 1 / K, atol=0.01)


def test_seed_determinism_bitstream():
    expr = catalog("mermin-cglmp", 3)
    cfg = SeesawConfig((2, 2, 2), restarts=3, seed=11)
    r1 = seesaw(expr, cfg)
    r2 = seesaw(expr, cfg)
    assert r1.value == r2.value
    assert np.array_equal(r1.model.state.amplitudes, r2.model.state.amplitudes)
    assert [t.values for t in r1.traces] == [t.values for t in r2.traces]
    assert r1.visibility.value == r2.visibility.value


def test_monotonicity_within_tolerance():
    """No accepted update step worsens the objective by more than 1e-9."""
    for name, K, dims in [("mermin-cglmp", 3, (2, 2, 2)), ("sliwa7-gen", 2, (2, 2, 2))]:
        expr = catalog(name, K)
        result = seesaw(expr, SeesawConfig(dims, restarts=5, seed=3))
        assert max_step_increase(result, expr.comparator) <= 1e-9


def test_le_expression_maximizes():
    expr = catalog("symm-A2", 3)
    result = seesaw(expr, SeesawConfig((2, 2, 2), restarts=5, seed=1))
    # quantum violations of a <=-type inequality lie above the bound
    assert result.value > float(expr.bound)
    assert max_step_increase(result, "<=") <= 1e-9


def test_fixed_state_requires_state():
    expr = catalog("mermin-cglmp", 3)
    with pytest.raises(ValueError):
        seesaw(expr, SeesawConfig((2, 2, 2), mode="fixed-state"))
    with pytest.raises(ValueError):
        seesaw(expr, SeesawConfig((2, 2, 2)), state=state_factory("ghz2"))
    with pytest.raises(ScenarioMismatchError):
        seesaw_fixed_state(
            expr, state_factory("ghz3"), (2, 2, 2), SeesawConfig((2, 2, 2))
        )


def test_fixed_measurements_closed_form():
    expr = catalog("mermin-cglmp", 2)
    value, ket = seesaw_fixed_measurements(expr, mermin_assemblage())
    assert value == pytest.approx(0.0, abs=1e-9)
    model = QuantumModel(ket, mermin_assemblage())
    from bellkit.expressions import evaluate

    assert evaluate(expr, behavior_of(model)) == pytest.approx(value, abs=1e-9)


def test_fixed_measurements_deterministic_assemblage():
    # all-outcome-0 measurements pin the value at the all-zero strategy's
    expr = catalog("mermin-cglmp", 3)
    value, _ = seesaw_fixed_measurements(
        expr, deterministic_assemblage((2, 2, 2), 3)
    )
    assert value == pytest.approx(2.0, abs=1e-12)


def test_symmetric_mode_shares_measurements():
    expr = catalog("mermin-sym", 2)
    result = seesaw(
        expr, SeesawConfig((2, 2, 2), restarts=3, seed=2, mode="symmetric")
    )
    povms = result.model.assemblage.povms
    for other in povms[1:]:
        for qa, qb in zip(povms[0], other):
            for ea, eb in zip(qa.elements, qb.elements):
                assert np.array_equal(ea, eb)
    with pytest.raises(ValueError):
        seesaw(
            catalog("mermin-cglmp", 3),
            SeesawConfig((2, 3, 2), restarts=1, mode="symmetric"),
        )


def test_traces_report_every_restart():
    expr = catalog("mermin-cglmp", 2)
    result = seesaw(expr, SeesawConfig((2, 2, 2), restarts=4, seed=0))
    assert len(result.traces) == 4
    assert [t.restart_index for t in result.traces] == [0, 1, 2, 3]
    sign_best = min(t.final_value for t in result.traces)
    assert result.value == pytest.approx(sign_best, abs=1e-12)
    for t in result.traces:
        assert t.values[-1] == pytest.approx(t.final_value, abs=1e-12)
        assert 1 <= t.sweeps <= 500
