import math

import numpy as np
import pytest

from bellkit.catalog import catalog
from bellkit.expressions import evaluate
from bellkit.quantum import (
    Ket,
    QuantumModel,
    behavior_of,
    bell_operator,
    deterministic_assemblage,
    embed_ket,
    fourier_assemblage,
    ghz_value_closed_form,
    haar_random_ket,
    max_eig_state,
    mermin_assemblage,
    min_eig_state,
    optimize_fourier_phases,
    psi3_assemblage,
    random_povm,
    reduced_ranks,
    state_factory,
    visibility,
)
from bellkit.scenario import ScenarioMismatchError

from conftest import random_model


def test_povm_invariants_1000_draws(rng):
    """Hermiticity, positivity, completeness, and rank bookkeeping."""
    for _ in range(1000):
        d = int(rng.integers(2, 6))
        K = int(rng.integers(2, 6))
        povm = random_povm(d, K, rng)
        assert povm.outcomes == K
        total = np.zeros((d, d), dtype=complex)
        ranks = 0
        for e in povm.elements:
            assert np.abs(e - e.conj().T).max() < 1e-10
            assert np.linalg.eigvalsh(e).min() > -1e-9
            ranks += int(round(np.trace(e).real))
            total += e
        assert np.abs(total - np.eye(d)).max() < 1e-9
        assert ranks == d  # projective: element traces are the rank profile


@pytest.mark.parametrize("K", [2, 3, 4])
def test_bell_operator_matches_direct_evaluation(K, rng):
    """<psi|B|psi> equals the behavior-level evaluation, 50 models per K."""
    expr = catalog("mermin-cglmp", K)
    for _ in range(50):
        dims = tuple(int(rng.integers(2, 4)) for _ in range(3))
        model = random_model(dims, K, (2, 2, 2), rng)
        B = bell_operator(expr, model.assemblage)
        psi = model.state.amplitudes
        direct = evaluate(expr, behavior_of(model))
        assert abs(float(np.real(psi.conj() @ B @ psi)) - direct) < 1e-9


def test_bell_operator_symmetric_sum_expression(rng):
    expr = catalog("symm-A3", 3)
    for _ in range(10):
        model = random_model((3, 3, 3), 3, (2, 2, 2), rng)
        B = bell_operator(expr, model.assemblage)
        psi = model.state.amplitudes
        direct = evaluate(expr, behavior_of(model))
        assert abs(float(np.real(psi.conj() @ B @ psi)) - direct) < 1e-9


def test_behavior_of_mixed_state_agrees_with_pure(rng):
    model = random_model((2, 3, 2), 3, (2, 2, 2), rng)
    mixed = QuantumModel(model.state.density_matrix(), model.assemblage)
    assert np.allclose(
        behavior_of(model).probabilities, behavior_of(mixed).probabilities, atol=1e-12
    )


def test_behavior_party_permutation_covariance(rng):
    model = random_model((2, 2, 2), 2, (2, 2, 2), rng)
    perm = (2, 0, 1)
    permuted = QuantumModel(
        Ket(
            tuple(model.state.local_dimensions[p] for p in perm),
            np.transpose(model.state.as_tensor(), perm).reshape(-1),
        ),
        model.assemblage.permute_parties(perm),
    )
    assert np.allclose(
        behavior_of(permuted).probabilities,
        behavior_of(model).permute_parties(perm).probabilities,
        atol=1e-12,
    )


def test_eigensolver_reconstruction(rng):
    for d in (8, 27, 343):
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        B = z + z.conj().T
        scale = np.abs(B).max()
        val, ket = min_eig_state(B, (d,))
        assert np.linalg.norm(B @ ket.amplitudes - val * ket.amplitudes) < 1e-8 * scale
        top, ket2 = max_eig_state(B, (d,))
        assert np.linalg.norm(B @ ket2.amplitudes - top * ket2.amplitudes) < 1e-8 * scale
        assert val <= top


def test_min_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        min_eig_state(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_state_factory_normalization_and_ranks():
    for name, dims, ranks in [
        ("ghz2", (2, 2, 2), (2, 2, 2)),
        ("ghz3", (3, 3, 3), (3, 3, 3)),
        ("w", (2, 2, 2), (2, 2, 2)),
        ("aharonov", (3, 3, 3), (3, 3, 3)),
        ("psi3", (2, 2, 2), (2, 2, 2)),
    ]:
        ket = state_factory(name)
        assert ket.local_dimensions == dims
        assert abs(np.linalg.norm(ket.amplitudes) - 1) < 1e-12
        assert reduced_ranks(ket, dims) == ranks
    assert state_factory("ghz", 5).local_dimensions == (5, 5, 5)
    with pytest.raises(ValueError):
        state_factory("ghz")
    with pytest.raises(ValueError):
        state_factory("bell")


def test_aharonov_permutation_antisymmetry():
    T = state_factory("aharonov").as_tensor()
    assert np.allclose(np.transpose(T, (1, 0, 2)), -T)
    assert np.allclose(np.transpose(T, (0, 2, 1)), -T)
    assert np.allclose(np.transpose(T, (1, 2, 0)), T)


def test_embed_ket():
    psi = state_factory("psi3")
    big = embed_ket(psi, (3, 3, 3))
    assert big.local_dimensions == (3, 3, 3)
    assert np.allclose(big.as_tensor()[:2, :2, :2], psi.as_tensor())
    assert abs(np.linalg.norm(big.amplitudes) - 1) < 1e-12
    with pytest.raises(ScenarioMismatchError):
        embed_ket(psi, (2, 2, 1))


def test_fourier_assemblage_is_projective():
    asm = fourier_assemblage(5, np.zeros((3, 2)))
    for per_party in asm.povms:
        for povm in per_party:
            total = sum(povm.elements)
            assert np.abs(total - np.eye(5)).max() < 1e-12
            for e in povm.elements:
                assert np.abs(e @ e - e).max() < 1e-12


def test_ghz_paradox_correlators():
    """ghz2 with the equatorial measurements realizes the paradox exactly."""
    model = QuantumModel(state_factory("ghz2"), mermin_assemblage())
    beh = behavior_of(model)
    assert beh.correlator(2, 1, 1) == pytest.approx(1.0, abs=1e-12)
    assert beh.correlator(1, 2, 1) == pytest.approx(1.0, abs=1e-12)
    assert beh.correlator(1, 1, 2) == pytest.approx(1.0, abs=1e-12)
    assert beh.correlator(2, 2, 2) == pytest.approx(-1.0, abs=1e-12)
    assert evaluate(catalog("mermin-cglmp", 2), beh) == pytest.approx(0.0, abs=1e-9)


def test_psi3_closed_form_value():
    """The displayed qubit strategy reaches (7 - 3 sqrt 3)/2 at K=3."""
    model = QuantumModel(state_factory("psi3"), psi3_assemblage())
    value = evaluate(catalog("mermin-cglmp", 3), behavior_of(model))
    assert abs(value - (7 - 3 * math.sqrt(3)) / 2) < 1e-10


def test_psi3_qutrit_embedding_agrees():
    small = QuantumModel(state_factory("psi3"), psi3_assemblage(2))
    big = QuantumModel(
        embed_ket(state_factory("psi3"), (3, 3, 3)), psi3_assemblage(3)
    )
    expr = catalog("mermin-cglmp", 3)
    v1 = evaluate(expr, behavior_of(small))
    v2 = evaluate(expr, behavior_of(big))
    assert abs(v1 - v2) < 1e-12
    for per_party in big.assemblage.povms:
        for povm in per_party:
            for e in povm.elements:
                assert np.abs(e @ e - e).max() < 1e-12  # projective after lift


def test_visibility_interpolation_hits_bound(rng):
    """Mixing the state with the noise at the reported v lands on the bound."""
    expr = catalog("mermin-cglmp", 3)
    model = QuantumModel(state_factory("psi3"), psi3_assemblage())
    res = visibility(expr, model)
    assert res.violating
    # reconstruct the support-noise density matrix
    from bellkit.quantum import reduced_density, _support_projector

    dims = model.assemblage.dimensions
    projs = [
        _support_projector(reduced_density(model.state, dims, p))[0]
        for p in range(3)
    ]
    mix = projs[0]
    for P in projs[1:]:
        mix = np.kron(mix, P)
    mix /= res.noise_dimension
    rho = res.value * model.state.density_matrix() + (1 - res.value) * mix
    noisy = QuantumModel(rho, model.assemblage)
    assert evaluate(expr, behavior_of(noisy)) == pytest.approx(
        float(expr.bound), abs=1e-7
    )


def test_visibility_support_vs_ambient_full_rank(rng):
    # on a full-rank state the two noise conventions coincide
    expr = catalog("mermin-cglmp", 2)
    model = QuantumModel(state_factory("ghz2"), mermin_assemblage())
    sup = visibility(expr, model, noise="support")
    amb = visibility(expr, model, noise="ambient")
    assert sup.noise_dimension == amb.noise_dimension == 8
    assert sup.value == pytest.approx(amb.value, abs=1e-12)
    assert sup.value == pytest.approx(0.5, abs=1e-4)
    with pytest.raises(ValueError):
        visibility(expr, model, noise="depolarizing")


def test_visibility_non_violating_model():
    expr = catalog("mermin-cglmp", 3)
    model = QuantumModel(
        state_factory("ghz3"), deterministic_assemblage((3, 3, 3), 3)
    )
    res = visibility(expr, model)
    assert not res.violating
    assert res.value == 1.0


@pytest.mark.parametrize(
    "K,value,vis",
    [(2, 0, 0.5), (3, 1, 2 / 3), (4, 1, 0.6), (5, 2, 2 / 3), (10, 4, 9 / 14)],
)
def test_ghz_closed_form_table(K, value, vis):
    v, w = ghz_value_closed_form(K)
    assert v == value
    assert w == pytest.approx(vis, abs=1e-12)


def test_optimize_fourier_phases_k2_reaches_paradox():
    expr = catalog("mermin-cglmp", 2)
    phases, val = optimize_fourier_phases(expr, 2, n_starts=2, max_rounds=5)
    assert phases.shape == (3, 2)
    assert val == pytest.approx(0.0, abs=1e-6)
