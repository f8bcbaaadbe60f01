"""Alternating (see-saw) optimization of quantum violations.

Each restart alternates exact subproblem minimizations: every measurement is
updated by solving its POVM linear SDP, then the state is replaced by the
extremal eigenvector of the Bell operator.  Both steps are exact, so the
objective is monotone within a restart.  Restarts use independent seeds
spawned from the master seed and merge deterministically.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .expressions import GE
from .quantum import (
    Ket,
    MeasurementAssemblage,
    Povm,
    QuantumModel,
    VisibilityResult,
    bell_operator,
    haar_random_ket,
    max_eig_state,
    min_eig_state,
    random_povm,
    reduced_ranks,
    visibility,
)
from .scenario import ScenarioMismatchError
from .sdp import (
    SdpNonConvergence,
    contract_costs,
    polish_povm_solution,
    solve_povm_subproblem,
)

DEFAULT_MAX_SWEEPS = 500
DEFAULT_TOLERANCE = 1e-9

MODE_FREE = "free"
MODE_FIXED_STATE = "fixed-state"
MODE_FIXED_MEASUREMENTS = "fixed-measurements"
MODE_SYMMETRIC = "symmetric"
MODES = (MODE_FREE, MODE_FIXED_STATE, MODE_FIXED_MEASUREMENTS, MODE_SYMMETRIC)


def default_restarts(dims) -> int:
    return 50 if max(dims) <= 3 else 200


@dataclass(frozen=True)
class SeesawConfig:
    dimensions: tuple[int, ...]
    restarts: int | None = None
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    mode: str = MODE_FREE
    threads: int = 1
    sdp_tolerance: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(int(d) for d in self.dimensions))
        if any(d < 1 for d in self.dimensions):
            raise ValueError("dimensions must be >= 1")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def effective_restarts(self) -> int:
        if self.restarts is not None:
            return self.restarts
        return default_restarts(self.dimensions)


@dataclass(frozen=True)
class RestartTrace:
    restart_index: int
    final_value: float
    sweeps: int
    values: tuple[float, ...] = ()  # objective after every update step


@dataclass(frozen=True)
class SeesawResult:
    value: float
    model: QuantumModel
    visibility: VisibilityResult
    traces: tuple[RestartTrace, ...]
    reduced_ranks: tuple[int, ...]


class SeesawError(RuntimeError):
    """SDP failure inside a restart; carries the restart index."""

    def __init__(self, message, restart_index):
        super().__init__(f"restart {restart_index}: {message}")
        self.restart_index = restart_index


def _n_inputs(expr) -> tuple[int, ...]:
    return expr.scenario.inputs_per_party


def initialize_random(dims, K: int, seed, n_inputs=None) -> QuantumModel:
    """Haar-random pure state with random rank-profile projective POVMs."""
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in dims)
    if n_inputs is None:
        n_inputs = (2,) * len(dims)
    state = haar_random_ket(dims, rng)
    povms = tuple(
        tuple(random_povm(d, K, rng) for _ in range(m))
        for d, m in zip(dims, n_inputs)
    )
    return QuantumModel(state, MeasurementAssemblage(povms))


def _objective_sign(expr) -> int:
    """+1 when violations lie below the bound (minimize), -1 above (maximize)."""
    return 1 if expr.comparator == GE else -1


def _model_value(expr, model) -> float:
    B = bell_operator(expr, model.assemblage)
    if isinstance(model.state, Ket):
        psi = model.state.amplitudes
        return float(np.real(psi.conj() @ B @ psi))
    return float(np.real(np.trace(B @ model.state)))


def _repair_povm(elements) -> Povm:
    """Project near-feasible SDP output onto exact completeness and PSD."""
    K = len(elements)
    d = elements[0].shape[0]
    ms = [0.5 * (m + m.conj().T) for m in elements]
    shift = (np.eye(d) - sum(ms)) / K
    clipped = []
    for m in ms:
        vals, vecs = np.linalg.eigh(m + shift)
        clipped.append((vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T)
    shift = (np.eye(d) - sum(clipped)) / K
    return Povm(tuple(m + shift for m in clipped))


def _update_measurement(expr, model, party, inp, sign, sdp_tol, restart_index):
    sub = contract_costs(expr, model, party, inp)
    if sign < 0:
        sub = replace(sub, costs=tuple(-f for f in sub.costs))
    try:
        sol = solve_povm_subproblem(sub, tol=sdp_tol)
    except SdpNonConvergence as exc:
        # iteration cap with a near-optimal iterate is fine for see-saw
        if exc.solution is None or abs(exc.solution.gap) > 1e-6:
            raise SeesawError(str(exc), restart_index) from exc
        sol = exc.solution
    polished = polish_povm_solution(sub, sol)
    if polished is not None:
        new_povm = Povm(tuple(polished))
    else:
        new_povm = _repair_povm(sol.povm)
    povms = list(list(p) for p in model.assemblage.povms)
    povms[party][inp] = new_povm
    assemblage = MeasurementAssemblage(tuple(tuple(p) for p in povms))
    candidate = QuantumModel(model.state, assemblage)
    return candidate, _model_value(expr, candidate)


def _update_state(expr, model, sign):
    dims = model.assemblage.dimensions
    B = bell_operator(expr, model.assemblage)
    if sign > 0:
        value, ket = min_eig_state(B, dims)
    else:
        value, ket = max_eig_state(B, dims)
    return QuantumModel(ket, model.assemblage), value


def _symmetrize_model(model: QuantumModel) -> QuantumModel:
    """Share party 0's POVMs across all parties (dimensions must agree)."""
    shared = model.assemblage.povms[0]
    assemblage = MeasurementAssemblage((shared,) * model.assemblage.parties)
    return QuantumModel(model.state, assemblage)


def _run_restart(expr, config: SeesawConfig, model: QuantumModel, restart_index: int):
    sc = expr.scenario
    sign = _objective_sign(expr)
    update_state = config.mode in (MODE_FREE, MODE_SYMMETRIC)
    symmetric = config.mode == MODE_SYMMETRIC
    value = _model_value(expr, model)
    history = [value]
    sweeps = 0
    for sweep in range(1, config.max_sweeps + 1):
        sweeps = sweep
        prev = value
        for party in range(sc.parties):
            for inp in range(sc.inputs_per_party[party]):
                candidate, cand_value = _update_measurement(
                    expr, model, party, inp, sign, config.sdp_tolerance,
                    restart_index,
                )
                if symmetric:
                    # share the update across parties, keep only if it helps
                    shared = _symmetrize_model(
                        QuantumModel(
                            model.state,
                            candidate.assemblage.permute_parties(
                                [party] * sc.parties
                            ),
                        )
                    )
                    shared_value = _model_value(expr, shared)
                    if sign * shared_value <= sign * value + 1e-12:
                        model, value = shared, shared_value
                elif sign * (cand_value - value) <= 1e-9:
                    # the update is an exact minimization; reject the rare
                    # candidate that numerical noise made noticeably worse,
                    # but let equal-value plateau moves through
                    model, value = candidate, cand_value
                history.append(value)
        if update_state:
            model, value = _update_state(expr, model, sign)
            history.append(value)
        if abs(prev - value) <= config.tolerance * max(1.0, abs(prev)):
            break
    return value, model, RestartTrace(restart_index, value, sweeps, tuple(history))


def _initial_model(expr, config: SeesawConfig, state, restart_seed):
    sc = expr.scenario
    K = sc.outputs
    model = initialize_random(
        config.dimensions, K, restart_seed, n_inputs=sc.inputs_per_party
    )
    if config.mode == MODE_SYMMETRIC:
        if len(set(config.dimensions)) != 1:
            raise ValueError("symmetric mode needs equal local dimensions")
        model = _symmetrize_model(model)
    if state is not None:
        model = QuantumModel(state, model.assemblage)
    return model


def seesaw(
    expr,
    config: SeesawConfig,
    state: Ket | np.ndarray | None = None,
    assemblage: MeasurementAssemblage | None = None,
) -> SeesawResult:
    """Best violation over seeded restarts of alternating optimization.

    ``state`` pins the state in fixed-state mode; ``assemblage`` pins the
    measurements in fixed-measurements mode.  Sweep order is parties
    cyclically, inputs in order, then a state update (free and symmetric
    modes); each restart stops when the objective settles within tolerance.
    """
    if config.mode == MODE_FIXED_STATE and state is None:
        raise ValueError("fixed-state mode needs a state")
    if config.mode == MODE_FIXED_MEASUREMENTS:
        if assemblage is None:
            raise ValueError("fixed-measurements mode needs an assemblage")
        value, ket = seesaw_fixed_measurements(expr, assemblage)
        model = QuantumModel(ket, assemblage)
        return SeesawResult(
            value,
            model,
            visibility(expr, model),
            (RestartTrace(0, value, 1),),
            reduced_ranks(ket, assemblage.dimensions),
        )
    if state is not None and config.mode not in (MODE_FIXED_STATE,):
        raise ValueError("a state argument requires fixed-state mode")
    if isinstance(state, Ket) and state.local_dimensions != config.dimensions:
        raise ScenarioMismatchError("state does not match config dimensions")

    sign = _objective_sign(expr)
    n = config.effective_restarts
    seeds = np.random.SeedSequence(config.seed).spawn(n)

    def run(i):
        model = _initial_model(expr, config, state, seeds[i])
        return _run_restart(expr, config, model, i)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            outcomes = list(pool.map(run, range(n)))
    else:
        outcomes = [run(i) for i in range(n)]

    best_i = min(range(n), key=lambda i: (sign * outcomes[i][0], i))
    best_value, best_model, _ = outcomes[best_i]
    traces = tuple(t for _, _, t in outcomes)
    dims = best_model.assemblage.dimensions
    return SeesawResult(
        best_value,
        best_model,
        visibility(expr, best_model),
        traces,
        reduced_ranks(best_model.state, dims),
    )


def seesaw_fixed_state(expr, state, dims, config: SeesawConfig) -> SeesawResult:
    """Optimize measurements only, for a given state."""
    dims = tuple(int(d) for d in dims)
    if isinstance(state, Ket):
        if state.local_dimensions != dims:
            raise ScenarioMismatchError("state does not match dims")
    cfg = replace(config, dimensions=dims, mode=MODE_FIXED_STATE)
    return seesaw(expr, cfg, state=state)


def seesaw_fixed_measurements(expr, assemblage: MeasurementAssemblage):
    """Optimal state for fixed measurements: extremal Bell-operator eigenpair."""
    sign = _objective_sign(expr)
    B = bell_operator(expr, assemblage)
    dims = assemblage.dimensions
    if sign > 0:
        return min_eig_state(B, dims)
    return max_eig_state(B, dims)
