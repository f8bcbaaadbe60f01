"""bellkit: tripartite Bell inequalities in modular bracket form.

Local-polytope bounds and facet checks by exact enumeration, quantum
violations by Bell-operator eigenproblems and see-saw optimization.
"""
from .catalog import CATALOG_NAMES, catalog
from .expressions import (
    BellExpression,
    BracketTerm,
    SymmetricSumExpression,
    bracket_expectation,
    evaluate,
    expand_to_coefficients,
    symmetrize,
)
from .polytope import (
    DeterministicStrategy,
    FacetReport,
    enumerate_strategies,
    facet_check,
    local_bound,
    polytope_dimension,
)
from .quantum import (
    Ket,
    MeasurementAssemblage,
    Povm,
    QuantumModel,
    behavior_of,
    bell_operator,
    ghz_value_closed_form,
    state_factory,
    visibility,
)
from .scenario import Behavior, Scenario, ScenarioMismatchError, tripartite
from .sdp import PovmSubproblem, solve_povm_subproblem
from .seesaw import (
    SeesawConfig,
    SeesawResult,
    initialize_random,
    seesaw,
    seesaw_fixed_measurements,
    seesaw_fixed_state,
)
from .textio import parse_expression, serialize_expression

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BellExpression",
    "BracketTerm",
    "CATALOG_NAMES",
    "DeterministicStrategy",
    "FacetReport",
    "Ket",
    "MeasurementAssemblage",
    "Povm",
    "PovmSubproblem",
    "QuantumModel",
    "Scenario",
    "ScenarioMismatchError",
    "SeesawConfig",
    "SeesawResult",
    "SymmetricSumExpression",
    "behavior_of",
    "bell_operator",
    "bracket_expectation",
    "catalog",
    "enumerate_strategies",
    "evaluate",
    "expand_to_coefficients",
    "facet_check",
    "ghz_value_closed_form",
    "initialize_random",
    "local_bound",
    "parse_expression",
    "polytope_dimension",
    "seesaw",
    "seesaw_fixed_measurements",
    "seesaw_fixed_state",
    "serialize_expression",
    "solve_povm_subproblem",
    "state_factory",
    "symmetrize",
    "tripartite",
    "visibility",
    "__version__",
]
