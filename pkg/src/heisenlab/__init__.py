"""heisenlab: matrix-mechanics laboratory on truncated oscillator bases.

Builds dense operator representations of canonical observables, evolves
them spectrally in the Heisenberg picture, and checks -- at machine
precision on truncation-safe interior blocks -- that the operator
equations of motion coincide with Newton's, Lorentz's, the rotating-frame
and Hamilton's classical equations, while quantifying where expectation
values depart from classical trajectories.
"""

__version__ = "0.1.0"

from .basis import BasisSpec, make_basis
from .classical import (
    ClassicalState,
    IntegratorConfig,
    integrate_hamilton,
    integrate_lorentz,
    integrate_newton,
    integrate_rotating,
)
from .ehrenfest import (
    DeviationReport,
    DivergenceMetrics,
    compare_trajectories,
    ehrenfest_check,
    linear_scenario_exactness,
)
from .evolution import (
    SpectralPropagator,
    heisenberg_evolve,
    heisenberg_rhs,
    make_propagator,
    sample_expectations,
    schrodinger_evolve,
)
from .hamiltonians import (
    FieldConfig,
    Monomial,
    PolyHamiltonian,
    build_em_hamiltonian,
    build_gravity_taylor,
    build_potential_hamiltonian,
    build_rotating_frame,
    classical_value,
    evaluate,
    formal_partial,
    hamiltonian_from_text,
    hamiltonian_to_text,
    kinetic_momentum_operator,
    monomial,
)
from .operators import (
    ANTI_HERMITIAN,
    GENERAL,
    HERMITIAN,
    InteriorBlock,
    Operator,
    commutator,
    expectation,
    identity_operator,
    interior_project,
    lowering_operator,
    momentum_operator,
    position_operator,
    uncertainty,
)
from .states import QuantumState, coherent_state, fock_state, product_coherent_state
from .timeseries import TimeSeries
from .verify import CheckResult, IdentityCheck, VerifyConfig, run_all

__all__ = [
    "ANTI_HERMITIAN",
    "BasisSpec",
    "CheckResult",
    "ClassicalState",
    "DeviationReport",
    "DivergenceMetrics",
    "FieldConfig",
    "GENERAL",
    "HERMITIAN",
    "IdentityCheck",
    "IntegratorConfig",
    "InteriorBlock",
    "Monomial",
    "Operator",
    "PolyHamiltonian",
    "QuantumState",
    "SpectralPropagator",
    "TimeSeries",
    "VerifyConfig",
    "build_em_hamiltonian",
    "build_gravity_taylor",
    "build_potential_hamiltonian",
    "build_rotating_frame",
    "classical_value",
    "coherent_state",
    "commutator",
    "compare_trajectories",
    "ehrenfest_check",
    "evaluate",
    "expectation",
    "fock_state",
    "formal_partial",
    "hamiltonian_from_text",
    "hamiltonian_to_text",
    "heisenberg_evolve",
    "heisenberg_rhs",
    "identity_operator",
    "integrate_hamilton",
    "integrate_lorentz",
    "integrate_newton",
    "integrate_rotating",
    "interior_project",
    "kinetic_momentum_operator",
    "linear_scenario_exactness",
    "lowering_operator",
    "make_basis",
    "make_propagator",
    "momentum_operator",
    "monomial",
    "position_operator",
    "product_coherent_state",
    "run_all",
    "sample_expectations",
    "schrodinger_evolve",
    "uncertainty",
]
