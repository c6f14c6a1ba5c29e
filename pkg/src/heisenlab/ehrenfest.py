"""Quantifying where expectation values depart from classical motion.

For a 1-dof potential Hamiltonian the expectation of the force obeys
``d<p>/dt = -<V'(x)>``, which looks classical only when
``<V'(x)> = V'(<x>)``.  When ``V'`` is (at most) quadratic,
``V' = c0 + alpha x + beta x^2``, the gap is exactly

    <V'(x)> - V'(<x>) = beta * (dx)^2 ,

with ``dx`` the position uncertainty; for higher-degree derivatives no
closed residual exists and only the raw residual is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import P, Q, PolyHamiltonian, classical_value, evaluate, formal_partial
from .operators import expectation, position_operator, uncertainty
from .states import QuantumState
from .timeseries import TimeSeries


@dataclass(frozen=True)
class DeviationReport:
    """Snapshot of the expectation-vs-classical force gap in one state.

    ``residual`` is stored as the literal difference of the two stored
    force numbers.  ``predicted_residual`` is ``beta * delta_x**2`` when
    the potential derivative has degree <= 2, else ``None``.
    """

    mean_force: float
    classical_force_at_mean: float
    residual: float
    predicted_residual: float | None
    delta_x: float


@dataclass(frozen=True)
class DivergenceMetrics:
    """Gap statistics between paired channels of two aligned series."""

    max_abs_gap: float
    time_of_max: float
    rms_gap: float
    channel_pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if self.max_abs_gap < 0.0:
            raise ValueError("max_abs_gap must be nonnegative")
        if self.rms_gap > self.max_abs_gap * (1.0 + 1e-12):
            raise ValueError("rms gap cannot exceed the max gap")


def _potential_part(h: PolyHamiltonian) -> PolyHamiltonian:
    if h.basis.n_dofs != 1:
        raise ValueError(f"deviation reports are 1-dof only, Hamiltonian has {h.basis.n_dofs}")
    for term in h.terms:
        kinds = {kind for _, kind, _ in term.factors}
        if kinds == {Q, P}:
            raise ValueError("Hamiltonian is not of potential form p^2/2m + V(q)")
    return PolyHamiltonian(h.basis, [t for t in h.terms if t.exponent(0, P) == 0])


def ehrenfest_check(state: QuantumState, h: PolyHamiltonian) -> DeviationReport:
    """Measure ``<V'(x)> - V'(<x>)`` in the given state.

    ``<V'(x)>`` comes from the dense operator of the formal derivative,
    ``V'(<x>)`` from scalar evaluation at the position mean.
    """
    potential = _potential_part(h)
    v_prime = formal_partial(potential, 0, Q)
    x_op = position_operator(h.basis, 0)
    mean_x = expectation(state, x_op).real
    delta_x = uncertainty(state, x_op)
    mean_force = expectation(state, evaluate(v_prime)).real
    classical_force = classical_value(v_prime, [mean_x], [0.0])
    residual = mean_force - classical_force
    if v_prime.degree <= 2:
        beta = v_prime.coefficient([(0, Q, 2)])
        predicted = beta * delta_x**2
    else:
        predicted = None
    return DeviationReport(
        mean_force=mean_force,
        classical_force_at_mean=classical_force,
        residual=residual,
        predicted_residual=predicted,
        delta_x=delta_x,
    )


def compare_trajectories(
    quantum: TimeSeries,
    classical: TimeSeries,
    channel_pairs: list[tuple[str, str]],
) -> DivergenceMetrics:
    """Max/RMS gaps between paired channels; the grids must be identical.

    Interpolation is deliberately unsupported: the harness samples both
    sides on one grid so that exactness claims are not polluted.
    """
    if not np.array_equal(quantum.times, classical.times):
        raise ValueError("time grids differ; sample both series on one grid")
    if not channel_pairs:
        raise ValueError("no channel pairs to compare")
    gaps = np.stack(
        [quantum.channel(qn) - classical.channel(cn) for qn, cn in channel_pairs]
    )
    abs_gaps = np.abs(gaps)
    flat_idx = int(np.argmax(abs_gaps))
    _, t_idx = np.unravel_index(flat_idx, abs_gaps.shape)
    return DivergenceMetrics(
        max_abs_gap=float(abs_gaps.max()),
        time_of_max=float(quantum.times[t_idx]),
        rms_gap=float(np.sqrt(np.mean(gaps**2))),
        channel_pairs=tuple((str(a), str(b)) for a, b in channel_pairs),
    )


def linear_scenario_exactness(h: PolyHamiltonian) -> bool:
    """True when every formal partial of ``H`` has total degree <= 1.

    The operator equations of motion are then linear in the observables,
    so expectation values follow the classical trajectory exactly for
    every state; the harness uses this to route tolerances.
    """
    for dof in range(h.basis.n_dofs):
        for kind in (Q, P):
            if formal_partial(h, dof, kind).degree > 1:
                return False
    return True
