"""Exact spectral propagation of operators and states.

Sign convention
---------------
The evolution operator is ``U_t = exp(+i H t / hbar)``.  Operators evolve
as ``A(t) = U_t A U_t^+`` and the state obeying the usual Schroedinger
equation is ``|psi(t)> = U_t^+ |psi(0)> = exp(-i H t / hbar) |psi(0)>``.
Many texts attach the letter ``U`` to the opposite exponent; with the
convention above the two pictures agree through
``<psi0| U A U^+ |psi0> = <U^+ psi0| A |U^+ psi0>``.

Propagation is spectral (one hermitian eigendecomposition, then exact
phases), so no time-discretization error can masquerade as physics; time
steppers appear only in the classical oracle.  The propagator is immutable
after construction; evaluations at distinct times are independent and may
run concurrently against a shared instance.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .basis import BasisSpec
from .operators import HERMITIAN, Operator, commutator, expectation, uncertainty
from .states import QuantumState
from .timeseries import TimeSeries

RECONSTRUCTION_RTOL = 1e-10
UNITARITY_ATOL = 1e-10


class SpectralPropagator:
    """Eigendecomposition ``H = V diag(E) V^+`` with fixed eigenvector phases."""

    __slots__ = ("basis", "eigenvalues", "eigenvectors", "hbar")

    def __init__(self, basis: BasisSpec, eigenvalues: np.ndarray, eigenvectors: np.ndarray):
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        eigenvectors = np.asarray(eigenvectors, dtype=np.complex128)
        eigenvalues.setflags(write=False)
        eigenvectors.setflags(write=False)
        self.basis = basis
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.hbar = basis.hbar

    def phases(self, t: float, sign: float = 1.0) -> np.ndarray:
        """Diagonal of ``exp(sign * i E t / hbar)`` in the eigenbasis."""
        return np.exp(sign * 1j * self.eigenvalues * t / self.hbar)

    def unitary(self, t: float) -> np.ndarray:
        """Dense ``U_t = exp(+i H t / hbar)``."""
        v = self.eigenvectors
        return (v * self.phases(t)[None, :]) @ v.conj().T


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # Deterministic gauge: largest-magnitude component of each eigenvector
    # made real positive, so golden outputs are reproducible.
    fixed = vectors.copy()
    for k in range(fixed.shape[1]):
        col = fixed[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if pivot != 0:
            fixed[:, k] = col * (abs(pivot) / pivot)
    return fixed


def make_propagator(h: Operator) -> SpectralPropagator:
    """Diagonalize a hermitian operator and validate the decomposition.

    Raises ``ValueError`` for a non-hermitian input or if the eigensolver
    output fails the reconstruction / unitarity sanity bounds.
    """
    if h.hermitian_flag != HERMITIAN:
        raise ValueError("propagators require a hermitian-flagged operator")
    eigenvalues, vectors = np.linalg.eigh(h.matrix)
    vectors = _fix_phases(vectors)
    reconstructed = (vectors * eigenvalues[None, :]) @ vectors.conj().T
    h_norm = np.linalg.norm(h.matrix)
    if np.linalg.norm(reconstructed - h.matrix) > RECONSTRUCTION_RTOL * max(h_norm, 1e-300):
        raise ValueError("eigendecomposition failed the reconstruction bound")
    gram_defect = np.max(np.abs(vectors.conj().T @ vectors - np.eye(vectors.shape[0])))
    if gram_defect > UNITARITY_ATOL:
        raise ValueError(f"eigenvectors are not unitary: defect {gram_defect:.3e}")
    return SpectralPropagator(h.basis, eigenvalues, vectors)


def heisenberg_evolve(prop: SpectralPropagator, a: Operator, t: float) -> Operator:
    """``A(t) = U_t A U_t^+`` computed with exact spectral phases."""
    if a.basis != prop.basis:
        raise ValueError("operator and propagator live on different bases")
    v = prop.eigenvectors
    phases = prop.phases(t)
    a_eig = v.conj().T @ a.matrix @ v
    evolved = (phases[:, None] * a_eig) * phases.conj()[None, :]
    return Operator(a.basis, v @ evolved @ v.conj().T, a.hermitian_flag)


def schrodinger_evolve(prop: SpectralPropagator, psi: QuantumState, t: float) -> QuantumState:
    """``|psi(t)> = exp(-i H t / hbar) |psi(0)>``."""
    if psi.basis != prop.basis:
        raise ValueError("state and propagator live on different bases")
    v = prop.eigenvectors
    amps = v @ (prop.phases(t, sign=-1.0) * (v.conj().T @ psi.amplitudes))
    return QuantumState(psi.basis, amps / np.linalg.norm(amps))


def heisenberg_rhs(h: Operator, a: Operator) -> Operator:
    """Instantaneous Heisenberg derivative ``(i/hbar) [H, A]``.

    Hermitian for hermitian ``A`` (an ``i`` times an anti-hermitian
    commutator), which the flag arithmetic records.
    """
    if h.basis != a.basis:
        raise ValueError("operators live on different bases")
    return (1j / h.basis.hbar) * commutator(h, a)


def sample_expectations(
    prop: SpectralPropagator,
    psi0: QuantumState,
    observables: Mapping[str, Operator],
    t_grid: Sequence[float],
    uncertainties: Sequence[str] = (),
) -> TimeSeries:
    """Schroedinger-picture expectation channels on a shared time grid.

    Produces ``mean_<name>`` for every observable and ``delta_<name>``
    for the names listed in ``uncertainties``.  Real parts are recorded;
    hermitian observables keep imaginary parts at roundoff level.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or (t_grid.size > 1 and not np.all(np.diff(t_grid) > 0)):
        raise ValueError("t_grid must be a nonempty strictly increasing 1-d grid")
    unknown = set(uncertainties) - set(observables)
    if unknown:
        raise ValueError(f"uncertainty requested for unknown observables {sorted(unknown)}")
    means = {name: np.empty(t_grid.size) for name in observables}
    deltas = {name: np.empty(t_grid.size) for name in uncertainties}
    for k, t in enumerate(t_grid):
        psi_t = schrodinger_evolve(prop, psi0, float(t))
        for name, op in observables.items():
            means[name][k] = expectation(psi_t, op).real
            if name in deltas:
                deltas[name][k] = uncertainty(psi_t, op)
    channels: dict[str, np.ndarray] = {}
    for name in observables:
        channels[f"mean_{name}"] = means[name]
    for name in uncertainties:
        channels[f"delta_{name}"] = deltas[name]
    return TimeSeries(t_grid, channels)
