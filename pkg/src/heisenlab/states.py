"""Normalized state vectors: Fock states, coherent states, products.

Truncated coherent states are admitted only when the Poisson weight lost
to truncation stays below a tail threshold (1e-10 by default), so that
expectation values computed on the truncated basis carry no visible
truncation error.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .basis import BasisSpec

NORM_TOLERANCE = 1e-12
COHERENT_TAIL_THRESHOLD = 1e-10


class QuantumState:
    """Complex amplitude vector on a :class:`BasisSpec`, unit norm enforced."""

    __slots__ = ("basis", "amplitudes")

    def __init__(self, basis: BasisSpec, amplitudes):
        amplitudes = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape != (basis.dimension,):
            raise ValueError(
                f"amplitude vector has length {amplitudes.size}, basis dimension is {basis.dimension}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"state is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        amplitudes.setflags(write=False)
        self.basis = basis
        self.amplitudes = amplitudes

    def overlap(self, other: "QuantumState") -> complex:
        if self.basis != other.basis:
            raise ValueError("states live on different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"QuantumState(dim={self.basis.dimension})"


def normalized_state(basis: BasisSpec, amplitudes) -> QuantumState:
    """Build a state from an arbitrary nonzero vector, normalizing it."""
    amplitudes = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(amplitudes)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return QuantumState(basis, amplitudes / norm)


def fock_state(basis: BasisSpec, levels: int | Sequence[int] = 0) -> QuantumState:
    """Product Fock state ``|k_0, k_1, ...>`` (one level per dof)."""
    if np.isscalar(levels):
        levels = [int(levels)] * basis.n_dofs
    levels = [int(k) for k in levels]
    if len(levels) != basis.n_dofs:
        raise ValueError(f"need one level per dof, got {len(levels)} for {basis.n_dofs} dofs")
    if any(not 0 <= k < basis.n_levels for k in levels):
        raise ValueError(f"Fock levels {levels} out of range for n_levels={basis.n_levels}")
    flat = 0
    for k in levels:
        flat = flat * basis.n_levels + k
    amplitudes = np.zeros(basis.dimension, dtype=np.complex128)
    amplitudes[flat] = 1.0
    return QuantumState(basis, amplitudes)


def _coherent_factor(n_levels: int, alpha: complex, tail_threshold: float) -> np.ndarray:
    alpha = complex(alpha)
    amps = np.zeros(n_levels, dtype=np.complex128)
    amps[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, n_levels):
        amps[k] = amps[k - 1] * alpha / np.sqrt(k)
    kept = float(np.vdot(amps, amps).real)
    tail = max(1.0 - kept, 0.0)
    if tail > tail_threshold:
        raise ValueError(
            f"coherent amplitude |alpha|={abs(alpha):.3g} too large for n_levels={n_levels}: "
            f"truncated tail mass {tail:.3e} exceeds threshold {tail_threshold:.1e}"
        )
    return amps / np.sqrt(kept)


def product_coherent_state(
    basis: BasisSpec,
    alphas: Sequence[complex],
    tail_threshold: float = COHERENT_TAIL_THRESHOLD,
) -> QuantumState:
    """Tensor product of per-dof truncated coherent states."""
    alphas = list(alphas)
    if len(alphas) != basis.n_dofs:
        raise ValueError(f"need one alpha per dof, got {len(alphas)} for {basis.n_dofs} dofs")
    amps = np.array([1.0], dtype=np.complex128)
    for alpha in alphas:
        amps = np.kron(amps, _coherent_factor(basis.n_levels, alpha, tail_threshold))
    return QuantumState(basis, amps / np.linalg.norm(amps))


def coherent_state(
    basis: BasisSpec,
    dof: int = 0,
    alpha: complex = 0j,
    tail_threshold: float = COHERENT_TAIL_THRESHOLD,
) -> QuantumState:
    """Coherent state on one dof, vacuum on the others.

    The truncated amplitudes are renormalized; admission requires the lost
    Poisson tail to stay below ``tail_threshold``.
    """
    if not 0 <= dof < basis.n_dofs:
        raise ValueError(f"dof index {dof} out of range for {basis.n_dofs} dofs")
    alphas = [0j] * basis.n_dofs
    alphas[dof] = complex(alpha)
    return product_coherent_state(basis, alphas, tail_threshold)
