"""Truncated harmonic-oscillator bases for dense matrix mechanics.

Every degree of freedom carries its own mass ``m`` and oscillator length
scale ``l``; the ladder operators of the reference oscillator then have
frequency ``w0 = hbar / (m * l**2)``.  The full Hilbert space is the tensor
product of the per-dof Fock spaces, each truncated to ``n_levels`` states,
with dof 0 the leftmost Kronecker factor (most significant index digit).

The canonical commutation relation has no exact finite-dimensional
representation: ``[x, p] = i*hbar`` fails on the highest basis state of
every dof.  All exactness claims made elsewhere in this package are
therefore restricted to interior blocks (see :mod:`heisenlab.operators`).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_MEMORY_BUDGET_MIB = 64.0

_BYTES_PER_ENTRY = 16  # complex128


@dataclass(frozen=True)
class BasisSpec:
    """Validated description of a truncated tensor-product oscillator basis.

    Instances are immutable; build them through :func:`make_basis`, which
    enforces positivity and the operator memory budget.
    """

    n_levels: int
    n_dofs: int
    hbar: float
    masses: tuple[float, ...]
    length_scales: tuple[float, ...]

    @property
    def dimension(self) -> int:
        """Total Hilbert-space dimension ``n_levels ** n_dofs``."""
        return self.n_levels**self.n_dofs

    def frequency(self, dof: int = 0) -> float:
        """Reference ladder frequency ``hbar / (m * l**2)`` of one dof."""
        return self.hbar / (self.masses[dof] * self.length_scales[dof] ** 2)

    def with_levels(self, n_levels: int) -> "BasisSpec":
        """Same physical parameters, different truncation depth."""
        return dataclasses.replace(self, n_levels=int(n_levels))


def _as_per_dof(value, n_dofs: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        values = (float(value),) * n_dofs
    else:
        values = tuple(float(v) for v in value)
    if len(values) != n_dofs:
        raise ValueError(f"{name} must have one entry per dof, got {len(values)} for {n_dofs} dofs")
    return values


def make_basis(
    n_levels: int,
    n_dofs: int = 1,
    hbar: float = 1.0,
    masses: float | Sequence[float] = 1.0,
    length_scales: float | Sequence[float] = 1.0,
    memory_budget_mib: float = DEFAULT_MEMORY_BUDGET_MIB,
) -> BasisSpec:
    """Build a validated :class:`BasisSpec`.

    Parameters
    ----------
    n_levels : int
        Fock states kept per degree of freedom.
    n_dofs : int
        Number of degrees of freedom (tensor factors).
    hbar : float
        Action quantum used by momentum operators and propagators.
    masses, length_scales : float or sequence of float
        Per-dof mass and oscillator length scale; scalars broadcast.
    memory_budget_mib : float
        Cap on the size of one dense operator matrix on this basis.

    Raises
    ------
    ValueError
        For non-positive parameters or a total dimension whose dense
        matrices would exceed the memory budget.
    """
    n_levels = int(n_levels)
    n_dofs = int(n_dofs)
    if n_levels < 2:
        raise ValueError(f"n_levels must be >= 2, got {n_levels}")
    if n_dofs < 1:
        raise ValueError(f"n_dofs must be >= 1, got {n_dofs}")
    hbar = float(hbar)
    if not hbar > 0.0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    masses = _as_per_dof(masses, n_dofs, "masses")
    length_scales = _as_per_dof(length_scales, n_dofs, "length_scales")
    if any(not m > 0.0 or not np.isfinite(m) for m in masses):
        raise ValueError(f"masses must be positive and finite, got {masses}")
    if any(not l > 0.0 or not np.isfinite(l) for l in length_scales):
        raise ValueError(f"length_scales must be positive and finite, got {length_scales}")

    dimension = n_levels**n_dofs
    matrix_mib = _BYTES_PER_ENTRY * float(dimension) ** 2 / 2**20
    if matrix_mib > memory_budget_mib:
        raise ValueError(
            f"operator matrices on a {dimension}-dimensional basis need "
            f"{matrix_mib:.1f} MiB, exceeding the {memory_budget_mib:.1f} MiB budget"
        )
    return BasisSpec(n_levels, n_dofs, hbar, masses, length_scales)
