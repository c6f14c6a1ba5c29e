"""Dense canonical observables, commutators and interior-block projections.

Conventions
-----------
With lowering operator ``a`` (``a|k> = sqrt(k)|k-1>``) and per-dof length
scale ``l``::

    x = l / sqrt(2) * (a + a^+)
    p = i * hbar / (l * sqrt(2)) * (a^+ - a)

so ``[x, p] = i*hbar`` on every matrix element except the top truncation
state of the dof.  Operators for different dofs are embedded Kronecker
factors and commute to the bit.

Because the canonical commutation relation cannot hold globally in finite
dimension, identity-grade statements are evaluated on *interior blocks*:
the sub-matrix on basis states whose per-dof level stays below
``m_levels``.  Polynomial operators of total degree ``d`` are exact there
whenever ``m_levels <= n_levels - d`` (banded ladder structure), which is
why verification runs keep a safety margin of at least ``max(4, d)``.

Operators and states are immutable after construction (their arrays are
marked read-only) and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec

HERMITIAN = "hermitian"
ANTI_HERMITIAN = "anti-hermitian"
GENERAL = "general"

HERMITICITY_RTOL = 1e-12

_FLAG_SIGN = {HERMITIAN: 1.0, ANTI_HERMITIAN: -1.0}


class Operator:
    """A dense complex matrix tagged with its basis and a hermiticity flag.

    The flag is tri-state (:data:`HERMITIAN`, :data:`ANTI_HERMITIAN`,
    :data:`GENERAL`) and is maintained by construction: arithmetic
    propagates it conservatively and the constructor verifies any
    non-general claim numerically.
    """

    __slots__ = ("basis", "matrix", "hermitian_flag")

    def __init__(self, basis: BasisSpec, matrix, hermitian_flag: str = GENERAL, scale_hint: float = 0.0):
        matrix = np.array(matrix, dtype=np.complex128)
        if matrix.shape != (basis.dimension, basis.dimension):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match basis dimension {basis.dimension}"
            )
        if hermitian_flag not in (HERMITIAN, ANTI_HERMITIAN, GENERAL):
            raise ValueError(f"unknown hermiticity flag {hermitian_flag!r}")
        if hermitian_flag != GENERAL:
            sign = _FLAG_SIGN[hermitian_flag]
            defect = np.max(np.abs(matrix - sign * matrix.conj().T))
            scale = np.max(np.abs(matrix))
            # scale_hint lets near-cancelling constructions (commutators of
            # commuting operators) be judged at the scale of their inputs.
            threshold = HERMITICITY_RTOL * max(scale, scale_hint)
            if scale > 0.0 and defect > threshold:
                raise ValueError(
                    f"matrix violates its {hermitian_flag} flag: defect {defect:.3e} "
                    f"vs {threshold:.3e} allowed"
                )
        matrix.setflags(write=False)
        self.basis = basis
        self.matrix = matrix
        self.hermitian_flag = hermitian_flag

    @classmethod
    def _inherit(cls, basis: BasisSpec, matrix: np.ndarray, flag: str) -> "Operator":
        # Constructor bypass for exact index-level operations (sub-matrix
        # extraction) whose output inherits the parent's flag elementwise;
        # revalidating against the sub-matrix's own smaller scale would
        # reject blocks cut from matrices with large far-away entries.
        obj = object.__new__(cls)
        matrix = np.asarray(matrix, dtype=np.complex128)
        matrix.setflags(write=False)
        obj.basis = basis
        obj.matrix = matrix
        obj.hermitian_flag = flag
        return obj

    # ------------------------------------------------------------------
    def dagger(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, self.hermitian_flag)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def __add__(self, other: "Operator") -> "Operator":
        # Elementwise sums preserve (anti-)hermiticity bit-for-bit, so the
        # flag is inherited rather than re-validated against the (possibly
        # cancelling) output scale.
        _require_same_basis(self, other)
        flag = self.hermitian_flag if self.hermitian_flag == other.hermitian_flag else GENERAL
        return Operator._inherit(self.basis, self.matrix + other.matrix, flag)

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-other)

    def __neg__(self) -> "Operator":
        return Operator._inherit(self.basis, -self.matrix, self.hermitian_flag)

    def __mul__(self, scalar) -> "Operator":
        z = complex(scalar)
        return Operator._inherit(self.basis, z * self.matrix, _scaled_flag(self.hermitian_flag, z))

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _require_same_basis(self, other)
        return Operator(self.basis, self.matrix @ other.matrix, GENERAL)

    def __repr__(self) -> str:
        return (
            f"Operator(dim={self.basis.dimension}, flag={self.hermitian_flag}, "
            f"max|A|={np.max(np.abs(self.matrix)):.3g})"
        )


def _scaled_flag(flag: str, z: complex) -> str:
    if flag == GENERAL:
        return GENERAL
    if z.imag == 0.0:
        return flag
    if z.real == 0.0:
        return ANTI_HERMITIAN if flag == HERMITIAN else HERMITIAN
    return GENERAL


def _require_same_basis(a: Operator, b: Operator) -> None:
    if a.basis != b.basis:
        raise ValueError("operators live on different bases")


# ----------------------------------------------------------------------
# canonical observables
# ----------------------------------------------------------------------

def local_lowering(n_levels: int) -> np.ndarray:
    """Lowering-operator matrix ``a`` on a single truncated Fock factor."""
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1).astype(np.complex128)


def local_position(basis: BasisSpec, dof: int) -> np.ndarray:
    a = local_lowering(basis.n_levels)
    return basis.length_scales[dof] / np.sqrt(2.0) * (a + a.conj().T)


def local_momentum(basis: BasisSpec, dof: int) -> np.ndarray:
    a = local_lowering(basis.n_levels)
    return 1j * basis.hbar / (basis.length_scales[dof] * np.sqrt(2.0)) * (a.conj().T - a)


def embed(basis: BasisSpec, local: np.ndarray, dof: int) -> np.ndarray:
    """Kronecker-embed a single-dof matrix into the full tensor space."""
    n, d = basis.n_levels, basis.n_dofs
    if not 0 <= dof < d:
        raise ValueError(f"dof index {dof} out of range for {d} dofs")
    out = local
    if dof > 0:
        out = np.kron(np.eye(n**dof, dtype=np.complex128), out)
    if dof < d - 1:
        out = np.kron(out, np.eye(n ** (d - 1 - dof), dtype=np.complex128))
    return out


def position_operator(basis: BasisSpec, dof: int = 0) -> Operator:
    """Position observable of one dof, ``l/sqrt(2) * (a + a^+)``."""
    return Operator(basis, embed(basis, local_position(basis, dof), dof), HERMITIAN)


def momentum_operator(basis: BasisSpec, dof: int = 0) -> Operator:
    """Momentum observable of one dof, ``i*hbar/(l*sqrt(2)) * (a^+ - a)``."""
    return Operator(basis, embed(basis, local_momentum(basis, dof), dof), HERMITIAN)


def lowering_operator(basis: BasisSpec, dof: int = 0) -> Operator:
    return Operator(basis, embed(basis, local_lowering(basis.n_levels), dof), GENERAL)


def identity_operator(basis: BasisSpec) -> Operator:
    return Operator(basis, np.eye(basis.dimension, dtype=np.complex128), HERMITIAN)


# ----------------------------------------------------------------------
# algebra
# ----------------------------------------------------------------------

def commutator(a: Operator, b: Operator) -> Operator:
    """``[A, B] = AB - BA``, with the hermiticity flag tracked.

    The commutator of two hermitian operators is anti-hermitian, of a
    hermitian with an anti-hermitian is hermitian, and so on.
    """
    _require_same_basis(a, b)
    flag = GENERAL
    if a.hermitian_flag in _FLAG_SIGN and b.hermitian_flag in _FLAG_SIGN:
        sign = _FLAG_SIGN[a.hermitian_flag] * _FLAG_SIGN[b.hermitian_flag]
        flag = ANTI_HERMITIAN if sign > 0 else HERMITIAN
    # Near-commuting inputs cancel to roundoff; judge the flag at the
    # product scale, not the (possibly vanishing) output scale.
    hint = float(np.max(np.abs(a.matrix)) * np.max(np.abs(b.matrix)))
    return Operator(a.basis, a.matrix @ b.matrix - b.matrix @ a.matrix, flag, scale_hint=hint)


def expectation(state, a: Operator) -> complex:
    """``<psi|A|psi>`` as a complex number.

    The imaginary part is returned rather than discarded; for a hermitian
    operator it is bounded by accumulated roundoff, and callers that need
    a real number should assert that themselves.
    """
    if state.basis != a.basis:
        raise ValueError("state and operator live on different bases")
    amps = state.amplitudes
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"state is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
    return complex(np.vdot(amps, a.matrix @ amps))


def uncertainty(state, a: Operator) -> float:
    """Standard deviation ``sqrt(<A^2> - <A>^2)`` for hermitian ``A``.

    ``<A^2>`` is computed as ``||A psi||^2``, which is real by
    construction; tiny negative variances from roundoff are clipped.
    """
    if a.hermitian_flag != HERMITIAN:
        raise ValueError("uncertainty requires a hermitian-flagged operator")
    if state.basis != a.basis:
        raise ValueError("state and operator live on different bases")
    a_psi = a.matrix @ state.amplitudes
    mean = np.vdot(state.amplitudes, a_psi).real
    var = np.vdot(a_psi, a_psi).real - mean**2
    return float(np.sqrt(max(var, 0.0)))


# ----------------------------------------------------------------------
# interior blocks
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class InteriorBlock:
    """Keep the lowest ``m_levels`` basis states of every dof.

    Projection itself is mechanical for any ``1 <= m_levels <= n_levels``;
    identity tests additionally demand :func:`require_truncation_safe`
    so that banded-operator products are exact on the kept block.
    """

    m_levels: int


def default_interior_block(basis: BasisSpec, fraction: float = 0.5) -> InteriorBlock:
    return InteriorBlock(max(2, int(basis.n_levels * fraction)))


def require_truncation_safe(block: InteriorBlock, basis: BasisSpec, margin: int = 4) -> None:
    """Enforce the identity-test policy ``2 <= m <= n - max(4, margin)``."""
    margin = max(4, int(margin))
    if block.m_levels < 2:
        raise ValueError(f"interior block needs m_levels >= 2, got {block.m_levels}")
    if block.m_levels > basis.n_levels - margin:
        raise ValueError(
            f"interior block m_levels={block.m_levels} leaves less than the "
            f"safety margin {margin} below n_levels={basis.n_levels}"
        )


def interior_indices(basis: BasisSpec, m_levels: int) -> np.ndarray:
    """Flat indices whose per-dof level is below ``m_levels``."""
    n, d = basis.n_levels, basis.n_dofs
    flat = np.arange(basis.dimension)
    keep = np.ones(basis.dimension, dtype=bool)
    for k in range(d):
        keep &= (flat // n ** (d - 1 - k)) % n < m_levels
    return np.nonzero(keep)[0]


def interior_project(a: Operator, block: InteriorBlock) -> Operator:
    """Sub-matrix of ``a`` on the interior block, as an operator on the
    correspondingly shrunk basis.

    The hermiticity flag is inherited: the kept index set is symmetric, so
    every retained ``(i, j)`` element keeps its ``(j, i)`` partner.
    """
    m = int(block.m_levels)
    if not 1 <= m <= a.basis.n_levels:
        raise ValueError(f"invalid interior block: m_levels={m} for n_levels={a.basis.n_levels}")
    idx = interior_indices(a.basis, m)
    sub = a.matrix[np.ix_(idx, idx)]
    return Operator._inherit(a.basis.with_levels(m), sub, a.hermitian_flag)
