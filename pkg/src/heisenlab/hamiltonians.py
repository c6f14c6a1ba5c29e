"""Polynomial Hamiltonians in canonical variables, with formal derivatives.

A :class:`PolyHamiltonian` is a real-coefficient polynomial in the
canonical pairs ``(q_i, p_i)``.  It supports exact formal partial
derivatives (differentiating as if the variables were classical, then
reading the result back as an operator polynomial), numerical evaluation
at classical phase-space points, and evaluation to a dense hermitian
:class:`~heisenlab.operators.Operator`.

Ordering convention: a monomial that mixes ``q`` and ``p`` of *distinct*
dofs is unambiguous (the factors commute) and is evaluated as a plain
Kronecker product.  A monomial mixing ``q`` and ``p`` on the *same* dof is
evaluated by Weyl (symmetric) ordering,

    W(q^m p^n) = 2^-m * sum_k C(m, k) q^k p^n q^(m-k),

which is hermitian even on the truncated basis.  All builders shipped
here (potential wells, minimal-coupling electromagnetic, rotating frame)
produce distinct-dof mixing only, so no ordering ambiguity arises for
them; the Weyl rule exists for user-supplied polynomials and such terms
are flagged by :meth:`PolyHamiltonian.mixes_same_dof`.

The electromagnetic builder is fixed to the symmetric gauge
``A = B x r / 2``, for which each ``A_i`` contains no ``q_i`` and the
minimal-coupling cross terms stay distinct-dof.

The rotating-frame builder implements the frame Hamiltonian
``H = ((p1 + m*w*q2)^2 + (p2 - m*w*q1)^2) / (2m) - m*w^2*(q1^2 + q2^2)/2``;
the quadratic pieces cancel exactly, leaving ``p^2/2m - w * L_z``, and the
resulting operator equations of motion carry the Coriolis force
``-2m w x v`` and the centrifugal force ``-m w x (w x r)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .basis import BasisSpec
from .operators import GENERAL, HERMITIAN, Operator, local_momentum, local_position

Q = "q"
P = "p"

_KIND_RANK = {Q: 0, P: 1}

MAX_POLYNOMIAL_DEGREE = 8

FactorTuple = tuple[int, str, int]  # (dof, kind, exponent)


@dataclass(frozen=True)
class Monomial:
    """One term ``coefficient * prod q_i^a_i p_i^b_i`` in canonical form.

    Factors are sorted by ``(dof, kind)`` with ``q`` before ``p`` and
    exponents aggregated, so equal monomials compare equal.
    """

    coefficient: float
    factors: tuple[FactorTuple, ...]

    @property
    def degree(self) -> int:
        return sum(e for _, _, e in self.factors)

    @property
    def mixes_same_dof(self) -> bool:
        kinds_per_dof: dict[int, set[str]] = {}
        for dof, kind, _ in self.factors:
            kinds_per_dof.setdefault(dof, set()).add(kind)
        return any(len(kinds) == 2 for kinds in kinds_per_dof.values())

    def exponent(self, dof: int, kind: str) -> int:
        for d, k, e in self.factors:
            if d == dof and k == kind:
                return e
        return 0


def monomial(coefficient: float, factors: Iterable[tuple[int, str, int]] = ()) -> Monomial:
    """Canonicalize raw ``(dof, kind, exponent)`` factors into a Monomial."""
    merged: dict[tuple[int, str], int] = {}
    for dof, kind, exp in factors:
        if kind not in _KIND_RANK:
            raise ValueError(f"variable kind must be 'q' or 'p', got {kind!r}")
        dof, exp = int(dof), int(exp)
        if dof < 0:
            raise ValueError(f"dof index must be nonnegative, got {dof}")
        if exp < 0:
            raise ValueError(f"exponent must be nonnegative, got {exp}")
        if exp:
            merged[(dof, kind)] = merged.get((dof, kind), 0) + exp
    canon = tuple(
        (dof, kind, merged[(dof, kind)])
        for dof, kind in sorted(merged, key=lambda key: (key[0], _KIND_RANK[key[1]]))
    )
    return Monomial(float(coefficient), canon)


class PolyHamiltonian:
    """Canonical-form polynomial in ``(q_i, p_i)`` tied to a basis.

    ``terms`` are merged, sorted and zero-pruned at construction, giving a
    deterministic serialization.  ``metadata`` carries the scenario tag and
    physical parameters of the builder that produced the polynomial; it is
    annotation only and does not participate in equality.
    """

    __slots__ = ("basis", "terms", "metadata")

    def __init__(self, basis: BasisSpec, terms: Iterable[Monomial], metadata: dict | None = None):
        merged: dict[tuple[FactorTuple, ...], float] = {}
        for term in terms:
            if not np.isfinite(term.coefficient):
                raise ValueError(f"non-finite coefficient {term.coefficient} in term {term.factors}")
            for dof, _, _ in term.factors:
                if dof >= basis.n_dofs:
                    raise ValueError(f"term references dof {dof}, basis has {basis.n_dofs}")
            merged[term.factors] = merged.get(term.factors, 0.0) + term.coefficient

        def term_rank(factors):
            return tuple((dof, _KIND_RANK[kind], exp) for dof, kind, exp in factors)

        canon = tuple(
            Monomial(coeff, factors)
            for factors, coeff in sorted(merged.items(), key=lambda item: term_rank(item[0]))
            if coeff != 0.0
        )
        self.basis = basis
        self.terms = canon
        self.metadata = dict(metadata or {})

    # ------------------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    @property
    def mixes_same_dof(self) -> bool:
        return any(t.mixes_same_dof for t in self.terms)

    def __add__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        if self.basis != other.basis:
            raise ValueError("polynomials live on different bases")
        return PolyHamiltonian(self.basis, self.terms + other.terms)

    def __sub__(self, other: "PolyHamiltonian") -> "PolyHamiltonian":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "PolyHamiltonian":
        s = float(scalar)
        return PolyHamiltonian(
            self.basis, (Monomial(s * t.coefficient, t.factors) for t in self.terms), self.metadata
        )

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyHamiltonian):
            return NotImplemented
        return self.basis == other.basis and self.terms == other.terms

    def __hash__(self):
        return hash((self.basis, self.terms))

    def __repr__(self) -> str:
        return f"PolyHamiltonian({len(self.terms)} terms, degree {self.degree})"

    def coefficient(self, factors: Iterable[tuple[int, str, int]]) -> float:
        """Coefficient of the canonicalized monomial, 0.0 if absent."""
        key = monomial(1.0, factors).factors
        for term in self.terms:
            if term.factors == key:
                return term.coefficient
        return 0.0


# ----------------------------------------------------------------------
# formal calculus
# ----------------------------------------------------------------------

def formal_partial(h: PolyHamiltonian, dof: int, kind: str) -> PolyHamiltonian:
    """Term-by-term formal derivative with respect to ``q_dof`` or ``p_dof``.

    The variable is treated as classical: ``d(x^n)/dx = n x^(n-1)`` with
    exact coefficient arithmetic where representable.
    """
    if kind not in _KIND_RANK:
        raise ValueError(f"variable kind must be 'q' or 'p', got {kind!r}")
    dof = int(dof)
    out: list[Monomial] = []
    for term in h.terms:
        exp = term.exponent(dof, kind)
        if exp == 0:
            continue
        new_factors = tuple(
            (d, k, e - 1 if (d == dof and k == kind) else e) for d, k, e in term.factors
        )
        out.append(monomial(term.coefficient * exp, new_factors))
    return PolyHamiltonian(h.basis, out)


def classical_value(h: PolyHamiltonian, q: Sequence[float], p: Sequence[float]) -> float:
    """Evaluate the polynomial at a classical phase-space point."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    total = 0.0
    for term in h.terms:
        value = term.coefficient
        for dof, kind, exp in term.factors:
            value *= (q[dof] if kind == Q else p[dof]) ** exp
        total += value
    return float(total)


def classical_evaluator(h: PolyHamiltonian) -> Callable[[np.ndarray, np.ndarray], float]:
    """Precompiled evaluator for tight integrator loops."""
    d = h.basis.n_dofs
    n_terms = len(h.terms)
    coeffs = np.array([t.coefficient for t in h.terms], dtype=float)
    exps_q = np.zeros((n_terms, d), dtype=float)
    exps_p = np.zeros((n_terms, d), dtype=float)
    for i, term in enumerate(h.terms):
        for dof, kind, exp in term.factors:
            (exps_q if kind == Q else exps_p)[i, dof] = exp
    if n_terms == 0:
        return lambda q, p: 0.0

    def value(q: np.ndarray, p: np.ndarray) -> float:
        powers = np.prod(q[None, :] ** exps_q, axis=1) * np.prod(p[None, :] ** exps_p, axis=1)
        return float(coeffs @ powers)

    return value


# ----------------------------------------------------------------------
# evaluation to a dense operator
# ----------------------------------------------------------------------

def _weyl_local(x: np.ndarray, p: np.ndarray, m: int, n: int) -> np.ndarray:
    # McCoy form of the Weyl-ordered product q^m p^n; each term's dagger is
    # the mirrored term, so the sum is hermitian even after truncation.
    pn = np.linalg.matrix_power(p, n)
    acc = np.zeros_like(pn)
    for k in range(m + 1):
        acc += math.comb(m, k) * (
            np.linalg.matrix_power(x, k) @ pn @ np.linalg.matrix_power(x, m - k)
        )
    return acc / 2.0**m


def evaluate(h: PolyHamiltonian, ordering: str = "weyl") -> Operator:
    """Dense operator realization of the polynomial.

    Per-dof local factors are built first (plain matrix powers, or the
    Weyl-symmetrized product for same-dof mixed monomials) and combined by
    Kronecker products, so distinct-dof factors multiply exactly.  The
    default Weyl ordering always yields a hermitian operator; the ``"qp"``
    ordering (all position powers left of momentum powers) exists to
    quantify ordering effects and is flagged general when it matters.
    """
    if ordering not in ("weyl", "qp"):
        raise ValueError(f"unknown ordering {ordering!r}")
    basis = h.basis
    n, d = basis.n_levels, basis.n_dofs
    x_loc = [local_position(basis, dof) for dof in range(d)]
    p_loc = [local_momentum(basis, dof) for dof in range(d)]
    eye = np.eye(n, dtype=np.complex128)
    power_cache: dict[tuple[str, int, int], np.ndarray] = {}

    def local_power(kind: str, dof: int, exp: int) -> np.ndarray:
        key = (kind, dof, exp)
        if key not in power_cache:
            base = x_loc[dof] if kind == Q else p_loc[dof]
            power_cache[key] = np.linalg.matrix_power(base, exp)
        return power_cache[key]

    total = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    for term in h.terms:
        factor = np.array([[1.0 + 0j]])
        for dof in range(d):
            eq = term.exponent(dof, Q)
            ep = term.exponent(dof, P)
            if eq and ep:
                if ordering == "weyl":
                    local = _weyl_local(x_loc[dof], p_loc[dof], eq, ep)
                else:
                    local = local_power(Q, dof, eq) @ local_power(P, dof, ep)
            elif eq:
                local = local_power(Q, dof, eq)
            elif ep:
                local = local_power(P, dof, ep)
            else:
                local = eye
            factor = np.kron(factor, local)
        total += term.coefficient * factor
    flag = HERMITIAN if (ordering == "weyl" or not h.mixes_same_dof) else GENERAL
    return Operator(basis, total, flag)


# ----------------------------------------------------------------------
# canonical text form
# ----------------------------------------------------------------------

_FACTOR_RE = re.compile(r"^([qp])(\d+)\^(\d+)$")


def hamiltonian_to_text(h: PolyHamiltonian) -> str:
    """Deterministic text form: one term per line, 17-significant-digit
    coefficients, factors like ``q0^2 p1^1`` in canonical order."""
    lines = []
    for term in h.terms:
        parts = ["%.17g" % term.coefficient]
        parts += [f"{kind}{dof}^{exp}" for dof, kind, exp in term.factors]
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def hamiltonian_from_text(text: str, basis: BasisSpec, metadata: dict | None = None) -> PolyHamiltonian:
    """Parse the canonical text form back into a polynomial."""
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse coefficient {parts[0]!r}") from None
        factors = []
        for token in parts[1:]:
            match = _FACTOR_RE.match(token)
            if match is None:
                raise ValueError(f"line {lineno}: cannot parse factor {token!r}")
            kind, dof, exp = match.group(1), int(match.group(2)), int(match.group(3))
            factors.append((dof, kind, exp))
        terms.append(monomial(coeff, factors))
    return PolyHamiltonian(basis, terms, metadata)


# ----------------------------------------------------------------------
# field configuration and scenario builders
# ----------------------------------------------------------------------

_EPSILON = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPSILON[_i, _j, _k] = 1.0
    _EPSILON[_i, _k, _j] = -1.0


@dataclass(frozen=True)
class FieldConfig:
    """Uniform electromagnetic field data in the symmetric gauge.

    The vector potential is fixed to ``A = B x r / 2``; requesting any
    other gauge is rejected.  In this gauge ``A_i`` is a linear polynomial
    in the *other* coordinates, so minimal-coupling cross terms never mix
    ``q`` and ``p`` of the same dof.
    """

    charge: float
    magnetic_field: tuple[float, float, float]
    electric_field: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gauge: str = "symmetric"

    def __post_init__(self):
        if self.gauge != "symmetric":
            raise ValueError(f"only the symmetric gauge A = B x r / 2 is supported, got {self.gauge!r}")
        object.__setattr__(self, "magnetic_field", tuple(float(b) for b in self.magnetic_field))
        object.__setattr__(self, "electric_field", tuple(float(e) for e in self.electric_field))
        if len(self.magnetic_field) != 3 or len(self.electric_field) != 3:
            raise ValueError("magnetic_field and electric_field must be 3-vectors")

    def vector_potential_coefficients(self, axis: int) -> dict[int, float]:
        """Linear coefficients of ``A_axis``: mapping ``dof -> c`` with
        ``A_axis = sum_dof c * q_dof``."""
        coeffs: dict[int, float] = {}
        for j in range(3):
            for k in range(3):
                c = 0.5 * _EPSILON[axis, j, k] * self.magnetic_field[j]
                if c != 0.0:
                    coeffs[k] = coeffs.get(k, 0.0) + c
        return coeffs

    def vector_potential_at(self, r: Sequence[float]) -> np.ndarray:
        r3 = np.zeros(3)
        r3[: len(r)] = np.asarray(r, dtype=float)
        return 0.5 * np.cross(np.asarray(self.magnetic_field), r3)


def _single_mass(basis: BasisSpec, masses) -> float:
    if masses is None:
        masses = basis.masses
    if np.isscalar(masses):
        masses = (float(masses),) * basis.n_dofs
    masses = tuple(float(m) for m in masses)
    if len(masses) != basis.n_dofs:
        raise ValueError(f"need one mass per dof, got {len(masses)}")
    if any(abs(m - basis.masses[i]) > 1e-12 * abs(basis.masses[i]) for i, m in enumerate(masses)):
        raise ValueError(f"masses {masses} disagree with the basis masses {basis.masses}")
    return masses[0]


def build_potential_hamiltonian(
    basis: BasisSpec,
    potential_coeffs: Sequence[float],
    expansion_point: float = 0.0,
) -> PolyHamiltonian:
    """1-dof ``H = p^2/2m + sum_n c_n (q - x0)^n``.

    ``potential_coeffs[n]`` is the coefficient of ``(q - x0)^n``; an empty
    list gives the free particle.  The shifted powers are binomially
    expanded into plain ``q`` monomials.
    """
    if basis.n_dofs != 1:
        raise ValueError(f"potential Hamiltonians are 1-dof, basis has {basis.n_dofs}")
    coeffs = [float(c) for c in potential_coeffs]
    if any(not np.isfinite(c) for c in coeffs):
        raise ValueError(f"non-finite potential coefficient in {coeffs}")
    if len(coeffs) - 1 > MAX_POLYNOMIAL_DEGREE:
        raise ValueError(
            f"potential degree {len(coeffs) - 1} exceeds the cap {MAX_POLYNOMIAL_DEGREE}"
        )
    x0 = float(expansion_point)
    mass = basis.masses[0]
    terms = [monomial(1.0 / (2.0 * mass), [(0, P, 2)])]
    for n, c in enumerate(coeffs):
        if c == 0.0:
            continue
        for k in range(n + 1):
            terms.append(monomial(c * math.comb(n, k) * (-x0) ** (n - k), [(0, Q, k)]))
    metadata = {
        "scenario": "potential",
        "coefficients": coeffs,
        "expansion_point": x0,
        "mass": mass,
    }
    return PolyHamiltonian(basis, terms, metadata)


def build_gravity_taylor(
    basis: BasisSpec,
    grav_constant: float,
    mass_large: float,
    mass_small: float,
    r0: float,
    order: int,
) -> PolyHamiltonian:
    """Radial 1-dof ``H = p^2/2m - G m M / r`` Taylor-expanded about ``r0``.

    ``-G m M / r = -(G m M / r0) * sum_n (-(r - r0)/r0)^n``, truncated at
    ``order``; order 1 is a uniform force, order 2 adds the tidal term
    ``-G m M / r0^3 * (q - r0)^2``.
    """
    r0 = float(r0)
    if not r0 > 0.0:
        raise ValueError(f"expansion radius must be positive, got {r0}")
    order = int(order)
    if order < 1:
        raise ValueError(f"Taylor order must be >= 1, got {order}")
    _single_mass(basis, [mass_small])
    strength = float(grav_constant) * float(mass_large) * float(mass_small)
    coeffs = [-strength * (-1.0) ** n / r0 ** (n + 1) for n in range(order + 1)]
    h = build_potential_hamiltonian(basis, coeffs, expansion_point=r0)
    h.metadata.update(
        scenario="gravity_taylor",
        grav_constant=float(grav_constant),
        mass_large=float(mass_large),
        mass_small=float(mass_small),
        r0=r0,
        order=order,
    )
    return h


def gravity_exact_force_derivative(grav_constant: float, mass_large: float, mass_small: float):
    """``V'(r) = G m M / r^2`` for the full (untruncated) 1/r potential.

    Used by the classical oracle, which does not need the polynomial form.
    """
    strength = float(grav_constant) * float(mass_large) * float(mass_small)

    def v_prime(r: float) -> float:
        return strength / r**2

    return v_prime


def build_em_hamiltonian(
    basis: BasisSpec,
    fields: FieldConfig,
    masses=None,
) -> PolyHamiltonian:
    """Minimal-coupling ``H = sum_i (p_i - q A_i(r))^2 / 2m - q E . r``.

    Supports 2-dof planar bases (requires ``B`` along the z axis and ``E``
    in-plane) and full 3-dof bases.  Expansion uses that ``A_i`` commutes
    with ``p_i`` in the symmetric gauge:
    ``(p_i - q A_i)^2 = p_i^2 - 2 q A_i p_i + q^2 A_i^2``.
    """
    d = basis.n_dofs
    if d not in (2, 3):
        raise ValueError(f"electromagnetic Hamiltonians need 2 or 3 dofs, basis has {d}")
    if d == 2:
        bx, by, _ = fields.magnetic_field
        if bx != 0.0 or by != 0.0:
            raise ValueError("planar (2-dof) scenarios need B along the z axis")
        if fields.electric_field[2] != 0.0:
            raise ValueError("planar (2-dof) scenarios need E in the xy plane")
    mass = _single_mass(basis, masses)
    qc = fields.charge
    terms = []
    for i in range(d):
        terms.append(monomial(1.0 / (2.0 * mass), [(i, P, 2)]))
        a_coeffs = fields.vector_potential_coefficients(i)
        if any(k >= d for k in a_coeffs):
            raise ValueError("vector potential references a coordinate outside the basis")
        for k, ak in a_coeffs.items():
            terms.append(monomial(-qc * ak / mass, [(k, Q, 1), (i, P, 1)]))
        for k1, a1 in a_coeffs.items():
            for k2, a2 in a_coeffs.items():
                terms.append(monomial(qc**2 * a1 * a2 / (2.0 * mass), [(k1, Q, 1), (k2, Q, 1)]))
    for i in range(d):
        e_i = fields.electric_field[i]
        if e_i != 0.0:
            terms.append(monomial(-qc * e_i, [(i, Q, 1)]))
    metadata = {
        "scenario": "em",
        "charge": qc,
        "magnetic_field": list(fields.magnetic_field),
        "electric_field": list(fields.electric_field),
        "gauge": "symmetric",
        "mass": mass,
    }
    return PolyHamiltonian(basis, terms, metadata)


def field_config_from_metadata(metadata: dict) -> FieldConfig:
    return FieldConfig(
        charge=metadata["charge"],
        magnetic_field=tuple(metadata["magnetic_field"]),
        electric_field=tuple(metadata["electric_field"]),
        gauge=metadata.get("gauge", "symmetric"),
    )


def kinetic_momentum_polynomial(h_em: PolyHamiltonian, dof: int) -> PolyHamiltonian:
    """``pi_i = p_i - q A_i(r)`` as a polynomial (mass times velocity)."""
    if h_em.metadata.get("scenario") != "em":
        raise ValueError("kinetic momentum is defined only for electromagnetic Hamiltonians")
    fields = field_config_from_metadata(h_em.metadata)
    terms = [monomial(1.0, [(dof, P, 1)])]
    for k, ak in fields.vector_potential_coefficients(dof).items():
        terms.append(monomial(-fields.charge * ak, [(k, Q, 1)]))
    return PolyHamiltonian(h_em.basis, terms)


def kinetic_momentum_operator(h_em: PolyHamiltonian, dof: int) -> Operator:
    """Dense operator for ``pi_i = p_i - q A_i(r)``."""
    return evaluate(kinetic_momentum_polynomial(h_em, dof))


def build_rotating_frame(basis: BasisSpec, omega: float, masses=None) -> PolyHamiltonian:
    """Planar Hamiltonian seen from a frame rotating at ``omega`` about z.

    Expanded form ``(p0^2 + p1^2)/2m + omega*(q1 p0 - q0 p1)``; the
    ``m w^2 q^2 / 2`` pieces of the squared kinetic momenta cancel against
    the centrifugal potential.
    """
    if basis.n_dofs != 2:
        raise ValueError(f"rotating-frame Hamiltonians are planar (2 dofs), basis has {basis.n_dofs}")
    if abs(basis.masses[0] - basis.masses[1]) > 1e-12 * abs(basis.masses[0]):
        raise ValueError(f"rotating frame requires equal masses, got {basis.masses}")
    mass = _single_mass(basis, masses)
    omega = float(omega)
    terms = [
        monomial(1.0 / (2.0 * mass), [(0, P, 2)]),
        monomial(1.0 / (2.0 * mass), [(1, P, 2)]),
        monomial(omega, [(1, Q, 1), (0, P, 1)]),
        monomial(-omega, [(0, Q, 1), (1, P, 1)]),
    ]
    metadata = {"scenario": "rotating", "omega": omega, "mass": mass}
    return PolyHamiltonian(basis, terms, metadata)
