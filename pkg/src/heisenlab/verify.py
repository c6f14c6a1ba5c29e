"""Executable catalogue of the operator identities, with tolerances.

Each check names an operator identity, resolves its two sides on a
truncation-safe interior block, and reports the relative Frobenius error
against a pinned tolerance.  Checks are deterministic given the
configuration (random Hamiltonians use recorded seeds) and the JSON report
is byte-stable across reruns.

Error convention: ``|lhs - rhs|_F / |rhs|_F`` on the interior block.  When
the right-hand side is identically zero the error is measured against the
natural commutator scale ``|H|_F * |A|_F / hbar`` instead, so a vanishing
identity still reports a meaningful roundoff-level number.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .basis import BasisSpec, make_basis
from .evolution import heisenberg_evolve, heisenberg_rhs, make_propagator
from .hamiltonians import (
    FieldConfig,
    P,
    Q,
    PolyHamiltonian,
    build_em_hamiltonian,
    build_potential_hamiltonian,
    build_rotating_frame,
    evaluate,
    formal_partial,
    kinetic_momentum_operator,
    monomial,
)
from .operators import (
    InteriorBlock,
    Operator,
    commutator,
    identity_operator,
    interior_project,
    momentum_operator,
    position_operator,
    require_truncation_safe,
)

POWER_TOLERANCE = 1e-10
NEWTON_TOLERANCE = 1e-9
LORENTZ_TOLERANCE = 1e-10
ROTATING_TOLERANCE = 1e-10
HAMILTON_TOLERANCE = 1e-9


@dataclass(frozen=True)
class IdentityCheck:
    """One named identity: two operator recipes, a block, a tolerance.

    ``lhs`` and ``rhs`` are zero-argument callables resolved at run time;
    ``statement`` records the identity being verified in plain text and is
    required to be nonempty (the manifest gate).
    """

    name: str
    statement: str
    lhs: Callable[[], Operator]
    rhs: Callable[[], Operator]
    block: InteriorBlock
    tolerance: float
    params: dict = field(default_factory=dict)
    zero_scale: float | None = None

    def __post_init__(self):
        if not self.statement:
            raise ValueError(f"check {self.name!r} is missing its identity statement")
        if not self.tolerance > 0.0:
            raise ValueError(f"check {self.name!r} needs a positive tolerance")


@dataclass(frozen=True)
class CheckResult:
    name: str
    statement: str
    measured_error: float
    tolerance: float
    passed: bool
    params: dict

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["measured_error"] = float(self.measured_error)
        return doc


def relative_frobenius_error(lhs: Operator, rhs: Operator, zero_scale: float | None = None) -> float:
    """``|lhs - rhs|_F`` over ``|rhs|_F``, or over ``zero_scale`` when the
    reference side vanishes."""
    diff = float(np.linalg.norm(lhs.matrix - rhs.matrix))
    denom = float(np.linalg.norm(rhs.matrix))
    if denom == 0.0:
        denom = zero_scale if zero_scale else 1.0
    return diff / denom


def run_check(check: IdentityCheck, margin: int = 4) -> CheckResult:
    """Resolve both recipes, project to the interior block, measure."""
    lhs = check.lhs()
    rhs = check.rhs()
    require_truncation_safe(check.block, lhs.basis, margin)
    lhs_block = interior_project(lhs, check.block)
    rhs_block = interior_project(rhs, check.block)
    error = relative_frobenius_error(lhs_block, rhs_block, check.zero_scale)
    params = dict(check.params)
    params.setdefault("n_levels", lhs.basis.n_levels)
    params.setdefault("n_dofs", lhs.basis.n_dofs)
    params.setdefault("m_levels", check.block.m_levels)
    return CheckResult(
        name=check.name,
        statement=check.statement,
        measured_error=error,
        tolerance=check.tolerance,
        passed=bool(error <= check.tolerance),
        params=params,
    )


def _interior(basis: BasisSpec, fraction: float) -> InteriorBlock:
    return InteriorBlock(max(2, int(basis.n_levels * fraction)))


def _commutator_scale(h: Operator, a: Operator, block: InteriorBlock) -> float:
    hb = interior_project(h, block)
    ab = interior_project(a, block)
    return float(np.linalg.norm(hb.matrix) * np.linalg.norm(ab.matrix) / h.basis.hbar)


# ----------------------------------------------------------------------
# individual checks
# ----------------------------------------------------------------------

def check_power_commutator(
    n_max: int = 6,
    n_levels: int = 64,
    hbar: float = 1.0,
    mass: float = 1.0,
    length_scale: float = 1.0,
    interior_fraction: float = 0.5,
    tolerance: float = POWER_TOLERANCE,
) -> list[CheckResult]:
    """``[x^n, p] = i hbar n x^(n-1)`` on the interior block, n = 1..n_max."""
    basis = make_basis(n_levels, 1, hbar, mass, length_scale)
    x = position_operator(basis)
    p = momentum_operator(basis)
    block = _interior(basis, interior_fraction)
    results = []
    for n in range(1, int(n_max) + 1):
        xn = Operator(basis, np.linalg.matrix_power(x.matrix, n))
        xn_minus = Operator(basis, np.linalg.matrix_power(x.matrix, n - 1))
        check = IdentityCheck(
            name=f"power_commutator_n{n}",
            statement="[x^n, p] = i*hbar*n*x^(n-1)",
            lhs=lambda xn=xn: commutator(xn, p),
            rhs=lambda n=n, xn_minus=xn_minus: (1j * hbar * n) * xn_minus,
            block=block,
            tolerance=tolerance,
            params={"n": n, "hbar": hbar},
        )
        results.append(run_check(check, margin=max(4, n + 1)))
    return results


def check_newton_operator(
    h: PolyHamiltonian,
    times: Sequence[float] = (),
    interior_fraction: float = 0.5,
    m_levels: int | None = None,
    tolerance: float = NEWTON_TOLERANCE,
    label: str = "",
) -> CheckResult:
    """``m * d^2x/dt^2 = -V'(x)`` as nested Heisenberg commutators.

    Verified at t = 0 and, through the spectral propagator, at each
    requested later time; reports the worst interior-block error.  The
    propagated identity needs a generous gap between the block and the
    truncation edge (the evolution mixes the corrupt top corner inward),
    so callers typically pin ``m_levels`` well below ``n_levels / 2``.
    """
    basis = h.basis
    if basis.n_dofs != 1:
        raise ValueError("the operator Newton check is 1-dof")
    mass = basis.masses[0]
    h_op = evaluate(h)
    x = position_operator(basis)
    force_op = -1.0 * evaluate(formal_partial(h, 0, Q))
    block = InteriorBlock(m_levels) if m_levels else _interior(basis, interior_fraction)
    margin = max(4, h.degree)
    require_truncation_safe(block, basis, margin)
    zero_scale = _commutator_scale(h_op, x, block) or None

    def error_at(x_t: Operator, rhs_t: Operator) -> float:
        lhs = mass * heisenberg_rhs(h_op, heisenberg_rhs(h_op, x_t))
        return relative_frobenius_error(
            interior_project(lhs, block), interior_project(rhs_t, block), zero_scale
        )

    worst = error_at(x, force_op)
    times = [float(t) for t in times]
    if times:
        prop = make_propagator(h_op)
        for t in times:
            worst = max(worst, error_at(heisenberg_evolve(prop, x, t), heisenberg_evolve(prop, force_op, t)))
    name = "newton_force" + (f"_{label}" if label else "")
    return CheckResult(
        name=name,
        statement="m*d2x/dt2 = (i/hbar)^2*[H,[H,x]]*m = -V'(x)",
        measured_error=worst,
        tolerance=tolerance,
        passed=bool(worst <= tolerance),
        params={
            "n_levels": basis.n_levels,
            "n_dofs": 1,
            "m_levels": block.m_levels,
            "hbar": basis.hbar,
            "potential_coefficients": list(h.metadata.get("coefficients", [])),
            "times": times,
        },
    )


def check_velocity_relation(
    h: PolyHamiltonian,
    interior_fraction: float = 0.5,
    tolerance: float = NEWTON_TOLERANCE,
    label: str = "",
) -> CheckResult:
    """``m * dx/dt = p`` for a potential-form Hamiltonian."""
    basis = h.basis
    h_op = evaluate(h)
    x = position_operator(basis)
    p = momentum_operator(basis)
    mass = basis.masses[0]
    block = _interior(basis, interior_fraction)
    check = IdentityCheck(
        name="newton_velocity" + (f"_{label}" if label else ""),
        statement="m*dx/dt = m*(i/hbar)*[H,x] = p",
        lhs=lambda: mass * heisenberg_rhs(h_op, x),
        rhs=lambda: p,
        block=block,
        tolerance=tolerance,
        params={"hbar": basis.hbar},
    )
    return run_check(check, margin=max(4, h.degree))


def check_lorentz_operator(
    fields: FieldConfig,
    n_levels: int = 32,
    hbar: float = 1.0,
    mass: float = 1.0,
    length_scale: float = 1.0,
    interior_fraction: float = 0.5,
    tolerance: float = LORENTZ_TOLERANCE,
) -> list[CheckResult]:
    """Kinetic-momentum commutator and the operator Lorentz force law.

    Planar configuration: B along z, E in-plane.  Checks, per component,
    ``dr_i/dt = pi_i / m`` and ``m dv_i/dt = q (v x B)_i + q E_i``, plus
    the precursor ``[pi_1, pi_2] = i hbar q B``.
    """
    basis = make_basis(n_levels, 2, hbar, mass, length_scale)
    h = build_em_hamiltonian(basis, fields, masses=mass)
    h_op = evaluate(h)
    qc = fields.charge
    b_z = fields.magnetic_field[2]
    pi_ops = [kinetic_momentum_operator(h, i) for i in range(2)]
    v_ops = [(1.0 / mass) * pi for pi in pi_ops]
    q_ops = [position_operator(basis, i) for i in range(2)]
    eye = identity_operator(basis)
    block = _interior(basis, interior_fraction)
    params = {
        "charge": qc,
        "magnetic_field": list(fields.magnetic_field),
        "electric_field": list(fields.electric_field),
        "hbar": hbar,
    }
    checks = [
        IdentityCheck(
            name="em_kinetic_commutator",
            statement="[pi_1, pi_2] = i*hbar*q*B_z",
            lhs=lambda: commutator(pi_ops[0], pi_ops[1]),
            rhs=lambda: (1j * hbar * qc * b_z) * eye,
            block=block,
            tolerance=tolerance,
            params=params,
            zero_scale=_commutator_scale(pi_ops[0], pi_ops[1], block) or None,
        )
    ]
    # (v x B) with B = B_z z_hat: component 0 is +v_1*B_z, component 1 is -v_0*B_z
    cross = [b_z * v_ops[1], -b_z * v_ops[0]]
    for i in range(2):
        checks.append(
            IdentityCheck(
                name=f"em_velocity_{i}",
                statement="dr_i/dt = (i/hbar)*[H, r_i] = pi_i/m",
                lhs=lambda i=i: heisenberg_rhs(h_op, q_ops[i]),
                rhs=lambda i=i: v_ops[i],
                block=block,
                tolerance=tolerance,
                params=params,
                zero_scale=_commutator_scale(h_op, q_ops[i], block) or None,
            )
        )
    for i in range(2):
        checks.append(
            IdentityCheck(
                name=f"em_lorentz_{i}",
                statement="m*dv_i/dt = q*(v x B)_i + q*E_i",
                lhs=lambda i=i: mass * heisenberg_rhs(h_op, v_ops[i]),
                rhs=lambda i=i: qc * cross[i] + (qc * fields.electric_field[i]) * eye,
                block=block,
                tolerance=tolerance,
                params=params,
                zero_scale=_commutator_scale(h_op, v_ops[i], block) or None,
            )
        )
    return [run_check(c, margin=max(4, h.degree + 1)) for c in checks]


def check_rotating_operator(
    omega: float,
    n_levels: int = 32,
    hbar: float = 1.0,
    mass: float = 1.0,
    length_scale: float = 1.0,
    interior_fraction: float = 0.5,
    tolerance: float = ROTATING_TOLERANCE,
) -> list[CheckResult]:
    """Rotating-frame velocities and the Coriolis + centrifugal force law.

    Per component: ``dr_i/dt`` matches the frame velocity, and
    ``m d^2r/dt^2 = -2m w x v - m w x (w x r)`` (with ``w = w z_hat``:
    ``m dv_x/dt = 2m w v_y + m w^2 x`` and ``m dv_y/dt = -2m w v_x + m w^2 y``).
    """
    basis = make_basis(n_levels, 2, hbar, mass, length_scale)
    h = build_rotating_frame(basis, omega, masses=mass)
    h_op = evaluate(h)
    q_ops = [position_operator(basis, i) for i in range(2)]
    v_polys = [
        PolyHamiltonian(basis, [monomial(1.0 / mass, [(0, P, 1)]), monomial(omega, [(1, Q, 1)])]),
        PolyHamiltonian(basis, [monomial(1.0 / mass, [(1, P, 1)]), monomial(-omega, [(0, Q, 1)])]),
    ]
    v_ops = [heisenberg_rhs(h_op, q_ops[i]) for i in range(2)]
    block = _interior(basis, interior_fraction)
    params = {"omega": float(omega), "hbar": hbar}
    checks = []
    for i in range(2):
        checks.append(
            IdentityCheck(
                name=f"rotating_velocity_{i}",
                statement="dr_1/dt = (p_1 + m*w*r_2)/m and dr_2/dt = (p_2 - m*w*r_1)/m",
                lhs=lambda i=i: v_ops[i],
                rhs=lambda i=i: evaluate(v_polys[i]),
                block=block,
                tolerance=tolerance,
                params=params,
                zero_scale=_commutator_scale(h_op, q_ops[i], block) or None,
            )
        )
    force_rhs = [
        lambda: (2.0 * mass * omega) * v_ops[1] + (mass * omega**2) * q_ops[0],
        lambda: (-2.0 * mass * omega) * v_ops[0] + (mass * omega**2) * q_ops[1],
    ]
    for i in range(2):
        checks.append(
            IdentityCheck(
                name=f"rotating_force_{i}",
                statement="m*d2r/dt2 = -2m*(w x v) - m*w x (w x r)",
                lhs=lambda i=i: mass * heisenberg_rhs(h_op, v_ops[i]),
                rhs=force_rhs[i],
                block=block,
                tolerance=tolerance,
                params=params,
                zero_scale=_commutator_scale(h_op, v_ops[i], block) or None,
            )
        )
    return [run_check(c, margin=max(4, h.degree + 1)) for c in checks]


def check_hamilton_operator(
    h: PolyHamiltonian,
    interior_fraction: float = 0.5,
    tolerance: float = HAMILTON_TOLERANCE,
    label: str = "",
) -> list[CheckResult]:
    """Operator Hamilton equations for an arbitrary polynomial Hamiltonian.

    For every dof j: ``(i/hbar)[H, q_j] = dH/dp_j`` and
    ``(i/hbar)[H, p_j] = -dH/dq_j``, both sides Weyl-evaluated.  Monomials
    mixing q and p on one dof are flagged and the Weyl-vs-qp ordering
    discrepancy of the derivative is reported alongside (the identity
    itself holds exactly in the Weyl convention).
    """
    basis = h.basis
    h_op = evaluate(h)
    block = _interior(basis, interior_fraction)
    margin = max(4, h.degree)
    mixed = h.mixes_same_dof
    results = []
    suffix = f"_{label}" if label else ""
    for j in range(basis.n_dofs):
        for kind, var_op, sign, eq_name, statement in (
            (P, position_operator(basis, j), 1.0, "q", "dq_j/dt = (i/hbar)*[H, q_j] = dH/dp_j"),
            (Q, momentum_operator(basis, j), -1.0, "p", "dp_j/dt = (i/hbar)*[H, p_j] = -dH/dq_j"),
        ):
            partial = formal_partial(h, j, kind)
            params = {"dof": j, "equation": eq_name, "degree": h.degree, "hbar": basis.hbar}
            if mixed:
                params["same_dof_mixing"] = "weyl"
                params["ordering_discrepancy"] = relative_frobenius_error(
                    interior_project(evaluate(partial, ordering="qp"), block),
                    interior_project(evaluate(partial), block),
                    zero_scale=1.0,
                )
            check = IdentityCheck(
                name=f"hamilton{suffix}_{eq_name}{j}",
                statement=statement,
                lhs=lambda var_op=var_op: heisenberg_rhs(h_op, var_op),
                rhs=lambda partial=partial, sign=sign: sign * evaluate(partial),
                block=block,
                tolerance=tolerance,
                params=params,
                zero_scale=_commutator_scale(h_op, var_op, block) or None,
            )
            results.append(run_check(check, margin=margin))
    return results


# ----------------------------------------------------------------------
# randomized Hamiltonians
# ----------------------------------------------------------------------

def _distinct_dof_factor_pool(n_dofs: int, max_degree: int) -> list[tuple]:
    """All canonical factor tuples of total degree 1..max_degree with no
    same-dof q-p mixing, in deterministic order."""
    pool = []

    def extend(prefix, dof, degree_left):
        if dof == n_dofs:
            if prefix:
                pool.append(tuple(prefix))
            return
        extend(prefix, dof + 1, degree_left)
        for kind in (Q, P):
            for exp in range(1, degree_left + 1):
                extend(prefix + [(dof, kind, exp)], dof + 1, degree_left - exp)

    extend([], 0, max_degree)
    return sorted(set(pool))


def random_polynomial(
    basis: BasisSpec,
    rng: np.random.Generator,
    max_degree: int = 4,
    n_terms: int = 6,
) -> PolyHamiltonian:
    """Random distinct-dof-mixing polynomial, coefficients uniform in [-1, 1]."""
    pool = _distinct_dof_factor_pool(basis.n_dofs, max_degree)
    picks = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False)
    terms = [monomial(rng.uniform(-1.0, 1.0), pool[int(i)]) for i in sorted(picks)]
    return PolyHamiltonian(basis, terms, {"scenario": "random"})


# ----------------------------------------------------------------------
# suite configuration and runner
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyConfig:
    """Deterministic suite configuration; echoed into the report."""

    n_levels: int = 64
    n_levels_pair: int = 32
    n_levels_newton: int = 160
    n_levels_random: int = 24
    newton_interior_levels: int = 32
    interior_fraction: float = 0.5
    tolerance_override: float | None = None
    seed: int = 20240901
    n_random: int = 20
    hbar: float = 1.0
    omega: float = 0.5
    b_field: float = 1.0
    e_field: tuple[float, float] = (0.25, -0.15)
    charge: float = 1.0
    harmonic_omega: float = 1.0
    cubic_alpha: float = 1.0
    cubic_beta: float = 0.05
    newton_n_times: int = 10
    newton_t_max: float = 10.0

    def tol(self, default: float) -> float:
        return self.tolerance_override if self.tolerance_override is not None else default

    def to_json_dict(self) -> dict:
        doc = asdict(self)
        doc["e_field"] = list(self.e_field)
        return doc


def _matched_length(hbar: float, mass: float, omega: float) -> float:
    # l = sqrt(hbar / (m w)) makes the basis ladder resonant with the
    # harmonic part, keeping the propagator block-clean.
    return float(np.sqrt(hbar / (mass * omega)))


def _newton_potentials(cfg: VerifyConfig) -> list[tuple[str, PolyHamiltonian]]:
    mass = 1.0
    length = _matched_length(cfg.hbar, mass, cfg.harmonic_omega)
    basis = make_basis(cfg.n_levels_newton, 1, cfg.hbar, mass, length)
    harmonic = build_potential_hamiltonian(basis, [0.0, 0.0, 0.5 * mass * cfg.harmonic_omega**2])
    cubic = build_potential_hamiltonian(
        basis, [0.0, 0.0, 0.5 * cfg.cubic_alpha, cfg.cubic_beta / 3.0]
    )
    return [("harmonic", harmonic), ("cubic", cubic)]


def default_checks(cfg: VerifyConfig) -> list[CheckResult]:
    """Run the full catalogue in canonical order."""
    results: list[CheckResult] = []
    results += check_power_commutator(
        6,
        cfg.n_levels,
        hbar=cfg.hbar,
        interior_fraction=cfg.interior_fraction,
        tolerance=cfg.tol(POWER_TOLERANCE),
    )
    newton_times = np.linspace(0.0, cfg.newton_t_max, cfg.newton_n_times)
    potentials = _newton_potentials(cfg)
    results.append(
        check_velocity_relation(
            potentials[0][1],
            interior_fraction=cfg.interior_fraction,
            tolerance=cfg.tol(NEWTON_TOLERANCE),
            label="harmonic",
        )
    )
    for label, h in potentials:
        results.append(
            check_newton_operator(
                h,
                times=newton_times,
                m_levels=cfg.newton_interior_levels,
                tolerance=cfg.tol(NEWTON_TOLERANCE),
                label=label,
            )
        )
    fields = FieldConfig(
        charge=cfg.charge,
        magnetic_field=(0.0, 0.0, cfg.b_field),
        electric_field=(cfg.e_field[0], cfg.e_field[1], 0.0),
    )
    results += check_lorentz_operator(
        fields,
        n_levels=cfg.n_levels_pair,
        hbar=cfg.hbar,
        interior_fraction=cfg.interior_fraction,
        tolerance=cfg.tol(LORENTZ_TOLERANCE),
    )
    results += check_rotating_operator(
        cfg.omega,
        n_levels=cfg.n_levels_pair,
        hbar=cfg.hbar,
        interior_fraction=cfg.interior_fraction,
        tolerance=cfg.tol(ROTATING_TOLERANCE),
    )
    results += check_hamilton_operator(
        potentials[1][1],
        interior_fraction=cfg.interior_fraction,
        tolerance=cfg.tol(HAMILTON_TOLERANCE),
        label="potential",
    )
    basis_random = make_basis(cfg.n_levels_random, 2, cfg.hbar)
    for k in range(cfg.n_random):
        seed = cfg.seed + k
        rng = np.random.default_rng(seed)
        h_random = random_polynomial(basis_random, rng)
        batch = check_hamilton_operator(
            h_random,
            interior_fraction=cfg.interior_fraction,
            tolerance=cfg.tol(HAMILTON_TOLERANCE),
            label=f"random_s{seed}",
        )
        for res in batch:
            res.params["seed"] = seed
        results += batch
    return results


def run_all(cfg: VerifyConfig | None = None) -> tuple[list[CheckResult], dict]:
    """Run every check; summary says how many passed.

    An empty check list (possible only through custom assembly) is a
    success; process exit codes are the CLI's concern.
    """
    cfg = cfg or VerifyConfig()
    results = default_checks(cfg)
    return results, summarize(results)


def summarize(results: list[CheckResult]) -> dict:
    n_passed = sum(1 for r in results if r.passed)
    return {
        "n_checks": len(results),
        "n_passed": n_passed,
        "n_failed": len(results) - n_passed,
        "all_passed": n_passed == len(results),
    }


def report_to_json(cfg: VerifyConfig, results: list[CheckResult]) -> str:
    """Canonical machine-readable report (stable bytes for fixed config)."""
    doc = {
        "version": __version__,
        "config": cfg.to_json_dict(),
        "results": [r.to_json_dict() for r in results],
        "summary": summarize(results),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
