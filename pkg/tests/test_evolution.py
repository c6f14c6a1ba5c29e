"""Spectral-propagation tests: picture equivalence, exactness, conventions."""

import numpy as np
import pytest

from heisenlab import (
    InteriorBlock,
    Operator,
    build_potential_hamiltonian,
    coherent_state,
    evaluate,
    expectation,
    fock_state,
    heisenberg_evolve,
    heisenberg_rhs,
    identity_operator,
    interior_project,
    lowering_operator,
    make_basis,
    make_propagator,
    momentum_operator,
    position_operator,
    sample_expectations,
    schrodinger_evolve,
)
from heisenlab.operators import HERMITIAN


def harmonic_setup(n=64, hbar=1.0, mass=1.0, omega=1.0, length=None):
    length = length if length is not None else np.sqrt(hbar / (mass * omega))
    basis = make_basis(n, 1, hbar, mass, length)
    h = build_potential_hamiltonian(basis, [0.0, 0.0, 0.5 * mass * omega**2])
    return basis, evaluate(h)


def test_propagator_of_diagonal_matrix():
    basis = make_basis(3, 1)
    h = Operator(basis, np.diag([0.0, 1.0, 2.0]), HERMITIAN)
    prop = make_propagator(h)
    assert np.allclose(prop.eigenvalues, [0.0, 1.0, 2.0])
    assert np.allclose(prop.eigenvectors, np.eye(3))
    assert np.max(np.abs(prop.unitary(0.0) - np.eye(3))) < 1e-12


def test_propagator_requires_hermitian_flag():
    basis = make_basis(4, 1)
    with pytest.raises(ValueError, match="hermitian"):
        make_propagator(lowering_operator(basis))


def test_eigenvector_phase_convention():
    basis = make_basis(24, 1, 1.0, 1.0, 1.3)
    h = evaluate(build_potential_hamiltonian(basis, [0.0, 0.0, 0.5]))
    prop = make_propagator(h)
    for k in range(prop.eigenvectors.shape[1]):
        col = prop.eigenvectors[:, k]
        pivot = col[int(np.argmax(np.abs(col)))]
        assert pivot.real > 0.0
        assert abs(pivot.imag) <= 1e-14 * abs(pivot)


def test_harmonic_low_spectrum_with_mismatched_length():
    # non-resonant basis: the dense eigensolve must still recover (k+1/2)
    basis = make_basis(64, 1, 1.0, 1.0, 1.3)
    h = evaluate(build_potential_hamiltonian(basis, [0.0, 0.0, 0.5]))
    prop = make_propagator(h)
    assert np.max(np.abs(prop.eigenvalues[:20] - (np.arange(20) + 0.5))) < 1e-9


def test_heisenberg_evolve_at_zero_is_identity():
    basis, h = harmonic_setup()
    x = position_operator(basis)
    x0 = heisenberg_evolve(make_propagator(h), x, 0.0)
    assert np.max(np.abs(x0.matrix - x.matrix)) < 1e-12
    assert x0.hermitian_flag == HERMITIAN


def test_harmonic_position_rotates_into_momentum():
    # operator solution x(t) = x cos(wt) + (p/mw) sin(wt) on the interior
    basis, h = harmonic_setup(n=64)
    prop = make_propagator(h)
    x = position_operator(basis)
    p = momentum_operator(basis)
    block = InteriorBlock(32)
    for t in (0.3, 1.7, 4.0):
        evolved = interior_project(heisenberg_evolve(prop, x, t), block)
        reference = interior_project(np.cos(t) * x + np.sin(t) * p, block)
        err = np.linalg.norm(evolved.matrix - reference.matrix) / np.linalg.norm(reference.matrix)
        assert err < 1e-9


def test_heisenberg_evolution_preserves_frobenius_norm():
    basis, h = harmonic_setup(n=32, length=1.2)
    prop = make_propagator(h)
    x = position_operator(basis)
    evolved = heisenberg_evolve(prop, x, 2.7)
    assert abs(np.linalg.norm(evolved.matrix) - np.linalg.norm(x.matrix)) <= 1e-10 * np.linalg.norm(
        x.matrix
    )


def test_heisenberg_composition():
    basis = make_basis(48, 1)
    h = evaluate(build_potential_hamiltonian(basis, [0.0, 0.0, 0.5, 0.02]))
    prop = make_propagator(h)
    x = position_operator(basis)
    once = heisenberg_evolve(prop, x, 1.6)
    twice = heisenberg_evolve(prop, heisenberg_evolve(prop, x, 0.7), 0.9)
    assert np.linalg.norm(once.matrix - twice.matrix) <= 1e-10 * np.linalg.norm(once.matrix)


def test_schrodinger_evolve_trivial_and_stationary():
    basis, h = harmonic_setup()
    prop = make_propagator(h)
    psi = coherent_state(basis, 0, 0.6)
    assert np.max(np.abs(schrodinger_evolve(prop, psi, 0.0).amplitudes - psi.amplitudes)) < 1e-12
    excited = fock_state(basis, 3)
    evolved = schrodinger_evolve(prop, excited, 5.3)
    assert abs(abs(evolved.overlap(excited)) - 1.0) < 1e-12


def test_coherent_state_mean_follows_analytic_cosine():
    basis, h = harmonic_setup(n=64)
    prop = make_propagator(h)
    alpha = 0.8 * np.exp(0.7j)
    psi = coherent_state(basis, 0, alpha)
    x = position_operator(basis)
    for t in (0.0, 0.9, 2.2, 6.5):
        mean = expectation(schrodinger_evolve(prop, psi, t), x).real
        # analytic trajectory l*sqrt(2)*|alpha|*cos(w t - arg alpha)
        assert mean == pytest.approx(np.sqrt(2) * abs(alpha) * np.cos(t - 0.7), abs=1e-9)


def test_heisenberg_rhs_of_hamiltonian_vanishes():
    basis, h = harmonic_setup(n=32)
    rhs = heisenberg_rhs(h, h)
    assert np.max(np.abs(rhs.matrix)) < 1e-12 * np.max(np.abs(h.matrix))


def test_heisenberg_rhs_velocity_and_force():
    # dx/dt = p/m and dp/dt = -m w^2 x on the interior block
    mass, omega = 1.4, 0.9
    basis, h = harmonic_setup(n=64, mass=mass, omega=omega)
    x = position_operator(basis)
    p = momentum_operator(basis)
    block = InteriorBlock(32)

    def block_err(lhs, rhs):
        lhs_b, rhs_b = interior_project(lhs, block), interior_project(rhs, block)
        return np.linalg.norm(lhs_b.matrix - rhs_b.matrix) / np.linalg.norm(rhs_b.matrix)

    assert block_err(heisenberg_rhs(h, x), (1.0 / mass) * p) < 1e-10
    assert block_err(heisenberg_rhs(h, p), (-mass * omega**2) * x) < 1e-10
    assert heisenberg_rhs(h, x).hermitian_flag == HERMITIAN


def test_spectral_derivative_converges_at_second_order():
    basis = make_basis(48, 1)
    h = evaluate(build_potential_hamiltonian(basis, [0.0, 0.0, 0.5, 0.02]))
    prop = make_propagator(h)
    x = position_operator(basis)
    t0 = 0.7

    def fd_error(step):
        plus = heisenberg_evolve(prop, x, t0 + step).matrix
        minus = heisenberg_evolve(prop, x, t0 - step).matrix
        reference = heisenberg_rhs(h, heisenberg_evolve(prop, x, t0)).matrix
        return np.linalg.norm((plus - minus) / (2 * step) - reference)

    order = np.log2(fd_error(0.02) / fd_error(0.01))
    assert order >= 1.9


def test_sample_expectations_constant_channel():
    basis, h = harmonic_setup(n=16)
    prop = make_propagator(h)
    psi = coherent_state(basis, 0, 0.4)
    ts = sample_expectations(prop, psi, {"one": identity_operator(basis)}, np.linspace(0, 1, 5))
    assert np.allclose(ts.channel("mean_one"), 1.0, atol=1e-12)


def test_picture_equivalence_at_sampled_times():
    basis = make_basis(48, 1)
    h = evaluate(build_potential_hamiltonian(basis, [0.0, 0.0, 0.5, 0.03]))
    prop = make_propagator(h)
    psi = coherent_state(basis, 0, 0.7)
    x = position_operator(basis)
    norm = np.linalg.norm(x.matrix)
    for t in np.linspace(0.0, 8.0, 9):
        heis = np.vdot(psi.amplitudes, heisenberg_evolve(prop, x, t).matrix @ psi.amplitudes)
        schr = expectation(schrodinger_evolve(prop, psi, t), x)
        assert abs(heis - schr) <= 1e-10 * norm


def test_energy_expectation_is_conserved():
    basis = make_basis(48, 1)
    h = evaluate(build_potential_hamiltonian(basis, [0.0, 0.0, 0.5, 0.0, 0.05]))
    prop = make_propagator(h)
    psi = coherent_state(basis, 0, 0.8)
    e0 = expectation(psi, h).real
    for t in np.linspace(0.5, 10.0, 7):
        e_t = expectation(schrodinger_evolve(prop, psi, t), h).real
        assert abs(e_t - e0) <= 1e-10 * abs(e0)


def test_sample_expectations_with_uncertainties_and_grid_guard():
    basis, h = harmonic_setup(n=32)
    prop = make_propagator(h)
    psi = coherent_state(basis, 0, 0.5)
    x = position_operator(basis)
    ts = sample_expectations(prop, psi, {"q0": x}, [0.0, 0.5, 1.0], uncertainties=["q0"])
    # coherent states keep the vacuum width at all times
    assert np.allclose(ts.channel("delta_q0"), np.sqrt(0.5), atol=1e-10)
    with pytest.raises(ValueError, match="strictly increasing"):
        sample_expectations(prop, psi, {"q0": x}, [0.0, 0.0, 1.0])
    with pytest.raises(ValueError, match="unknown observables"):
        sample_expectations(prop, psi, {"q0": x}, [0.0, 1.0], uncertainties=["nope"])


def test_evolution_rejects_basis_mismatch():
    basis, h = harmonic_setup(n=16)
    prop = make_propagator(h)
    other = make_basis(16, 1, hbar=2.0)
    with pytest.raises(ValueError, match="different bases"):
        heisenberg_evolve(prop, position_operator(other), 1.0)
    with pytest.raises(ValueError, match="different bases"):
        schrodinger_evolve(prop, fock_state(other), 1.0)
