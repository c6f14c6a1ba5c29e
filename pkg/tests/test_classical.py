"""Classical-integrator tests: analytic trajectories, energy, cross-oracles."""

import numpy as np
import pytest

from heisenlab import (
    ClassicalState,
    FieldConfig,
    IntegratorConfig,
    build_em_hamiltonian,
    build_potential_hamiltonian,
    build_rotating_frame,
    classical_value,
    integrate_hamilton,
    integrate_lorentz,
    integrate_newton,
    integrate_rotating,
    make_basis,
)
from heisenlab.classical import VELOCITY_VERLET


def test_config_validation():
    with pytest.raises(ValueError, match="unknown integrator"):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError, match="dt"):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError, match="exceeds t_final"):
        IntegratorConfig(dt=2.0, t_final=1.0)


def test_free_particle_is_exact_per_step():
    cfg = IntegratorConfig(dt=0.1, t_final=5.0)
    ts = integrate_newton(lambda x: 0.0, 2.0, x0=1.0, v0=0.3, cfg=cfg)
    assert np.allclose(ts.channel("q0"), 1.0 + 0.3 * ts.times, rtol=1e-14, atol=1e-14)
    assert np.allclose(ts.channel("p0"), 2.0 * 0.3, rtol=1e-14)


def test_harmonic_rk4_matches_cosine():
    cfg = IntegratorConfig(dt=1e-3, t_final=10.0)
    ts = integrate_newton(lambda x: x, 1.0, x0=1.0, v0=0.0, cfg=cfg)
    assert abs(ts.channel("q0")[-1] - np.cos(10.0)) < 1e-8


def test_velocity_verlet_energy_drift_is_bounded():
    cfg = IntegratorConfig(method=VELOCITY_VERLET, dt=1e-3, t_final=100.0)
    ts = integrate_newton(lambda x: x, 1.0, x0=1.0, v0=0.0, cfg=cfg, t_grid=np.linspace(0, 100, 401))
    energy = 0.5 * ts.channel("p0") ** 2 + 0.5 * ts.channel("q0") ** 2
    assert np.max(np.abs(energy - energy[0])) <= 1e-6 * energy[0]


def test_rk4_global_convergence_order():
    def final_error(dt):
        cfg = IntegratorConfig(dt=dt, t_final=10.0)
        ts = integrate_newton(lambda x: x, 1.0, 1.0, 0.0, cfg, t_grid=np.array([0.0, 10.0]))
        return abs(ts.channel("q0")[-1] - np.cos(10.0))

    order = np.log2(final_error(0.02) / final_error(0.01))
    assert order >= 3.9


def test_newton_nonfinite_force_raises():
    cfg = IntegratorConfig(dt=0.1, t_final=1.0)
    with pytest.raises(ValueError, match="non-finite"):
        integrate_newton(lambda x: float("nan"), 1.0, 0.0, 1.0, cfg)


# ----------------------------------------------------------------------
# Lorentz
# ----------------------------------------------------------------------

def test_lorentz_field_free_straight_line():
    cfg = IntegratorConfig(dt=1e-2, t_final=2.0)
    ts = integrate_lorentz(1.0, 1.0, (0, 0, 0), (0, 0, 0), (0, 0, 0), (1.0, 0.5, -0.2), cfg)
    assert np.allclose(ts.channel("q0"), ts.times, atol=1e-12)
    assert np.allclose(ts.channel("q1"), 0.5 * ts.times, atol=1e-12)


def test_cyclotron_radius_and_period():
    # q = m = B = 1, v = (1,0,0): circle of radius 1, period 2 pi
    cfg = IntegratorConfig(dt=1e-3, t_final=2 * np.pi)
    grid = np.linspace(0.0, 2 * np.pi, 101)
    ts = integrate_lorentz(1.0, 1.0, (0, 0, 0), (0, 0, 1.0), (0, 0, 0), (1.0, 0, 0), cfg, t_grid=grid)
    # analytic orbit: r(t) = (sin t, cos t - 1, 0)
    assert np.max(np.abs(ts.channel("q0") - np.sin(grid))) < 1e-7
    assert np.max(np.abs(ts.channel("q1") - (np.cos(grid) - 1.0))) < 1e-7
    radius = np.sqrt(ts.channel("q0") ** 2 + (ts.channel("q1") + 1.0) ** 2)
    assert np.max(np.abs(radius - 1.0)) < 1e-7
    assert abs(ts.channel("q0")[-1]) < 1e-7 and abs(ts.channel("q1")[-1]) < 1e-7


def test_uniform_electric_field_from_rest():
    cfg = IntegratorConfig(dt=1e-3, t_final=3.0)
    ts = integrate_lorentz(1.0, 1.0, (1.0, 0, 0), (0, 0, 0), (0, 0, 0), (0, 0, 0), cfg)
    assert np.max(np.abs(ts.channel("q0") - ts.times**2 / 2)) < 1e-9


def test_lorentz_records_canonical_and_kinetic_momenta():
    cfg = IntegratorConfig(dt=1e-3, t_final=1.0)
    b = (0, 0, 2.0)
    ts = integrate_lorentz(0.5, 1.5, (0, 0, 0), b, (1.0, 0.5, 0), (0.2, -0.1, 0), cfg)
    # pi = m v, p = pi + q A with A = B x r / 2
    a_x = 0.5 * (b[2] * -ts.channel("q1"))
    assert np.allclose(ts.channel("p0"), ts.channel("pi0") + 0.5 * a_x, atol=1e-12)


def test_lorentz_rejects_velocity_verlet():
    cfg = IntegratorConfig(method=VELOCITY_VERLET, dt=1e-3, t_final=1.0)
    with pytest.raises(ValueError, match="velocity-dependent"):
        integrate_lorentz(1.0, 1.0, (0, 0, 0), (0, 0, 1), (0, 0, 0), (1, 0, 0), cfg)
    with pytest.raises(ValueError, match="velocity-dependent"):
        integrate_rotating(1.0, 1.0, (1, 0), (0, 0), cfg)


# ----------------------------------------------------------------------
# rotating frame
# ----------------------------------------------------------------------

def test_rotating_zero_omega_is_free_motion():
    cfg = IntegratorConfig(dt=1e-3, t_final=2.0)
    ts = integrate_rotating(0.0, 1.0, (1.0, 0.0), (0.5, -0.2), cfg)
    assert np.allclose(ts.channel("q0"), 1.0 + 0.5 * ts.times, atol=1e-10)
    assert np.allclose(ts.channel("q1"), -0.2 * ts.times, atol=1e-10)


def test_inertially_static_particle_circles_in_rotating_frame():
    # a particle at rest in the inertial frame, seen from the rotating one:
    # r'(t) = R(-w t) r_inertial, a circle of radius |r0| at angular speed w
    omega = 0.7
    r_in = np.array([1.2, -0.4])
    v0 = np.array([-omega * -r_in[1], -omega * r_in[0]])  # -w x r
    grid = np.linspace(0.0, 8.0, 81)
    cfg = IntegratorConfig(dt=1e-3, t_final=8.0)
    ts = integrate_rotating(omega, 1.0, r_in, v0, cfg, t_grid=grid)
    expected_x = np.cos(omega * grid) * r_in[0] + np.sin(omega * grid) * r_in[1]
    expected_y = -np.sin(omega * grid) * r_in[0] + np.cos(omega * grid) * r_in[1]
    assert np.max(np.abs(ts.channel("q0") - expected_x)) < 1e-7
    assert np.max(np.abs(ts.channel("q1") - expected_y)) < 1e-7


def test_rotating_origin_is_fixed_point():
    cfg = IntegratorConfig(dt=1e-3, t_final=5.0)
    ts = integrate_rotating(0.9, 1.0, (0.0, 0.0), (0.0, 0.0), cfg)
    assert np.max(np.abs(ts.channel("q0"))) == 0.0
    assert np.max(np.abs(ts.channel("q1"))) == 0.0


# ----------------------------------------------------------------------
# generic Hamilton flow and cross-oracle consistency
# ----------------------------------------------------------------------

def test_hamilton_free_particle():
    basis = make_basis(8, 1, masses=2.0)
    h = build_potential_hamiltonian(basis, [])
    cfg = IntegratorConfig(dt=1e-2, t_final=3.0)
    ts = integrate_hamilton(h, ClassicalState(q=(1.0,), p=(0.8,)), cfg)
    assert np.allclose(ts.channel("q0"), 1.0 + 0.4 * ts.times, atol=1e-12)
    assert np.allclose(ts.channel("p0"), 0.8, atol=1e-13)


def test_hamilton_matches_rotating_oracle():
    omega, mass = 0.5, 1.0
    basis = make_basis(8, 2)
    h = build_rotating_frame(basis, omega)
    r0, v0 = np.array([1.0, -0.3]), np.array([0.2, 0.4])
    # canonical momenta of the frame Hamiltonian: p = m(v - w y, v + w x)
    p0 = mass * np.array([v0[0] - omega * r0[1], v0[1] + omega * r0[0]])
    grid = np.linspace(0.0, 10.0, 51)
    cfg = IntegratorConfig(dt=1e-3, t_final=10.0)
    direct = integrate_rotating(omega, mass, r0, v0, cfg, t_grid=grid)
    generic = integrate_hamilton(h, ClassicalState(q=tuple(r0), p=tuple(p0)), cfg, t_grid=grid)
    for name in ("q0", "q1", "p0", "p1"):
        assert np.max(np.abs(direct.channel(name) - generic.channel(name))) < 1e-7


def test_hamilton_matches_lorentz_oracle():
    qc, mass, bz = 0.8, 1.0, 1.2
    e_vec = (0.1, -0.05, 0.0)
    basis = make_basis(8, 2)
    h = build_em_hamiltonian(basis, FieldConfig(qc, (0, 0, bz), e_vec))
    r0 = np.array([0.5, -0.2])
    v0 = np.array([0.3, 0.6])
    # canonical p = m v + q A(r), symmetric gauge
    a0 = 0.5 * np.array([-bz * r0[1], bz * r0[0]])
    p0 = mass * v0 + qc * a0
    grid = np.linspace(0.0, 10.0, 51)
    cfg = IntegratorConfig(dt=1e-3, t_final=10.0)
    direct = integrate_lorentz(qc, mass, e_vec, (0, 0, bz), r0, v0, cfg, t_grid=grid)
    generic = integrate_hamilton(h, ClassicalState(q=tuple(r0), p=tuple(p0)), cfg, t_grid=grid)
    for name in ("q0", "q1", "p0", "p1"):
        assert np.max(np.abs(direct.channel(name) - generic.channel(name))) < 1e-7
    # and the kinetic momentum equals m v = p - q A along the whole path
    a_x = 0.5 * -bz * direct.channel("q1")
    assert np.allclose(direct.channel("pi0"), direct.channel("p0") - qc * a_x, atol=1e-12)


def test_hamilton_energy_conservation_long_run():
    basis = make_basis(8, 1)
    h = build_potential_hamiltonian(basis, [0.0, 0.0, 0.5, 0.0, 0.05])
    cfg = IntegratorConfig(dt=1e-3, t_final=100.0)
    grid = np.linspace(0.0, 100.0, 201)
    ts = integrate_hamilton(h, ClassicalState(q=(1.0,), p=(0.5,)), cfg, t_grid=grid)
    energies = [
        classical_value(h, [q], [p]) for q, p in zip(ts.channel("q0"), ts.channel("p0"))
    ]
    energies = np.array(energies)
    assert np.max(np.abs(energies - energies[0])) <= 1e-7 * abs(energies[0])


def test_hamilton_rejects_wrong_dof_count_and_verlet():
    basis = make_basis(8, 2)
    h = build_rotating_frame(basis, 0.5)
    cfg = IntegratorConfig(dt=1e-2, t_final=1.0)
    with pytest.raises(ValueError, match="dofs"):
        integrate_hamilton(h, ClassicalState(q=(1.0,), p=(0.0,)), cfg)
    with pytest.raises(ValueError, match="RK4 only"):
        integrate_hamilton(
            h,
            ClassicalState(q=(1.0, 0.0), p=(0.0, 0.0)),
            IntegratorConfig(method=VELOCITY_VERLET, dt=1e-2, t_final=1.0),
        )


def test_classical_state_requires_finite_entries():
    with pytest.raises(ValueError, match="finite"):
        ClassicalState(q=(float("inf"),), p=(0.0,))
    with pytest.raises(ValueError, match="same length"):
        ClassicalState(q=(1.0, 2.0), p=(0.0,))
