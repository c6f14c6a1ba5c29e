"""Classical reference trajectories for every scenario family.

Specialized integrators (Newton, Lorentz, rotating frame) and a generic
Hamilton-equations integrator driven by the formal partial derivatives of
a :class:`~heisenlab.hamiltonians.PolyHamiltonian`.  RK4 is the default
everywhere; velocity Verlet is offered only where the force is
momentum-independent.

Sampling: every integrator returns values exactly on the requested time
grid, subdividing each interval into internal steps no longer than
``cfg.dt``.  Comparisons against quantum expectation series therefore
never interpolate.

Electromagnetic runs record both the canonical momentum (symmetric gauge,
``p = m v + q A(r)`` with ``A = B x r / 2``) and the kinetic momentum
``pi = m v``: the quantum velocity operator corresponds to ``pi / m``, and
mixing the two is the classic comparison bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hamiltonians import PolyHamiltonian, classical_evaluator, formal_partial
from .timeseries import TimeSeries

RK4 = "rk4"
VELOCITY_VERLET = "velocity_verlet"


@dataclass(frozen=True)
class ClassicalState:
    """Phase-space point ``(q, p)`` at time ``t``."""

    q: tuple[float, ...]
    p: tuple[float, ...]
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(v) for v in self.q))
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.q) != len(self.p):
            raise ValueError("q and p must have the same length")
        if not all(math.isfinite(v) for v in (*self.q, *self.p, self.t)):
            raise ValueError("classical state entries must be finite")


@dataclass(frozen=True)
class IntegratorConfig:
    """Time-stepping policy: method, internal step, final time."""

    method: str = RK4
    dt: float = 1e-3
    t_final: float = 10.0

    def __post_init__(self):
        if self.method not in (RK4, VELOCITY_VERLET):
            raise ValueError(f"unknown integrator {self.method!r}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final > 0.0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.dt > self.t_final:
            raise ValueError(f"dt={self.dt} exceeds t_final={self.t_final}")


def _resolve_grid(cfg: IntegratorConfig, t_grid) -> np.ndarray:
    if t_grid is None:
        n_steps = max(1, round(cfg.t_final / cfg.dt))
        return np.linspace(0.0, cfg.t_final, n_steps + 1)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a 1-d array")
    if t_grid.size > 1 and not np.all(np.diff(t_grid) > 0):
        raise ValueError("t_grid must be strictly increasing")
    return t_grid


def _rk4_path(f: Callable, y0: np.ndarray, t_grid: np.ndarray, dt: float) -> np.ndarray:
    """Classic RK4, sampling exactly at the grid times."""
    y = np.array(y0, dtype=float)
    out = np.empty((t_grid.size, y.size))
    out[0] = y
    for i in range(t_grid.size - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub = max(1, math.ceil((t1 - t0) / dt - 1e-12))
        h = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = f(t, y)
            k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = f(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        if not np.all(np.isfinite(y)):
            raise ValueError(f"integration diverged near t={t1}: non-finite state")
        out[i + 1] = y
    return out


def _verlet_path(accel: Callable, x0, v0, t_grid: np.ndarray, dt: float) -> np.ndarray:
    """Velocity Verlet for momentum-independent forces (kick-drift-kick)."""
    x = np.atleast_1d(np.array(x0, dtype=float))
    v = np.atleast_1d(np.array(v0, dtype=float))
    out = np.empty((t_grid.size, 2 * x.size))
    out[0] = np.concatenate([x, v])
    a = accel(x)
    for i in range(t_grid.size - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub = max(1, math.ceil((t1 - t0) / dt - 1e-12))
        h = (t1 - t0) / n_sub
        for _ in range(n_sub):
            x = x + v * h + 0.5 * a * h**2
            a_new = accel(x)
            v = v + 0.5 * (a + a_new) * h
            a = a_new
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise ValueError(f"integration diverged near t={t1}: non-finite state")
        out[i + 1] = np.concatenate([x, v])
    return out


def integrate_newton(
    potential_derivative: Callable[[float], float],
    mass: float,
    x0: float,
    v0: float,
    cfg: IntegratorConfig,
    t_grid=None,
) -> TimeSeries:
    """1-d ``m x'' = -V'(x)``; channels ``q0`` and ``p0 = m v``."""
    grid = _resolve_grid(cfg, t_grid)
    mass = float(mass)

    if cfg.method == VELOCITY_VERLET:
        def accel(x):
            return np.array([-potential_derivative(float(x[0])) / mass])

        path = _verlet_path(accel, [x0], [v0], grid, cfg.dt)
        xs, vs = path[:, 0], path[:, 1]
    else:
        def f(t, y):
            x, v = y
            force = -potential_derivative(float(x))
            if not math.isfinite(force):
                raise ValueError(f"non-finite force at x={x}")
            return np.array([v, force / mass])

        path = _rk4_path(f, np.array([x0, v0], dtype=float), grid, cfg.dt)
        xs, vs = path[:, 0], path[:, 1]
    return TimeSeries(grid, {"q0": xs, "p0": mass * vs})


def integrate_lorentz(
    charge: float,
    mass: float,
    e_field: Sequence[float],
    b_field: Sequence[float],
    r0: Sequence[float],
    v0: Sequence[float],
    cfg: IntegratorConfig,
    t_grid=None,
) -> TimeSeries:
    """3-d ``m v' = q v x B + q E``.

    Velocity Verlet is rejected (the force is velocity dependent).
    Channels: positions ``q0..q2``, canonical momenta ``p0..p2`` in the
    symmetric gauge, kinetic momenta ``pi0..pi2``.
    """
    if cfg.method == VELOCITY_VERLET:
        raise ValueError("velocity Verlet cannot integrate a velocity-dependent force")
    grid = _resolve_grid(cfg, t_grid)
    charge, mass = float(charge), float(mass)
    e_vec = _pad3(e_field)
    b_vec = _pad3(b_field)

    def f(t, y):
        v = y[3:]
        acc = (charge / mass) * (np.cross(v, b_vec) + e_vec)
        return np.concatenate([v, acc])

    y0 = np.concatenate([_pad3(r0), _pad3(v0)])
    path = _rk4_path(f, y0, grid, cfg.dt)
    rs, vs = path[:, :3], path[:, 3:]
    a_vals = 0.5 * np.cross(b_vec, rs)
    kinetic = mass * vs
    canonical = kinetic + charge * a_vals
    channels: dict[str, np.ndarray] = {}
    for i in range(3):
        channels[f"q{i}"] = rs[:, i]
    for i in range(3):
        channels[f"p{i}"] = canonical[:, i]
    for i in range(3):
        channels[f"pi{i}"] = kinetic[:, i]
    return TimeSeries(grid, channels)


def _pad3(vec: Sequence[float]) -> np.ndarray:
    out = np.zeros(3)
    vec = np.asarray(vec, dtype=float).reshape(-1)
    if vec.size > 3:
        raise ValueError(f"expected at most 3 components, got {vec.size}")
    out[: vec.size] = vec
    return out


def integrate_rotating(
    omega: float,
    mass: float,
    r0: Sequence[float],
    v0: Sequence[float],
    cfg: IntegratorConfig,
    t_grid=None,
) -> TimeSeries:
    """Planar rotating-frame motion ``m r'' = -2m w x v - m w x (w x r)``.

    With ``w = w z_hat`` the components read ``vx' = 2 w vy + w^2 x`` and
    ``vy' = -2 w vx + w^2 y``.  Channels: ``q0, q1`` and the canonical
    momenta ``p0 = m(vx - w y)``, ``p1 = m(vy + w x)`` of the frame
    Hamiltonian.
    """
    if cfg.method == VELOCITY_VERLET:
        raise ValueError("velocity Verlet cannot integrate a velocity-dependent force")
    grid = _resolve_grid(cfg, t_grid)
    omega, mass = float(omega), float(mass)
    r0 = np.asarray(r0, dtype=float).reshape(-1)
    v0 = np.asarray(v0, dtype=float).reshape(-1)
    if r0.size != 2 or v0.size != 2:
        raise ValueError("rotating-frame trajectories are planar: r0 and v0 need 2 components")

    def f(t, y):
        x, yy, vx, vy = y
        return np.array([vx, vy, 2.0 * omega * vy + omega**2 * x, -2.0 * omega * vx + omega**2 * yy])

    path = _rk4_path(f, np.concatenate([r0, v0]), grid, cfg.dt)
    xs, ys, vxs, vys = path.T
    return TimeSeries(
        grid,
        {
            "q0": xs,
            "q1": ys,
            "p0": mass * (vxs - omega * ys),
            "p1": mass * (vys + omega * xs),
        },
    )


def integrate_hamilton(
    h: PolyHamiltonian,
    state0: ClassicalState,
    cfg: IntegratorConfig,
    t_grid=None,
) -> TimeSeries:
    """Generic Hamilton flow ``q' = dH/dp``, ``p' = -dH/dq`` from the
    polynomial's formal partial derivatives."""
    if cfg.method == VELOCITY_VERLET:
        raise ValueError("the generic Hamilton integrator is RK4 only")
    d = h.basis.n_dofs
    if len(state0.q) != d:
        raise ValueError(f"state has {len(state0.q)} dofs, Hamiltonian has {d}")
    grid = _resolve_grid(cfg, t_grid)
    dq_rates = [classical_evaluator(formal_partial(h, j, "p")) for j in range(d)]
    dp_rates = [classical_evaluator(formal_partial(h, j, "q")) for j in range(d)]

    def f(t, y):
        q, p = y[:d], y[d:]
        dq = [rate(q, p) for rate in dq_rates]
        dp = [-rate(q, p) for rate in dp_rates]
        if not all(math.isfinite(v) for v in (*dq, *dp)):
            raise ValueError("non-finite Hamiltonian derivative encountered")
        return np.array(dq + dp)

    y0 = np.array(state0.q + state0.p, dtype=float)
    path = _rk4_path(f, y0, grid, cfg.dt)
    channels: dict[str, np.ndarray] = {}
    for j in range(d):
        channels[f"q{j}"] = path[:, j]
    for j in range(d):
        channels[f"p{j}"] = path[:, d + j]
    return TimeSeries(grid, channels)
