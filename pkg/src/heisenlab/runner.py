"""Scenario execution: quantum run, classical oracle, merged outputs.

Both sides of every comparison are sampled on one shared time grid.  The
classical oracle starts from the quantum state's own expectation values,
and for electromagnetic scenarios its initial velocity comes from the
*kinetic* momentum ``<pi>/m`` (the canonical momentum differs by ``qA``).

CSV column order (fixed): ``t``; per dof ``mean_q{i}``, ``mean_p{i}``,
(``mean_pi{i}`` for em), ``delta_q{i}``; per dof ``classical_q{i}``,
``classical_p{i}``, (``classical_pi{i}`` for em); per dof ``gap_q{i}``
(signed, quantum minus classical).  Floats carry 17 significant digits and
rewriting a scenario with an unchanged config hash reproduces the CSV and
report byte-for-byte.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .classical import (
    ClassicalState,
    IntegratorConfig,
    integrate_hamilton,
    integrate_lorentz,
    integrate_newton,
    integrate_rotating,
)
from .ehrenfest import compare_trajectories, ehrenfest_check, linear_scenario_exactness
from .evolution import make_propagator, sample_expectations, schrodinger_evolve
from .hamiltonians import (
    Q,
    classical_evaluator,
    evaluate,
    formal_partial,
    kinetic_momentum_operator,
)
from .operators import momentum_operator, position_operator
from .scenarios import Scenario
from .timeseries import TimeSeries
from .verify import VerifyConfig, run_all


@dataclass
class RunReport:
    """Everything one scenario run produced, JSON-serializable."""

    scenario: dict
    versions: dict
    config_hash: str
    linear_exactness: bool
    divergence: dict
    deviations: list
    check_summary: dict | None
    check_results: list | None
    outputs: dict

    def to_json(self) -> str:
        doc = dataclasses.asdict(self)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def config_hash(scenario: Scenario) -> str:
    payload = json.dumps(
        {"scenario": scenario.to_json_dict(), "version": __version__}, sort_keys=True
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def _classical_series(scenario: Scenario, h, quantum: TimeSeries, t_grid) -> TimeSeries:
    kind = scenario.kind
    basis = h.basis
    mass = basis.masses[0]
    dt = scenario.resolved["classical_dt"]
    cfg = IntegratorConfig(method="rk4", dt=dt, t_final=float(t_grid[-1]) if t_grid[-1] > 0 else dt)
    if kind in ("potential", "gravity_taylor"):
        v_prime = classical_evaluator(formal_partial(h, 0, Q))
        zero = np.zeros(1)

        def force_derivative(x):
            return v_prime(np.array([x]), zero)

        x0 = quantum.channel("mean_q0")[0]
        v0 = quantum.channel("mean_p0")[0] / mass
        return integrate_newton(force_derivative, mass, x0, v0, cfg, t_grid=t_grid)
    if kind == "em":
        meta = h.metadata
        r0 = [quantum.channel("mean_q0")[0], quantum.channel("mean_q1")[0], 0.0]
        v0 = [
            quantum.channel("mean_pi0")[0] / mass,
            quantum.channel("mean_pi1")[0] / mass,
            0.0,
        ]
        return integrate_lorentz(
            meta["charge"], mass, meta["electric_field"], meta["magnetic_field"], r0, v0, cfg, t_grid=t_grid
        )
    if kind == "rotating":
        omega = h.metadata["omega"]
        q0 = quantum.channel("mean_q0")[0]
        q1 = quantum.channel("mean_q1")[0]
        v0 = [
            (quantum.channel("mean_p0")[0] + mass * omega * q1) / mass,
            (quantum.channel("mean_p1")[0] - mass * omega * q0) / mass,
        ]
        return integrate_rotating(omega, mass, [q0, q1], v0, cfg, t_grid=t_grid)
    # generic_hamiltonian: integrate the same polynomial's Hamilton flow
    d = basis.n_dofs
    state0 = ClassicalState(
        q=[quantum.channel(f"mean_q{i}")[0] for i in range(d)],
        p=[quantum.channel(f"mean_p{i}")[0] for i in range(d)],
    )
    return integrate_hamilton(h, state0, cfg, t_grid=t_grid)


def run(scenario: Scenario, out_dir, make_plots: bool = True) -> RunReport:
    """Execute one scenario: simulate, compare, write CSV/report/plots."""
    os.makedirs(out_dir, exist_ok=True)
    basis = scenario.basis()
    h = scenario.hamiltonian(basis)
    h_op = evaluate(h)
    prop = make_propagator(h_op)
    psi0 = scenario.initial_state(basis)
    t_grid = scenario.time_grid()
    d = basis.n_dofs
    is_em = scenario.kind == "em"

    observables = {}
    for i in range(d):
        observables[f"q{i}"] = position_operator(basis, i)
        observables[f"p{i}"] = momentum_operator(basis, i)
        if is_em:
            observables[f"pi{i}"] = kinetic_momentum_operator(h, i)
    quantum = sample_expectations(
        prop, psi0, observables, t_grid, uncertainties=[f"q{i}" for i in range(d)]
    )
    classical = _classical_series(scenario, h, quantum, t_grid)

    pairs = [(f"mean_q{i}", f"q{i}") for i in range(d)]
    metrics = compare_trajectories(quantum, classical, pairs)

    channels: dict[str, np.ndarray] = {}
    for i in range(d):
        channels[f"mean_q{i}"] = quantum.channel(f"mean_q{i}")
        channels[f"mean_p{i}"] = quantum.channel(f"mean_p{i}")
        if is_em:
            channels[f"mean_pi{i}"] = quantum.channel(f"mean_pi{i}")
        channels[f"delta_q{i}"] = quantum.channel(f"delta_q{i}")
    for i in range(d):
        channels[f"classical_q{i}"] = classical.channel(f"q{i}")
        channels[f"classical_p{i}"] = classical.channel(f"p{i}")
        if is_em:
            channels[f"classical_pi{i}"] = classical.channel(f"pi{i}")
    for i in range(d):
        channels[f"gap_q{i}"] = quantum.channel(f"mean_q{i}") - classical.channel(f"q{i}")
    merged = TimeSeries(t_grid, channels)

    deviations = []
    if d == 1 and scenario.kind in ("potential", "gravity_taylor"):
        sample_idx = sorted({0, len(t_grid) // 4, len(t_grid) // 2, 3 * len(t_grid) // 4, len(t_grid) - 1})
        for idx in sample_idx:
            t = float(t_grid[idx])
            report = ehrenfest_check(schrodinger_evolve(prop, psi0, t), h)
            deviations.append(
                {
                    "t": t,
                    "mean_force": report.mean_force,
                    "classical_force_at_mean": report.classical_force_at_mean,
                    "residual": report.residual,
                    "predicted_residual": report.predicted_residual,
                    "delta_x": report.delta_x,
                }
            )

    check_summary = None
    check_results = None
    if scenario.resolved["run_checks"]:
        results, check_summary = run_all(VerifyConfig())
        check_results = [r.to_json_dict() for r in results]

    stem = scenario.resolved["output"]["stem"]
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    report_path = os.path.join(out_dir, f"{stem}_report.json")
    merged.to_csv(csv_path)

    report = RunReport(
        scenario=scenario.to_json_dict(),
        versions={"heisenlab": __version__, "numpy": np.__version__},
        config_hash=config_hash(scenario),
        linear_exactness=linear_scenario_exactness(h),
        divergence={
            "max_abs_gap": metrics.max_abs_gap,
            "time_of_max": metrics.time_of_max,
            "rms_gap": metrics.rms_gap,
            "channel_pairs": [list(pair) for pair in metrics.channel_pairs],
        },
        deviations=deviations,
        check_summary=check_summary,
        check_results=check_results,
        outputs={"csv": os.path.basename(csv_path), "report": os.path.basename(report_path), "plots": []},
    )

    if make_plots:
        from .plots import emit_plots

        plot_paths = emit_plots(report, merged, out_dir)
        report.outputs["plots"] = [os.path.basename(p) for p in plot_paths]

    _atomic_write_text(report_path, report.to_json())
    return report
