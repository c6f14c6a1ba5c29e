"""Comparison plots: trajectory overlays, gap growth, planar orbits."""

from __future__ import annotations

import os

import numpy as np

from .timeseries import TimeSeries


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def emit_plots(report, ts: TimeSeries, out_dir) -> list[str]:
    """Write the per-dof overlay plot and the gap plot; an orbit plot too
    for planar electromagnetic runs.  Returns the file paths."""
    scenario = report.scenario if not isinstance(report, dict) else report["scenario"]
    divergence = report.divergence if not isinstance(report, dict) else report["divergence"]
    n_dofs = scenario["basis"]["n_dofs"]
    stem = scenario["output"]["stem"]
    needed = [f"mean_q{i}" for i in range(n_dofs)] + [f"classical_q{i}" for i in range(n_dofs)]
    missing = [name for name in needed if name not in ts.channels]
    if missing:
        raise ValueError(f"trajectory data is missing channels {missing}")

    plt = _pyplot()
    paths = []

    fig, axes = plt.subplots(n_dofs, 1, figsize=(7.0, 2.6 * n_dofs), squeeze=False, sharex=True)
    for i in range(n_dofs):
        ax = axes[i][0]
        ax.plot(ts.times, ts.channel(f"mean_q{i}"), label=f"quantum <q{i}>", lw=1.6)
        ax.plot(ts.times, ts.channel(f"classical_q{i}"), "--", label=f"classical q{i}", lw=1.2)
        ax.set_ylabel(f"q{i}")
        ax.legend(loc="upper right", fontsize=8)
    axes[-1][0].set_xlabel("t")
    axes[0][0].set_title(f"{scenario['name']}: max gap {divergence['max_abs_gap']:.2e}")
    fig.tight_layout()
    overlay_path = os.path.join(out_dir, f"{stem}_trajectories.png")
    fig.savefig(overlay_path, dpi=120)
    plt.close(fig)
    paths.append(overlay_path)

    fig, ax = plt.subplots(figsize=(7.0, 3.0))
    for i in range(n_dofs):
        gap = np.abs(ts.channel(f"gap_q{i}"))
        ax.semilogy(ts.times, np.maximum(gap, 1e-18), label=f"|gap q{i}|")
    ax.set_xlabel("t")
    ax.set_ylabel("|quantum - classical|")
    ax.set_title(f"{scenario['name']}: expectation-vs-classical gap")
    ax.legend(fontsize=8)
    fig.tight_layout()
    gap_path = os.path.join(out_dir, f"{stem}_gap.png")
    fig.savefig(gap_path, dpi=120)
    plt.close(fig)
    paths.append(gap_path)

    if scenario["kind"] == "em" and n_dofs == 2:
        fig, ax = plt.subplots(figsize=(5.0, 5.0))
        ax.plot(ts.channel("mean_q0"), ts.channel("mean_q1"), label="quantum mean", lw=1.6)
        ax.plot(ts.channel("classical_q0"), ts.channel("classical_q1"), "--", label="classical", lw=1.2)
        ax.set_xlabel("q0")
        ax.set_ylabel("q1")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_title(f"{scenario['name']}: planar orbit")
        ax.legend(fontsize=8)
        fig.tight_layout()
        orbit_path = os.path.join(out_dir, f"{stem}_orbit.png")
        fig.savefig(orbit_path, dpi=120)
        plt.close(fig)
        paths.append(orbit_path)
    return paths
