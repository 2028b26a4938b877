"""SVG plots from run and sweep artifacts."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# keep labels as SVG text rather than glyph outlines
matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "allee-fronts"
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .levelsets import trajectories_from_csv  # noqa: E402
from .theory import EnvelopeParams, envelope_lower, envelope_upper  # noqa: E402


def _lam_tag(lam: float) -> str:
    return f"{lam:g}".replace(".", "p")


def plot_trajectories(run_dir: Path, out_dir: Path) -> list[Path]:
    """One log-log plot of level position vs time per level."""
    trajs = trajectories_from_csv((run_dir / "levelsets.csv").read_text())
    envelope = None
    meta = run_dir / "run.json"
    if meta.exists():
        theory = json.loads(meta.read_text()).get("theory", {})
        # envelopes exist only in the accelerating regime
        if theory.get("regime") == "acceleration" and "envelope" in theory:
            envelope = EnvelopeParams(**theory["envelope"])
    paths = []
    for traj in trajs:
        fig, ax = plt.subplots(figsize=(5, 4))
        sel = (traj.t > 0) & np.isfinite(traj.x_right) & (traj.x_right > 0)
        ax.loglog(traj.t[sel], traj.x_right[sel], "k-", lw=1.5, label=f"x(t), level {traj.lam:g}")
        if envelope is not None and np.any(sel):
            t = traj.t[sel]
            ax.loglog(t, envelope_lower(envelope, t), "b--", lw=1, label="lower envelope")
            ax.loglog(t, envelope_upper(envelope, t), "r--", lw=1, label="upper envelope")
        ax.set_xlabel("t")
        ax.set_ylabel("rightmost level position")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        path = out_dir / f"trajectory_lambda_{_lam_tag(traj.lam)}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths


def plot_phase(run_dir: Path, out_dir: Path) -> Path:
    """Scatter of sweep cells coloured by empirical regime, with the threshold hyperbola."""
    with open(run_dir / "phase_diagram.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(5, 4))
    style = {"accelerating": ("r", "o"), "linear": ("b", "s")}
    for row in rows:
        color, marker = style.get(row["empirical_regime"], ("0.5", "x"))
        face = color if row["agree"] == "true" else "none"
        ax.scatter(float(row["alpha"]), float(row["beta"]), c=face, edgecolors=color, marker=marker)
    amax = max([float(r["alpha"]) for r in rows] + [3.0]) * 1.1
    a = np.linspace(0.3, amax, 400)
    ax.plot(a, 1 + 1 / a, "k-", lw=1, label="beta = 1 + 1/alpha")
    ax.set_xlim(0, amax)
    ax.set_ylim(1, max([float(r["beta"]) for r in rows] + [3.0]) * 1.1)
    ax.set_xlabel("alpha (tail exponent)")
    ax.set_ylabel("beta (Allee exponent)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    path = out_dir / "phase_diagram.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def emit_plots(run_dir: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    run_dir = Path(run_dir)
    out_dir = run_dir if out_dir is None else Path(out_dir)
    have_levels = (run_dir / "levelsets.csv").exists()
    have_phase = (run_dir / "phase_diagram.csv").exists()
    if not (have_levels or have_phase):
        raise FileNotFoundError(f"no levelsets.csv or phase_diagram.csv in {run_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    if have_levels:
        paths += plot_trajectories(run_dir, out_dir)
    if have_phase:
        paths.append(plot_phase(run_dir, out_dir))
    return paths
