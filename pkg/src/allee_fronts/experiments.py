"""Configuration-driven experiments: single runs, certificate suites and sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .certificates import (
    check_bump_subsolution,
    check_global_supersolution,
    check_ordering,
    check_traveling_supersolution,
)
from .config import RunConfig, build_config
from .errors import AlleeFrontsError, ConfigError, FitError
from .levelsets import detect_regime_empirical, trajectories_to_csv
from .model import LIGHTER, classify_tail, validate_model
from .solver import GridState, run
from .theory import (
    EnvelopeParams,
    bump_constants,
    classify_regime,
    noacc_speed,
    predicted_exponent,
)

log = logging.getLogger(__name__)

PHASE_COLUMNS = ["alpha", "beta", "theory_regime", "empirical_regime", "fitted_exponent",
                 "fit_quality", "agree"]
_HEADER = struct.Struct("<4d")


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=False) + "\n")


def write_snapshots(path: Path, snapshots) -> None:
    """Append-only binary stream: per snapshot ``[t, x_left, dx, n]`` then ``n`` values (float64 LE)."""
    with open(path, "ab") as fh:
        for st in snapshots:
            u = np.ascontiguousarray(st.values, dtype="<f8")
            fh.write(_HEADER.pack(st.t, st.x_left, st.dx, float(u.size)))
            fh.write(u.tobytes())


def read_snapshots(path) -> list[GridState]:
    data = Path(path).read_bytes()
    out, pos = [], 0
    while pos < len(data):
        t, x_left, dx, n = _HEADER.unpack_from(data, pos)
        pos += _HEADER.size
        n = int(n)
        vals = np.frombuffer(data, dtype="<f8", count=n, offset=pos).copy()
        pos += 8 * n
        out.append(GridState(t=t, dx=dx, x_left=x_left, values=vals))
    return out


def theory_summary(cfg: RunConfig) -> dict:
    """Regime verdict and constants that follow from the configuration alone."""
    model, profile = cfg.model, cfg.profile
    out: dict = {"validation": validate_model(model).to_dict()}
    if profile.tail_kind != "algebraic":
        try:
            tail = classify_tail(profile)
            out["tail_class"] = str(tail)
            out["regime"] = "no_acceleration" if tail.name == LIGHTER else None
        except AlleeFrontsError as exc:
            out["tail_class"] = None
            out["regime"] = None
            out["error"] = str(exc)
        return out
    verdict = classify_regime(profile.alpha, model.beta)
    out.update(regime=verdict.regime, gap=verdict.gap, boundary=verdict.boundary)
    if verdict.regime == "acceleration":
        out["predicted_exponent"] = predicted_exponent(profile.alpha, model.beta)
        out["envelope"] = {"alpha": profile.alpha, "beta": model.beta, "r": model.r,
                           "r_bar": model.upper_rate, "C": profile.C, "C_bar": profile.C_bar,
                           "epsilon": cfg.epsilon}
        try:
            EnvelopeParams(**out["envelope"]).validate()
        except AlleeFrontsError as exc:
            out["envelope_error"] = str(exc)
            del out["envelope"]
        try:
            out["bump_constants"] = bump_constants(model, profile, cfg.epsilon).to_dict()
        except AlleeFrontsError as exc:
            out["bump_constants_error"] = str(exc)
    else:
        try:
            out["noacc_speed"] = noacc_speed(model, profile).to_dict()
        except AlleeFrontsError as exc:
            out["noacc_speed_error"] = str(exc)
    return out


def _fits(result, levels) -> dict:
    fits = {}
    for lam in levels:
        key = repr(float(lam))
        try:
            verdict, fit = detect_regime_empirical(result.trajectory(lam))
            fits[key] = {"empirical_regime": verdict, **fit.to_dict()}
        except FitError as exc:
            fits[key] = {"empirical_regime": "undecided", "error": str(exc)}
    return fits


def _auto_suites(theory: dict) -> list[str]:
    if theory.get("regime") == "acceleration":
        return ["bump", "global", "ordering"]
    if theory.get("regime") == "no_acceleration" and "noacc_speed" in theory:
        return ["traveling"]
    return []


def run_certificates(cfg: RunConfig, theory: dict, result=None) -> dict:
    """Run the requested certificate suites; every entry carries a ``pass`` flag."""
    model, profile, eps = cfg.model, cfg.profile, cfg.epsilon
    suites = cfg.certify["suites"]
    suites = _auto_suites(theory) if suites is None else list(suites)
    out: dict = {}
    for name in suites:
        try:
            if name == "traveling":
                nac = noacc_speed(model, profile)
                c = cfg.certify["c"] if cfg.certify["c"] is not None else nac.c
                out[name] = check_traveling_supersolution(nac.K, c, model).to_dict()
                if cfg.certify["negative_control"]:
                    bad = check_traveling_supersolution(nac.K, 0.5 * nac.base_bound, model)
                    out["traveling_negative_control"] = {
                        "c": 0.5 * nac.base_bound, "max_residual": bad.max_residual,
                        "construction_passed": bad.passed,
                        # the control is expected to fail the scan
                        "pass": not bad.passed,
                    }
            elif name == "bump":
                constants = bump_constants(model, profile, eps)
                out[name] = check_bump_subsolution(constants, model, profile).to_dict()
            elif name == "global":
                out[name] = check_global_supersolution(profile, model, eps).to_dict()
            elif name == "ordering":
                if result is None:
                    raise ConfigError("the ordering suite needs a simulation")
                constants = bump_constants(model, profile, eps)
                rep = check_ordering(result.snapshots, constants, profile, model, eps,
                                     allowance=cfg.certify["allowance"])
                out[name] = rep.to_dict()
        except AlleeFrontsError as exc:
            out[name] = {"pass": False, "error": str(exc)}
    out["pass"] = all(v["pass"] for v in out.values() if isinstance(v, dict))
    return out


def run_experiment(cfg: RunConfig, out_dir: str | Path | None = None) -> int:
    """Write the artifact set of one run; returns the process exit status."""
    if cfg.kind == "sweep":
        return sweep_phase_diagram(cfg.sweep["grid"], cfg, out_dir)
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    theory = theory_summary(cfg)

    suites = cfg.certify["suites"]
    if suites is None:
        suites = _auto_suites(theory)
    need_run = cfg.kind == "simulate" or "ordering" in suites
    result = None
    record: dict = {"kind": cfg.kind, "config": cfg.echo(), "theory": theory}
    if need_run:
        result = run(cfg.profile, cfg.model, cfg.solver, cfg.levels)
        (out / "levelsets.csv").write_text(trajectories_to_csv(result.trajectories.values()))
        snap = out / "snapshots.bin"
        snap.unlink(missing_ok=True)
        write_snapshots(snap, result.snapshots)
        record["run"] = {
            "dt": cfg.solver.dt, "steps": result.final.steps, "t_final": result.final.t,
            "final_nodes": result.final.n, "expansions": result.expansions,
            "kept_snapshots": len(result.snapshots), "invasion_speed": result.invasion_speed,
        }
        record["fits"] = _fits(result, cfg.levels)

    status = 0
    if cfg.kind == "certify":
        certs = run_certificates(cfg, theory, result)
        _write_json(out / "certificates.json", certs)
        record["certificates_pass"] = certs["pass"]
        status = 0 if certs["pass"] else 1
    record["exit_status"] = status
    _write_json(out / "run.json", record)
    return status


def _agree(theory: str, empirical: str) -> bool:
    return (theory, empirical) in {("acceleration", "accelerating"), ("no_acceleration", "linear")}


def _sweep_cell(flat: dict, alpha: float, beta: float, level: float, cell_dir: str) -> dict:
    row = {"alpha": alpha, "beta": beta}
    try:
        row["theory_regime"] = classify_regime(alpha, beta).regime
        cell = dict(flat)
        cell.update({"profile.alpha": alpha, "model.beta": beta, "levels": [level],
                     "kind": "simulate"})
        cfg = build_config(cell)
        result = run(cfg.profile, cfg.model, cfg.solver, (level,))
        Path(cell_dir).mkdir(parents=True, exist_ok=True)
        (Path(cell_dir) / "levelsets.csv").write_text(trajectories_to_csv(result.trajectories.values()))
        verdict, fit = detect_regime_empirical(result.trajectory(level))
        row.update(empirical_regime=verdict, fitted_exponent=fit.q, fit_quality=fit.r2_power)
    except (AlleeFrontsError, ValueError) as exc:
        row.update(empirical_regime="error", fitted_exponent=math.nan, fit_quality=math.nan,
                   error=str(exc))
        row.setdefault("theory_regime", "error")
    row["agree"] = _agree(row["theory_regime"], row["empirical_regime"])
    return row


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if not math.isfinite(v) else f"{v:.17g}"
    return str(v)


def sweep_phase_diagram(grid, base: RunConfig, out_dir: str | Path | None = None,
                        jobs: int | None = None) -> int:
    """One simulation per ``(alpha, beta)`` cell; writes ``phase_diagram.csv`` and ``summary.json``."""
    out = Path(out_dir if out_dir is not None else base.output)
    out.mkdir(parents=True, exist_ok=True)
    opts = base.sweep
    jobs = opts["jobs"] if jobs is None else jobs
    if base.profile.tail_kind != "algebraic":
        raise ConfigError("sweeps vary the algebraic tail exponent; profile.tail_kind must be algebraic")

    cells, excluded = [], []
    for alpha, beta in grid:
        alpha, beta = float(alpha), float(beta)
        if alpha > 0 and beta > 1 and abs(beta - (1 + 1 / alpha)) < opts["min_distance"]:
            excluded.append([alpha, beta])
        else:
            cells.append((alpha, beta))

    flat = {k: v for k, v in base.echo().items() if not k.startswith("sweep.")}
    args = [(flat, a, b, opts["level"], str(out / f"cell_{i:03d}")) for i, (a, b) in enumerate(cells)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, *zip(*args)))
    else:
        rows = [_sweep_cell(*a) for a in args]

    with open(out / "phase_diagram.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PHASE_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in PHASE_COLUMNS])

    agreement = sum(r["agree"] for r in rows) / len(rows) if rows else None
    ok = agreement is None or agreement >= opts["min_agreement"]
    summary = {
        "cells": len(rows), "agreement_rate": agreement, "min_agreement": opts["min_agreement"],
        "excluded_near_threshold": excluded, "min_distance": opts["min_distance"],
        "failures": [{"alpha": r["alpha"], "beta": r["beta"], "error": r["error"]}
                     for r in rows if "error" in r],
        "config": base.echo(), "pass": ok,
    }
    _write_json(out / "summary.json", summary)
    return 0 if ok else 1

