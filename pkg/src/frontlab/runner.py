"""Run experiment configs: dispatch to the PDE, reduced-model, pinning and
inverse pipelines and write CSV outputs plus a plain-text summary.

Output layout for a config named ``fig3`` run with ``out_root=out``::

    out/fig3/trajectory.csv
    out/fig3/summary.txt

Configs with panels get one subdirectory per panel.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cv, pde
from .config import ExperimentConfig, build_model, require_valid
from .defects import Gaussian, extent, left_level
from .errors import FrontlabError, RunError, UndecidedError
from .inverse import reconstruct, residual
from .io import fmt, write_atomic, write_csv
from .kinkfit import FrontTrajectory, KinkState, TrajectoryBuilder, Z_WINDOW, window_mse
from .pinning import PinningMonitor, analyze, detect_pinning, find_threshold


@dataclass
class RunResult:
    directory: Path
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


@contextmanager
def _stage(name):
    try:
        yield
    except RunError:
        raise
    except (FrontlabError, ArithmeticError, ValueError) as exc:
        raise RunError(name, exc) from exc


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.floating, np.integer)):
        return fmt(v)
    return str(v)


def write_summary(path, summary):
    text = "".join(f"{k} = {_fmt_value(v)}\n" for k, v in summary.items())
    return write_atomic(path, text)


def read_summary(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


# --- building blocks ---------------------------------------------------------


def _grid(cfg):
    return pde.Grid(cfg.num("grid.x_min"), cfg.num("grid.x_max"), cfg.integer("grid.n"))


def _solver(cfg):
    return pde.SolverConfig(
        t_max=cfg.num("solver.t_max"),
        dt_out=cfg.num("solver.dt_out"),
        rtol=cfg.num("solver.rtol"),
        atol=cfg.num("solver.atol"),
    )


def _init(cfg, defect):
    w = cfg.raw("init.w")
    w0 = pde.homogeneous_width(left_level(defect)) if w == "equilibrium" else float(w)
    return KinkState(cfg.num("init.x0"), w0)


def _monitor(cfg, defect):
    a = cfg.num("a")
    return PinningMonitor(pde.homogeneous_speed(left_level(defect), a), extent(defect),
                          getattr(defect, "center", 0.0))


@dataclass
class PdeRun:
    trajectory: FrontTrajectory
    last: pde.FieldState
    verdict: object
    max_window_mse: float
    stop_reason: str


def track(cfg, defect, snapshot_dir=None, stop_on_verdict=None):
    """Integrate the PDE for ``cfg``, fitting every output and watching for pinning."""
    grid = _grid(cfg)
    params = pde.ReactionParams(cfg.num("a"))
    init = _init(cfg, defect)
    u0 = pde.kink_state(grid, init.x0, init.w)
    mon = _monitor(cfg, defect)
    stop = cfg.flag("pinning.stop") if stop_on_verdict is None else stop_on_verdict
    every = cfg.integer("output.snapshot_every")
    builder = TrajectoryBuilder()
    worst_window = 0.0
    reason = "t_max"
    last = u0
    edge = grid.x_max - grid.h
    for i, state in enumerate(pde.march(u0, defect, params, _solver(cfg))):
        k, _ = builder.add(state)
        worst_window = max(worst_window, window_mse(state, k))
        last = state
        if snapshot_dir is not None and every > 0 and i % every == 0:
            pde.write_snapshot(state, snapshot_dir)
        mon.add(state.t, k.x0, k.w)
        if stop and mon.verdict is not None:
            reason = "verdict"
            break
        if k.x0 + Z_WINDOW * k.w > edge:
            reason = "boundary"
            break
    return PdeRun(builder.result(), last, mon.verdict, worst_window, reason)


def _verdict_fields(verdict, prefix=""):
    if verdict is None:
        return {f"{prefix}pinned": "undecided"}
    return {f"{prefix}pinned": bool(verdict.pinned), f"{prefix}t_decided": verdict.t_decided}


def _terminal(traj, prefix=""):
    speed = traj.speed
    return {
        f"{prefix}t_final": traj.t[-1],
        f"{prefix}x0_final": traj.x0[-1],
        f"{prefix}w_final": traj.w[-1],
        f"{prefix}speed_final": speed[-1] if speed.size else float("nan"),
    }


def _run_cv_traj(cfg, defect):
    model = build_model(cfg, defect)
    return cv.integrate_cv(model, _init(cfg, defect), cfg.num("a"), cfg.num("solver.t_max"),
                           cfg.num("solver.dt_out"))


def align_by_position(pde_traj, cv_traj):
    """Rows (x0, w_pde, w_cv, speed_pde, speed_cv) on the PDE positions.

    The reduced-model curves are interpolated in x0 over their monotone
    rising part; PDE samples outside that range are dropped.
    """
    x_cv = np.asarray(cv_traj.x0)
    keep = np.concatenate([[True], np.diff(x_cv) > 0])
    keep &= np.maximum.accumulate(x_cv) == x_cv
    xs = x_cv[keep]
    w_cv = np.interp(pde_traj.x0, xs, cv_traj.w[keep])
    sp_cv = np.interp(pde_traj.x0, xs, cv_traj.speed_column()[keep])
    inside = (pde_traj.x0 >= xs[0]) & (pde_traj.x0 <= xs[-1])
    rows = np.column_stack([pde_traj.x0, pde_traj.w, w_cv, pde_traj.speed_column(), sp_cv])
    return rows[inside]


def max_width_deviation(rows):
    """Largest |w_pde - w_cv| / w_pde over aligned rows."""
    if rows.size == 0:
        return float("nan")
    return float(np.max(np.abs(rows[:, 1] - rows[:, 2]) / rows[:, 1]))


# --- modes -------------------------------------------------------------------


def _mode_pde(cfg, out):
    defect = cfg.defect()
    snap = out / "snapshots" if cfg.integer("output.snapshot_every") > 0 else None
    with _stage("pde"):
        run = track(cfg, defect, snap)
    files = [run.trajectory.to_csv(out / "trajectory.csv")]
    summary = _terminal(run.trajectory)
    summary.update(_verdict_fields(run.verdict))
    summary["stop_reason"] = run.stop_reason
    summary["max_fit_error"] = float(np.max(run.trajectory.fit_error))
    summary["max_window_mse"] = run.max_window_mse
    return files, summary


def _mode_cv(cfg, out):
    defect = cfg.defect()
    with _stage("cv"):
        traj = _run_cv_traj(cfg, defect)
    files = [traj.to_csv(out / "trajectory.csv")]
    summary = _terminal(traj)
    try:
        summary.update(_verdict_fields(detect_pinning(
            traj, pde.homogeneous_speed(left_level(defect), cfg.num("a")), extent(defect),
            getattr(defect, "center", 0.0))))
    except UndecidedError:
        summary.update(_verdict_fields(None))
    return files, summary


def _mode_compare(cfg, out):
    defect = cfg.defect()
    with _stage("pde"):
        run = track(cfg, defect)
    with _stage("cv"):
        cv_traj = _run_cv_traj(cfg, defect)
    rows = align_by_position(run.trajectory, cv_traj)
    files = [
        run.trajectory.to_csv(out / "trajectory_pde.csv"),
        cv_traj.to_csv(out / "trajectory_cv.csv"),
        write_csv(out / "compare.csv", ["x0", "w_pde", "w_cv", "speed_pde", "speed_cv"], rows),
    ]
    summary = _terminal(run.trajectory, "pde_")
    summary.update(_verdict_fields(run.verdict, "pde_"))
    summary.update(_terminal(cv_traj, "cv_"))
    summary["aligned_rows"] = int(rows.shape[0])
    summary["max_width_deviation"] = max_width_deviation(rows)
    summary["max_fit_error"] = float(np.max(run.trajectory.fit_error))
    summary["max_window_mse"] = run.max_window_mse
    return files, summary


def make_probe(cfg):
    """amplitude -> PinningVerdict for the config's threshold parameter."""
    param = cfg.raw("threshold.param")
    engine = cfg.raw("threshold.engine")

    def probe(value):
        sub = cfg.with_overrides({param: repr(float(value))})
        defect = sub.defect()
        if engine == "pde":
            run = track(sub, defect, stop_on_verdict=True)
            probe.fit_errors[float(value)] = float(np.max(run.trajectory.fit_error))
            if run.verdict is None:
                raise UndecidedError(f"{param}={value}: undecided at t={run.trajectory.t[-1]:.6g}")
            return run.verdict
        traj = _run_cv_traj(sub, defect)
        probe.fit_errors[float(value)] = 0.0
        return detect_pinning(traj, pde.homogeneous_speed(left_level(defect), sub.num("a")),
                              extent(defect), getattr(defect, "center", 0.0))

    probe.fit_errors = {}  # max fit error of each probe, keyed by amplitude
    return probe


def _mode_threshold(cfg, out):
    log = []
    param = cfg.raw("threshold.param")
    probe = make_probe(cfg)
    with _stage("pinning-threshold"):
        thr = find_threshold(probe, cfg.num("threshold.lo"), cfg.num("threshold.hi"),
                             rtol=cfg.num("threshold.rtol"), log=log)
    rows = [(v, "true" if r.pinned else "false", r.x0_final, r.w_final, r.t_decided,
             probe.fit_errors.get(float(v))) for v, r in log]
    header = ["value", "pinned", "x0_final", "w_final", "t_decided", "max_fit_error"]
    files = [write_csv(out / "bisection.csv", header, rows)]
    summary = {"param": param, "threshold": thr, "probes": len(log)}
    defect = cfg.defect()
    a = cfg.num("a")
    if isinstance(defect, Gaussian) and param == "defect.s1":
        summary["beta_equivalent"] = thr * math.sqrt(2.0 * math.pi * defect.d)
    if param == "defect.beta":
        summary["beta_equivalent"] = thr
    if 0.0 < a < 0.5:
        ana = analyze(a, left_level(defect))
        summary["beta_c_analytic"] = ana.beta_c
        summary["x0_pin_analytic"] = ana.x0_pin
        summary["w_pin_analytic"] = ana.w_pin
    pinned = [r for _, r in log if r.pinned]
    if pinned:
        closest = min((v, r) for v, r in log if r.pinned)[1]
        summary["x0_pinned_nearest"] = closest.x0_final
        summary["w_pinned_nearest"] = closest.w_final
    return files, summary


def _mode_invert(cfg, out):
    defect = cfg.defect()
    with _stage("pde"):
        run = track(cfg, defect)
    smooth = cfg.integer("invert.smooth") or None
    with _stage("invert"):
        est = reconstruct(run.trajectory, cfg.num("a"), smooth_window=smooth, source_id=cfg.name)
        sup, l2 = residual(est, defect)
    files = [run.trajectory.to_csv(out / "trajectory.csv"), est.to_csv(out / "topography.csv", defect)]
    summary = _terminal(run.trajectory)
    summary.update({"residual_sup_rel": sup, "residual_l2_rel": l2, "monotone": est.monotone,
                    "samples": len(est), "max_fit_error": float(np.max(run.trajectory.fit_error))})
    return files, summary


def _mode_sources(cfg, out):
    a = cfg.num("a")
    grid = np.linspace(cfg.num("sources.lo"), cfg.num("sources.hi"), cfg.integer("sources.steps"))
    if cfg.raw("sources.kind") == "dirac":
        header = ["z", "R_minus_z", "R2_minus_z"]
        cols = [grid, cv.source_R(-grid, a), cv.source_R2(-grid, a)]
    else:
        header = ["y", "I1_minus_y", "I2_minus_y"]
        cols = [grid, cv.heaviside_source_1(-grid, a), cv.heaviside_source_2(-grid, a)]
    return [write_csv(out / "sources.csv", header, zip(*cols))], {"points": grid.size}


def _sweep_one(args):
    text, inner, out = args
    sub = ExperimentConfig.from_text(text).with_overrides({"mode": inner})
    files, summary = _MODES[inner](sub, Path(out))
    return summary


def _mode_sweep(cfg, out):
    param = cfg.raw("sweep.param")
    values = np.linspace(cfg.num("sweep.lo"), cfg.num("sweep.hi"), cfg.integer("sweep.steps"))
    inner = cfg.raw("sweep.mode")
    jobs = []
    for i, v in enumerate(values):
        sub = cfg.with_overrides({param: repr(float(v))})
        jobs.append((sub.to_text(), inner, str(out / f"value_{i:03d}")))
    workers = cfg.integer("sweep.workers")
    with _stage("sweep"):
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                summaries = list(pool.map(_sweep_one, jobs))  # map keeps parameter order
        else:
            summaries = [_sweep_one(j) for j in jobs]
    keys = sorted({k for s in summaries for k in s})
    rows = [[repr(float(v))] + [_fmt_value(s.get(k, "")) for k in keys] for v, s in zip(values, summaries)]
    files = [write_csv(out / "sweep.csv", [param] + keys, rows)]
    return files, {"param": param, "values": len(values)}


_MODES = {
    "pde": _mode_pde,
    "cv": _mode_cv,
    "compare": _mode_compare,
    "pinning-threshold": _mode_threshold,
    "invert": _mode_invert,
    "sources": _mode_sources,
    "sweep": _mode_sweep,
}


def apply_cli_overrides(cfg, n=None, t_max=None):
    over = {}
    if n is not None:
        over["grid.n"] = str(int(n))
    if t_max is not None:
        over["solver.t_max"] = repr(float(t_max))
    return cfg.with_overrides(over) if over else cfg


def run(cfg, out_root="out"):
    """Validate and execute ``cfg``; returns one ``RunResult`` per panel.

    Raises ``ConfigError`` before anything runs if the config is invalid and
    ``RunError`` (naming the failing stage) if a pipeline fails.
    """
    require_valid(cfg)
    results = []
    base = Path(out_root) / cfg.name
    for pid, sub in cfg.panels():
        out = base if pid is None else base / pid
        out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        files, summary = _MODES[sub.mode](sub, out)
        head = {"name": sub.name, "mode": sub.mode}
        if pid is not None:
            head["panel"] = pid
        head.update(summary)
        head["wall_time_s"] = round(time.perf_counter() - start, 3)
        files.append(write_summary(out / "summary.txt", head))
        results.append(RunResult(out, files, head))
    return results
