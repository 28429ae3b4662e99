"""Batch runs over pump grids: steady sweeps, g2 traces, threshold reports.

Outputs are UTF-8 CSV files with a single '#'-prefixed metadata line
followed by a column header.  Floats are written with repr (shortest
round-trip), so rerunning an identical spec reproduces the bytes
exactly; undefined g2 values appear as empty fields, never as NaN.
Each run directory gets a ``run_manifest.txt`` listing every emitted
file with its SHA-256, the resolved configuration and per-point
diagnostics.

Points are independent, so they run on a thread pool (the compiled
kernels release the GIL); rows are assembled in grid order afterwards,
which keeps the output bytes independent of the worker count.
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import class_b_threshold_estimate, numeric_threshold
from .correlations import extrema_lag_analysis, g2_tau
from .errors import ConfigError
from .integrate import IntegrationOptions, steady_state
from .model import ModelParams, derived_params
from .observables import observables_of
from .presets import get_preset, preset_options

log = logging.getLogger("classblaser")

MODEL_CHOICES = ("classb", "classa")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, meta: str, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# {meta}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _params_meta(params: ModelParams, extra: str = "") -> str:
    s = (f"classblaser {__version__} kappa={_fmt(params.kappa)} "
         f"gamma_h={_fmt(params.gamma_h)} big_gamma={_fmt(params.big_gamma)} "
         f"g={_fmt(params.g)} n_atoms={_fmt(params.n_atoms)}")
    return f"{s} {extra}".rstrip()


@dataclass
class SweepSpec:
    """One steady-state sweep: a pump grid crossed with model kinds."""

    params: ModelParams
    pumps: list
    models: tuple = ("classb",)
    out_dir: Path = Path(".")
    workers: int = 0                  # 0 means use all available cores
    preset: str | None = None         # enables pump-dependent cutoffs
    snapshot_pumps: list = field(default_factory=list)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.pumps:
            raise ConfigError("pump grid must be nonempty")
        if any((not np.isfinite(x)) or x < 0 for x in self.pumps):
            raise ConfigError("pumps must be finite and >= 0")
        bad = set(self.models) - set(MODEL_CHOICES)
        if bad or not self.models:
            raise ConfigError(f"models must be a nonempty subset of {MODEL_CHOICES}")
        for s in self.snapshot_pumps:
            if not any(_close(s, p) for p in self.pumps):
                raise ConfigError(f"snapshot pump {s!r} is not on the grid")

    def options_for(self, pump: float, model: str) -> IntegrationOptions:
        over = dict(self.overrides)
        over["model"] = model
        if self.preset is not None:
            return preset_options(self.preset, pump, **over)
        return IntegrationOptions(**over)


def _close(a, b) -> bool:
    return abs(a - b) <= 1e-12 * max(abs(a), abs(b), 1.0)


def _n_workers(requested: int) -> int:
    if requested and requested > 0:
        return requested
    return os.cpu_count() or 1


@dataclass
class Manifest:
    """What a run produced; written as run_manifest.txt."""

    command: str
    settings: list          # (key, value) pairs in echo order
    point_lines: list       # one diagnostic line per computed point
    files: list             # Path objects, in creation order
    out_dir: Path

    def write(self) -> Path:
        path = self.out_dir / "run_manifest.txt"
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("# classblaser run manifest\n")
            f.write(f"command = {self.command}\n")
            f.write(f"version = {__version__}\n")
            f.write(f"created_utc = {stamp}\n")
            for key, val in self.settings:
                f.write(f"{key} = {val}\n")
            for line in self.point_lines:
                f.write(f"point {line}\n")
            for fp in self.files:
                f.write(f"file {fp.name} sha256 {_sha256(fp)} "
                        f"bytes {fp.stat().st_size}\n")
        return path


def _run_point(spec: SweepSpec, pump: float, model: str):
    t0 = time.perf_counter()
    res = steady_state(spec.params.with_pump(pump), spec.options_for(pump, model))
    wall = time.perf_counter() - t0
    obs = observables_of(res.state, res.params)
    log.info("pump=%g model=%s mean_n=%.6g converged=%s residual=%.2e "
             "cutoff=%d wall=%.1fs", pump, model, obs.mean_n, res.converged,
             res.max_residual, res.cutoff, wall)
    return res, obs, wall


def run_sweep(spec: SweepSpec) -> Manifest:
    """Execute the sweep and write sweep.csv plus optional snapshots."""
    spec.out_dir = Path(spec.out_dir)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(i, pump, model)
            for i, pump in enumerate(spec.pumps) for model in spec.models]
    results = {}
    with ThreadPoolExecutor(max_workers=_n_workers(spec.workers)) as pool:
        futs = {(i, model): pool.submit(_run_point, spec, pump, model)
                for i, pump, model in jobs}
        for key, fut in futs.items():
            results[key] = fut.result()

    columns = ("lambda_a", "model", "mean_n", "g2_zero", "p0", "p1", "beta",
               "upper_occupation", "converged", "max_residual",
               "trace_drift", "cutoff")
    rows, points, files = [], [], []
    for i, pump in enumerate(spec.pumps):
        for model in spec.models:
            res, obs, wall = results[(i, model)]
            beta = derived_params(res.params).beta
            rows.append((pump, model, obs.mean_n, obs.g2, obs.p0, obs.p1,
                         beta, obs.upper_occupation, res.converged,
                         res.max_residual, res.trace_drift, res.cutoff))
            points.append(f"pump={_fmt(pump)} model={model} "
                          f"converged={_fmt(res.converged)} "
                          f"residual={res.max_residual:.3e} "
                          f"trace_drift={res.trace_drift:.3e} "
                          f"cutoff={res.cutoff} wall_s={wall:.2f}")

    sweep_path = spec.out_dir / "sweep.csv"
    meta = _params_meta(spec.params,
                        f"command=sweep preset={spec.preset or '-'} "
                        f"models={'+'.join(spec.models)}")
    _write_csv(sweep_path, meta, columns, rows)
    files.append(sweep_path)

    for snap in spec.snapshot_pumps:
        i = next(k for k, p in enumerate(spec.pumps) if _close(snap, p))
        for model in spec.models:
            res, _, _ = results[(i, model)]
            path = spec.out_dir / f"pn_{model}_{i:02d}.csv"
            _write_csv(path,
                       _params_meta(res.params,
                                    f"command=snapshot lambda_a={_fmt(spec.pumps[i])} "
                                    f"model={model}"),
                       ("n", "p_n", "rho_a_n"),
                       [(n, res.state.p[n], res.state.rho_a[n])
                        for n in range(res.state.p.size)])
            files.append(path)

    settings = _spec_settings(spec)
    manifest = Manifest(command="sweep", settings=settings,
                        point_lines=points, files=files, out_dir=spec.out_dir)
    manifest.write()
    return manifest


def _spec_settings(spec) -> list:
    out = [("preset", spec.preset or "-"),
           ("kappa", _fmt(spec.params.kappa)),
           ("gamma_h", _fmt(spec.params.gamma_h)),
           ("big_gamma", _fmt(spec.params.big_gamma)),
           ("g", _fmt(spec.params.g)),
           ("n_atoms", _fmt(spec.params.n_atoms)),
           ("models", "+".join(spec.models)),
           ("pumps", ",".join(_fmt(p) for p in spec.pumps)),
           ("workers", str(_n_workers(spec.workers)))]
    for key, val in sorted(spec.overrides.items()):
        out.append((key, _fmt(val) if isinstance(val, (int, float, bool))
                    else str(val)))
    return out


@dataclass
class CorrelationSpec:
    """g2(tau) traces for chosen pumps, plus extremum/lag reports."""

    params: ModelParams
    pumps: list
    models: tuple = ("classb",)
    tau_max: float = 6.0
    tau_points: int = 600
    out_dir: Path = Path(".")
    workers: int = 0
    preset: str | None = None
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.pumps or any(p <= 0 for p in self.pumps):
            raise ConfigError("g2 traces need at least one positive pump")
        if self.tau_max <= 0 or self.tau_points < 2:
            raise ConfigError("need tau_max > 0 and tau_points >= 2")
        bad = set(self.models) - set(MODEL_CHOICES)
        if bad or not self.models:
            raise ConfigError(f"models must be a nonempty subset of {MODEL_CHOICES}")

    def options_for(self, pump: float, model: str) -> IntegrationOptions:
        over = dict(self.overrides)
        over["model"] = model
        if self.preset is not None:
            return preset_options(self.preset, pump, **over)
        return IntegrationOptions(**over)


def _run_trace(spec: CorrelationSpec, pump: float, model: str):
    tau_grid = np.linspace(0.0, spec.tau_max, spec.tau_points)
    t0 = time.perf_counter()
    trace = g2_tau(spec.params.with_pump(pump), tau_grid,
                   spec.options_for(pump, model))
    wall = time.perf_counter() - t0
    log.info("g2tau pump=%g model=%s g2(0)=%.4f mean_n=%.6g wall=%.1fs",
             pump, model, trace.g2[0], trace.mean_n_ss, wall)
    return trace, wall


def run_correlation(spec: CorrelationSpec) -> Manifest:
    """Compute the traces and write one CSV per (pump, model)."""
    spec.out_dir = Path(spec.out_dir)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(i, pump, model)
            for i, pump in enumerate(spec.pumps) for model in spec.models]
    results = {}
    with ThreadPoolExecutor(max_workers=_n_workers(spec.workers)) as pool:
        futs = {(i, model): pool.submit(_run_trace, spec, pump, model)
                for i, pump, model in jobs}
        for key, fut in futs.items():
            results[key] = fut.result()

    files, points = [], []
    for i, pump in enumerate(spec.pumps):
        for model in spec.models:
            trace, wall = results[(i, model)]
            path = spec.out_dir / f"g2tau_{model}_{i:02d}.csv"
            meta = _params_meta(
                spec.params.with_pump(pump),
                f"command=g2tau lambda_a={_fmt(pump)} model={model} "
                f"mean_n_ss={_fmt(trace.mean_n_ss)} pa_ss={_fmt(trace.pa_ss)} "
                f"g2_zero={_fmt(trace.g2_zero_ss)}")
            _write_csv(path, meta, ("tau", "g2", "p_a"),
                       list(zip(trace.tau, trace.g2, trace.p_a)))
            files.append(path)
            points.append(f"pump={_fmt(pump)} model={model} "
                          f"g2_zero={_fmt(trace.g2_zero_ss)} "
                          f"trace_drift={trace.trace_drift:.3e} "
                          f"wall_s={wall:.2f}")
            if model == "classb":
                files.append(_write_lag_report(spec.out_dir, i, trace))

    settings = [("preset", spec.preset or "-"),
                ("models", "+".join(spec.models)),
                ("pumps", ",".join(_fmt(p) for p in spec.pumps)),
                ("tau_max", _fmt(spec.tau_max)),
                ("tau_points", str(spec.tau_points)),
                ("workers", str(_n_workers(spec.workers)))]
    manifest = Manifest(command="g2tau", settings=settings,
                        point_lines=points, files=files, out_dir=spec.out_dir)
    manifest.write()
    return manifest


def _write_lag_report(out_dir: Path, idx: int, trace) -> Path:
    report = extrema_lag_analysis(trace)
    path = out_dir / f"lag_classb_{idx:02d}.txt"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# g2(tau) extrema and p_a lag, lambda_a={_fmt(trace.pump)}\n")
        f.write(f"pa_ss = {_fmt(trace.pa_ss)}\n")
        f.write(f"pa_amplitude = {_fmt(report.pa_amplitude)}\n")
        f.write(f"extrema = {len(report.extrema)}\n")
        for ext, off in zip(report.extrema, report.pa_offsets):
            f.write(f"extremum kind={ext.kind} tau={_fmt(ext.tau)} "
                    f"g2={_fmt(ext.value)} swing={_fmt(ext.swing)} "
                    f"pa_offset={_fmt(off)}\n")
    return path


def run_threshold(params: ModelParams, out_dir, preset: str | None = None,
                  numeric: bool = False, bracket=None, tol=None,
                  overrides: dict | None = None) -> Manifest:
    """Write a threshold report; optionally locate it numerically too."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = class_b_threshold_estimate(params)
    lam_num = None
    n_evals = 0
    if numeric:
        if not report.exists:
            raise ConfigError("cannot locate a threshold numerically: "
                              "these parameters have none")
        over = dict(overrides or {})
        over.setdefault("initial", "classa")
        if preset is not None:
            options = preset_options(preset, report.lambda_th0, **over)
        else:
            options = IntegrationOptions(**over)
        num = numeric_threshold(params, bracket=bracket, tol=tol,
                                options=options)
        lam_num = num.lambda_th
        n_evals = len(num.evaluations)

    path = out_dir / "threshold.txt"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# {_params_meta(params, 'command=threshold')}\n")
        f.write(f"exists = {_fmt(report.exists)}\n")
        if report.exists:
            f.write(f"lambda_th0 = {_fmt(report.lambda_th0)}\n")
            f.write(f"xi_minus_re = {_fmt(report.xi_minus.real)}\n")
            f.write(f"xi_minus_im = {_fmt(report.xi_minus.imag)}\n")
            f.write(f"xi_used = {_fmt(report.xi_used)}\n")
            f.write(f"delta1 = {_fmt(report.delta1)}\n")
            f.write(f"lambda_th1 = {_fmt(report.lambda_th1)}\n")
        else:
            f.write("note = no lasing threshold: n_atoms does not exceed "
                    "the saturated inversion\n")
        if lam_num is not None:
            f.write(f"lambda_numeric = {_fmt(lam_num)}\n")
            f.write(f"numeric_evaluations = {n_evals}\n")

    settings = [("preset", preset or "-"), ("numeric", _fmt(numeric))]
    manifest = Manifest(command="threshold", settings=settings,
                        point_lines=[], files=[path], out_dir=out_dir)
    manifest.write()
    return manifest
