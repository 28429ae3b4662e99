"""Command line front end.

Subcommands: sweep, g2tau, threshold, steady, presets.  Every run knob
can come from a flat ``key = value`` config file (--config) or from
flags; flags win.  Exit codes: 0 success, 1 bad configuration, 2
numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .analytics import class_b_threshold_estimate
from .errors import ConfigError, NoSignalError, NumericalError
from .model import ModelParams
from .observables import observables_of
from .integrate import IntegrationOptions, steady_state
from .presets import PRESETS, get_preset, preset_options
from .sweep import (CorrelationSpec, SweepSpec, run_correlation, run_sweep,
                    run_threshold, _fmt)

log = logging.getLogger("classblaser")

PARAM_KEYS = ("kappa", "gamma_h", "big_gamma", "g", "n_atoms")
FLOAT_KEYS = PARAM_KEYS + ("lambda_a", "step", "tmax", "tau_max", "tol",
                           "tail_threshold")
INT_KEYS = ("workers", "cutoff", "cutoff_max", "tau_points")
STR_KEYS = ("preset", "model", "out", "pumps", "snapshots", "bracket",
            "initial", "cutoff_policy")
BOOL_KEYS = ("numeric",)
ALL_KEYS = FLOAT_KEYS + INT_KEYS + STR_KEYS + BOOL_KEYS


def parse_config_file(path) -> dict:
    """Flat ``key = value`` file; '#' starts a comment; keys as in flags."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in ALL_KEYS:
            raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
        out[key] = val
    return out


def parse_pumps(text: str):
    """Comma list, or lin:lo:hi:n / log:lo:hi:n grid expressions."""
    text = text.strip()
    try:
        if text.startswith(("lin:", "log:")):
            kind, lo, hi, num = text.split(":")
            lo, hi, num = float(lo), float(hi), int(num)
            if num < 1 or hi < lo:
                raise ValueError
            if kind == "lin":
                return [float(x) for x in np.linspace(lo, hi, num)]
            if lo <= 0:
                raise ConfigError("log grids need lo > 0")
            return [float(x) for x in np.geomspace(lo, hi, num)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"bad pump grid {text!r}; use a comma list or "
                          "lin:lo:hi:n / log:lo:hi:n") from None


def _parse_models(text: str):
    if text == "both":
        return ("classb", "classa")
    if text in ("classb", "classa"):
        return (text,)
    raise ConfigError(f"model must be classb, classa or both, not {text!r}")


def _coerce(key: str, val):
    if isinstance(val, str):
        try:
            if key in FLOAT_KEYS:
                return float(val)
            if key in INT_KEYS:
                return int(val)
            if key in BOOL_KEYS:
                if val.lower() in ("1", "true", "yes", "on"):
                    return True
                if val.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError
        except ValueError:
            raise ConfigError(f"bad value {val!r} for {key}") from None
    return val


def _merged_settings(args) -> dict:
    cfg = parse_config_file(args.config) if args.config else {}
    for key in ALL_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    return {k: _coerce(k, v) for k, v in cfg.items()}


def _resolve_params(cfg) -> ModelParams:
    given = {k: cfg[k] for k in PARAM_KEYS if k in cfg}
    if "preset" in cfg:
        base = get_preset(cfg["preset"]).params
        return ModelParams(**{k: given.get(k, getattr(base, k))
                              for k in PARAM_KEYS})
    missing = [k for k in PARAM_KEYS if k not in given]
    if missing:
        raise ConfigError("without --preset, all device rates are required; "
                          f"missing: {', '.join(missing)}")
    return ModelParams(**given)


def _integration_overrides(cfg) -> dict:
    over = {}
    if "step" in cfg:
        over["h"] = cfg["step"]
    if "tmax" in cfg:
        over["t_max"] = cfg["tmax"]
    for key in ("cutoff", "cutoff_max", "tail_threshold", "initial",
                "cutoff_policy"):
        if key in cfg:
            over[key] = cfg[key]
    return over


def _add_common(sub, pumps_help):
    sub.add_argument("--config", help="key = value file; flags override it")
    sub.add_argument("--preset", choices=sorted(PRESETS),
                     help="named device regime")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--workers", type=int, help="thread pool size")
    sub.add_argument("--model", choices=("classb", "classa", "both"))
    sub.add_argument("--pumps", help=pumps_help)
    for key in PARAM_KEYS:
        sub.add_argument(f"--{key.replace('_', '-')}", type=float,
                         dest=key, help=f"override {key}")
    sub.add_argument("--lambda-a", type=float, dest="lambda_a",
                     help="single pump value")
    sub.add_argument("--cutoff", type=int, help="starting Fock truncation")
    sub.add_argument("--cutoff-max", type=int, dest="cutoff_max")
    sub.add_argument("--step", type=float, help="RK4 step")
    sub.add_argument("--tmax", type=float, help="integration horizon")
    sub.add_argument("--initial", choices=("vacuum", "classa"))
    sub.add_argument("--cutoff-policy", choices=("auto", "fixed"),
                     dest="cutoff_policy")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="classblaser",
        description="Class-B laser simulator on the truncated Fock ladder")
    sp = ap.add_subparsers(dest="cmd", required=True)

    sw = sp.add_parser("sweep", help="steady-state observables over a pump grid")
    _add_common(sw, "comma list or lin:lo:hi:n / log:lo:hi:n")
    sw.add_argument("--snapshots",
                    help="comma list of grid pumps whose p_n gets dumped")

    g2 = sp.add_parser("g2tau", help="correlation traces g2(tau) and p_a(tau)")
    _add_common(g2, "comma list of pumps, one trace each")
    g2.add_argument("--tau-max", type=float, dest="tau_max")
    g2.add_argument("--tau-points", type=int, dest="tau_points")

    th = sp.add_parser("threshold", help="threshold report (closed forms "
                                         "plus optional bisection)")
    _add_common(th, "(unused)")
    th.add_argument("--numeric", action="store_const", const=True,
                    help="also bisect for the p0 = p1 crossing")
    th.add_argument("--bracket", help="lo:hi pump bracket for the bisection")
    th.add_argument("--tol", type=float, help="bisection width tolerance")

    st = sp.add_parser("steady", help="single steady state, report to stdout")
    _add_common(st, "(single pump; use --lambda-a)")

    sp.add_parser("presets", help="list the named device regimes")
    return ap


def _cmd_sweep(cfg) -> int:
    params = _resolve_params(cfg)
    if "pumps" not in cfg:
        raise ConfigError("sweep needs --pumps")
    pumps = parse_pumps(cfg["pumps"])
    spec = SweepSpec(
        params=params, pumps=pumps,
        models=_parse_models(cfg.get("model", "classb")),
        out_dir=Path(cfg.get("out", "sweep-out")),
        workers=cfg.get("workers", 0), preset=cfg.get("preset"),
        snapshot_pumps=parse_pumps(cfg["snapshots"]) if "snapshots" in cfg else [],
        overrides=_integration_overrides(cfg))
    manifest = run_sweep(spec)
    print(f"wrote {len(manifest.files)} files to {spec.out_dir}")
    return 0


def _cmd_g2tau(cfg) -> int:
    params = _resolve_params(cfg)
    if "pumps" in cfg:
        pumps = parse_pumps(cfg["pumps"])
    elif "lambda_a" in cfg:
        pumps = [cfg["lambda_a"]]
    else:
        raise ConfigError("g2tau needs --pumps or --lambda-a")
    spec = CorrelationSpec(
        params=params, pumps=pumps,
        models=_parse_models(cfg.get("model", "classb")),
        tau_max=cfg.get("tau_max", 6.0),
        tau_points=cfg.get("tau_points", 600),
        out_dir=Path(cfg.get("out", "g2tau-out")),
        workers=cfg.get("workers", 0), preset=cfg.get("preset"),
        overrides=_integration_overrides(cfg))
    manifest = run_correlation(spec)
    print(f"wrote {len(manifest.files)} files to {spec.out_dir}")
    return 0


def _parse_bracket(text: str):
    try:
        lo, hi = (float(x) for x in text.split(":"))
        return lo, hi
    except ValueError:
        raise ConfigError(f"bad bracket {text!r}; use lo:hi") from None


def _cmd_threshold(cfg) -> int:
    params = _resolve_params(cfg)
    manifest = run_threshold(
        params, out_dir=Path(cfg.get("out", "threshold-out")),
        preset=cfg.get("preset"), numeric=bool(cfg.get("numeric", False)),
        bracket=_parse_bracket(cfg["bracket"]) if "bracket" in cfg else None,
        tol=cfg.get("tol"), overrides=_integration_overrides(cfg))
    report = (manifest.out_dir / "threshold.txt").read_text(encoding="utf-8")
    print(report, end="")
    return 0


def _cmd_steady(cfg) -> int:
    params = _resolve_params(cfg)
    if "lambda_a" not in cfg:
        raise ConfigError("steady needs --lambda-a")
    pump = cfg["lambda_a"]
    over = _integration_overrides(cfg)
    model = cfg.get("model", "classb")
    if model == "both":
        raise ConfigError("steady runs one model; pick classb or classa")
    over["model"] = model
    if "preset" in cfg:
        options = preset_options(cfg["preset"], pump, **over)
    else:
        options = IntegrationOptions(**over)
    res = steady_state(params.with_pump(pump), options)
    obs = observables_of(res.state, res.params)
    print(f"lambda_a = {_fmt(pump)}")
    print(f"model = {model}")
    print(f"converged = {_fmt(res.converged)}")
    print(f"mean_n = {_fmt(obs.mean_n)}")
    print(f"g2_zero = {_fmt(obs.g2) or 'undefined'}")
    print(f"p0 = {_fmt(obs.p0)}")
    print(f"p1 = {_fmt(obs.p1)}")
    print(f"upper_occupation = {_fmt(obs.upper_occupation)}")
    print(f"max_residual = {_fmt(res.max_residual)}")
    print(f"trace_drift = {_fmt(res.trace_drift)}")
    print(f"db_residual = {_fmt(res.db_residual)}")
    print(f"cutoff = {res.cutoff}")
    return 0


def _cmd_presets() -> int:
    for name in sorted(PRESETS):
        pr = PRESETS[name]
        p = pr.params
        report = class_b_threshold_estimate(p)
        lam0 = _fmt(report.lambda_th0) if report.exists else "none"
        print(f"{name}: kappa={_fmt(p.kappa)} gamma_h={_fmt(p.gamma_h)} "
              f"big_gamma={_fmt(p.big_gamma)} g={_fmt(p.g)} "
              f"n_atoms={_fmt(p.n_atoms)} h={_fmt(pr.h)} "
              f"cutoffs={pr.cutoff_low}/{pr.cutoff_high} "
              f"lambda_th0={lam0}  ({pr.note})")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "presets":
            return _cmd_presets()
        cfg = _merged_settings(args)
        if args.cmd == "sweep":
            return _cmd_sweep(cfg)
        if args.cmd == "g2tau":
            return _cmd_g2tau(cfg)
        if args.cmd == "threshold":
            return _cmd_threshold(cfg)
        if args.cmd == "steady":
            return _cmd_steady(cfg)
        raise ConfigError(f"unknown command {args.cmd!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, NoSignalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
