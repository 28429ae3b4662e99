"""Acceptance gate: every release-blocking behavior in one suite.

Each test prints exactly one line

    ACCEPTANCE <n> PASS/FAIL — detail

so the gate can be read off a pytest log directly (addopts -rP shows the
lines for passing tests too).  Expensive device runs are computed once
and shared: the thermodynamic high-pump point dominates the wall time
(tens of minutes at cutoff ~7400 on one core).
"""

import numpy as np
import pytest
import scipy.linalg

from classblaser.analytics import (class_a_like_threshold,
                                   class_b_threshold_estimate,
                                   numeric_threshold)
from classblaser.correlations import extrema_lag_analysis, find_extrema, g2_tau
from classblaser.integrate import IntegrationOptions, evolve, rk4_step, steady_state
from classblaser.model import LaserState, ModelParams, rhs_class_b
from classblaser.observables import observables_of
from classblaser.presets import get_preset, preset_options

SINGLE = get_preset("single-atom").params
NANO = get_preset("nanoscopic").params
MESO = get_preset("mesoscopic").params
THERMO = get_preset("thermodynamic").params

_CACHE = {}


def _once(key, fn):
    if key not in _CACHE:
        _CACHE[key] = fn()
    return _CACHE[key]


def _gate(n, fn):
    try:
        ok, detail = fn()
    except Exception as exc:
        print(f"ACCEPTANCE {n} FAIL — {type(exc).__name__}: {exc}", flush=True)
        raise
    print(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'} — {detail}", flush=True)
    assert ok, detail


def _g2(result):
    return observables_of(result.state, result.params).g2


def _mean(result):
    return observables_of(result.state, result.params).mean_n


def _scan(preset_name, params, pumps, **overrides):
    out = {}
    for lam in pumps:
        for model in ("classb", "classa"):
            opts = preset_options(preset_name, lam, model=model, **overrides)
            out[(lam, model)] = steady_state(params.with_pump(lam), opts)
    return out


def _single_scan():
    pumps = list(np.geomspace(0.1, 10.0, 5))
    return pumps, _scan("single-atom", SINGLE, pumps)


def _nano_scan():
    pumps = [0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0]
    return pumps, _scan("nanoscopic", NANO, pumps)


def _thermo_pair():
    lam0 = class_a_like_threshold(THERMO)
    lo_pump, hi_pump = 0.5 * lam0, 2.0 * lam0
    lo = steady_state(THERMO.with_pump(lo_pump),
                      preset_options("thermodynamic", lo_pump))
    # seeding from the adiabatic distribution skips the long switch-on
    # transient through the whole sub-peak ladder
    hi = steady_state(THERMO.with_pump(hi_pump),
                      preset_options("thermodynamic", hi_pump,
                                     initial="classa"))
    return lam0, lo, hi


def _trace(preset_name, params, pump, model="classb", tau_max=6.0, n_tau=601):
    pr = params.with_pump(pump)
    tau = np.linspace(0.0, tau_max, n_tau)
    opts = preset_options(preset_name, pump, model=model)
    ss = steady_state(pr, opts)
    return ss, g2_tau(pr, tau, opts, steady=ss)


def _meso_osc():
    ss_b, tr_b = _trace("mesoscopic", MESO, 0.15)
    ss_a, tr_a = _trace("mesoscopic", MESO, 0.15, model="classa")
    return ss_b, tr_b, tr_a


def _meso_lag():
    ss, tr = _trace("mesoscopic", MESO, 0.2)
    return ss, tr, extrema_lag_analysis(tr)


def _nano_lag():
    ss, tr = _trace("nanoscopic", NANO, 3.0)
    return ss, tr, extrema_lag_analysis(tr)


def test_acceptance_1_threshold_formulas():
    def body():
        lam_meso = class_a_like_threshold(MESO)
        lam_nano = class_a_like_threshold(NANO)
        e_meso = abs(lam_meso / 0.0536842 - 1.0)
        e_nano = abs(lam_nano / 1.5 - 1.0)
        ok = e_meso <= 1e-6 and e_nano <= 1e-6
        return ok, (f"lambda_th0 mesoscopic={lam_meso:.9f} (rel err "
                    f"{e_meso:.1e}), nanoscopic={lam_nano:.9f} (rel err "
                    f"{e_nano:.1e}); both within 1e-6")
    _gate(1, body)


def test_acceptance_2_perturbative_threshold():
    def body():
        report = class_b_threshold_estimate(MESO)
        err = abs(report.lambda_th1 / 0.0627756 - 1.0)
        ok = report.exists and err <= 1e-4
        return ok, (f"lambda_th1 mesoscopic={report.lambda_th1:.9f} using "
                    f"Re(xi_minus)={report.xi_used:.6e} (rel err {err:.1e}, "
                    f"bound 1e-4)")
    _gate(2, body)


def test_acceptance_3_numeric_threshold():
    def body():
        nt = numeric_threshold(MESO)
        err = abs(nt.lambda_th / 0.0647 - 1.0)
        ok = err <= 0.05
        return ok, (f"p0=p1 bisection gives lambda={nt.lambda_th:.6f} vs "
                    f"0.0647 ({100 * err:.2f}% off, bound 5%) in "
                    f"{len(nt.evaluations)} steady-state runs")
    _gate(3, body)


def test_acceptance_4_single_atom_antibunching():
    def body():
        pumps, scan = _once("single", _single_scan)
        g2_b = [_g2(scan[(lam, "classb")]) for lam in pumps]
        g2_a = [_g2(scan[(lam, "classa")]) for lam in pumps]
        ok = max(g2_b) < 0.3 and min(g2_a) > 1.0
        return ok, (f"pumps 0.1-10: g2(0) ladder model in "
                    f"[{min(g2_b):.4f}, {max(g2_b):.4f}] (all < 0.3), "
                    f"adiabatic reference in [{min(g2_a):.4f}, "
                    f"{max(g2_a):.4f}] (all > 1)")
    _gate(4, body)


def test_acceptance_5_thermodynamic_transition():
    def body():
        lam0, lo, hi = _once("thermo", _thermo_pair)
        g2_lo, g2_hi = _g2(lo), _g2(hi)
        growth = _mean(hi) / _mean(lo)
        ok = (lo.converged and hi.converged and g2_lo >= 1.8
              and g2_hi <= 1.1 and growth >= 100.0)
        return ok, (f"g2(0)={g2_lo:.5f} at 0.5*lambda_th0 (>= 1.8), "
                    f"{g2_hi:.5f} at 2*lambda_th0 (<= 1.1); <n> grows "
                    f"{growth:.0f}x (>= 100x), lambda_th0={lam0:.5f}")
    _gate(5, body)


def test_acceptance_6_nanoscopic_thresholdless():
    def body():
        pumps, scan = _once("nano", _nano_scan)
        g2_b = [_g2(scan[(lam, "classb")]) for lam in pumps]
        g2_a = [_g2(scan[(lam, "classa")]) for lam in pumps]
        steps = np.diff(g2_b)
        ok = bool((steps <= 1e-3).all()) and \
            all(abs(v - 1.1) <= 0.15 for v in g2_a)
        return ok, (f"pumps 0.3-5: ladder g2(0) {g2_b[0]:.4f} -> "
                    f"{g2_b[-1]:.4f}, max upward wiggle "
                    f"{max(steps.max(), 0.0):.1e} (<= 1e-3); adiabatic "
                    f"reference in [{min(g2_a):.3f}, {max(g2_a):.3f}] "
                    f"(1.1 +- 0.15)")
    _gate(6, body)


def test_acceptance_7_relaxation_oscillations():
    def body():
        _, tr_b, tr_a = _once("meso_osc", _meso_osc)
        turns_b = find_extrema(tr_b.g2, floor=1e-3)
        turns_a = find_extrema(tr_a.g2, floor=1e-4)
        ok = len(turns_b) >= 2 and len(turns_a) == 0
        return ok, (f"mesoscopic pump 0.15: ladder g2(tau) has "
                    f"{len(turns_b)} extrema with swing > 1e-3 (>= 2 "
                    f"required); adiabatic trace has {len(turns_a)} above "
                    f"the 1e-4 floor (0 required)")
    _gate(7, body)


def test_acceptance_8_classical_lag():
    def body():
        _, _, lag_m = _once("meso_lag", _meso_lag)
        _, _, lag_n = _once("nano_lag", _nano_lag)
        meso3 = lag_m.pa_offsets[:3]
        nano1 = lag_n.pa_offsets[0]
        ok = len(meso3) == 3 and max(meso3) < 0.2 and nano1 > 0.2
        return ok, (f"mesoscopic pump 0.2: |p_a - p_a_ss|/amplitude at the "
                    f"first three g2 extrema = "
                    f"{', '.join(f'{v:.4f}' for v in meso3)} (all < 0.2); "
                    f"nanoscopic pump 3 first extremum offset = "
                    f"{nano1:.3f} (> 0.2)")
    _gate(8, body)


# --- criterion 9 helpers: oracle pieces on a small N=1 system ----------

LIN = ModelParams(kappa=1.0, gamma_h=10.0, big_gamma=1.0, g=1.0,
                  n_atoms=1.0, lambda_a=0.7)


def _linear_matrix(params, n_cut):
    m = n_cut + 1
    a = np.empty((2 * m, 2 * m))
    for j in range(2 * m):
        v = np.zeros(2 * m)
        v[j] = 1.0
        s = LaserState(v[:m], v[m:], validate=False)
        d = rhs_class_b(s, params)
        a[:m, j] = d.d_rho_a
        a[m:, j] = d.d_p
    return a


def _rk4_slope():
    n_cut = 12
    a = _linear_matrix(LIN, n_cut)
    p = np.exp(-0.7 * np.arange(n_cut + 1.0))
    p /= p.sum()
    s = LaserState(0.4 * p, p)
    v0 = np.concatenate([s.rho_a, s.p])
    t_end = 0.5
    exact = scipy.linalg.expm(a * t_end) @ v0

    def global_err(h):
        opts = IntegrationOptions(h=h, t_max=t_end, cutoff=n_cut,
                                  cutoff_policy="fixed", clamp_step=False,
                                  tail_rungs=2, sample_interval=t_end,
                                  tol_ss=1e-300)
        res = evolve(s, LIN, opts)
        got = np.concatenate([res.final.rho_a, res.final.p])
        return np.max(np.abs(got - exact))

    return float(np.log2(global_err(0.02) / global_err(0.01)))


def _oracle_gap():
    n_cut = 30
    ns = scipy.linalg.null_space(_linear_matrix(LIN, n_cut), rcond=1e-10)
    x = ns[:, 0]
    x /= x[n_cut + 1:].sum()
    res = steady_state(LIN, IntegrationOptions(h=1e-3, cutoff=n_cut,
                                               cutoff_policy="fixed"))
    got = np.concatenate([res.state.rho_a, res.state.p])
    return float(np.max(np.abs(got - x)))


def _homogeneity_exact():
    rng = np.random.default_rng(7)
    p = rng.random(24)
    p /= p.sum()
    ra = np.minimum(rng.random(24) * p, p)
    one = rk4_step(LaserState(2.0 * ra, 2.0 * p, validate=False), LIN, 1e-3)
    two = rk4_step(LaserState(ra, p, validate=False), LIN, 1e-3)
    return bool(np.array_equal(one.rho_a, 2.0 * two.rho_a)
                and np.array_equal(one.p, 2.0 * two.p))


def test_acceptance_9_property_suite():
    def body():
        _, scan_s = _once("single", _single_scan)
        _, scan_n = _once("nano", _nano_scan)
        _, lo, hi = _once("thermo", _thermo_pair)
        ss_b15, tr_b15, tr_a15 = _once("meso_osc", _meso_osc)
        ss_m20, tr_m20, _ = _once("meso_lag", _meso_lag)
        ss_n30, tr_n30, _ = _once("nano_lag", _nano_lag)

        steadies = (list(scan_s.values()) + list(scan_n.values())
                    + [lo, hi, ss_b15, ss_m20, ss_n30])
        all_conv = all(r.converged for r in steadies)
        drift = max(r.trace_drift for r in steadies)
        traces = [tr_b15, tr_a15, tr_m20, tr_n30]
        drift = max(drift, max(t.trace_drift for t in traces))
        drift_ok = all_conv and drift < 1e-6

        dbs = [r.db_residual for r in steadies if r.model == "classb"]
        db = max(dbs)
        db_ok = db < 1e-4

        gap = _oracle_gap()
        gap_ok = gap < 1e-6

        ss1 = scan_s[(1.0, "classb")]
        pr1 = SINGLE.with_pump(1.0)
        opts1 = preset_options("single-atom", 1.0)
        fine = g2_tau(pr1, np.array([0.0, 1e-4]), opts1, steady=ss1)
        jump = abs(fine.g2[1] - fine.g2[0])
        jump_ok = jump < 1e-3

        relax = g2_tau(pr1, np.linspace(0.0, 4.0, 101), opts1, steady=ss1)
        tail = abs(relax.g2[-1] - 1.0)
        tail_ok = tail < 1e-2

        slope = _rk4_slope()
        slope_ok = abs(slope - 4.0) <= 0.2

        hom_ok = _homogeneity_exact()

        ok = (drift_ok and db_ok and gap_ok and jump_ok and tail_ok
              and slope_ok and hom_ok)
        return ok, (f"trace drift max {drift:.1e} over {len(steadies)} "
                    f"steady + {len(traces)} correlation runs (< 1e-6, all "
                    f"converged={all_conv}); detailed balance max {db:.1e} "
                    f"(< 1e-4); N=1 vs linear null-space {gap:.1e} "
                    f"(< 1e-6); g2(0+) jump {jump:.1e} (< 1e-3); "
                    f"|g2(inf)-1|={tail:.1e} (< 1e-2); RK4 order "
                    f"{slope:.2f} (4 +- 0.2); RHS homogeneity bit-exact="
                    f"{hom_ok}")
    _gate(9, body)
