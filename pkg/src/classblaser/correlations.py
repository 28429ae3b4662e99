"""Delayed second-order coherence g2(tau) and what it reveals about atoms.

The two-time intensity correlation is computed with the one-sided
conditional state theta(tau): take the converged steady state, apply a
photon detection (annihilate, then normal-order), and propagate the
result forward with the same equations of motion as the state itself.
On the ladder the detection turns into an index shift,

    theta_p[n](0) = (n+1) p_ss[n+1]
    theta_a[n](0) = (n+1) rho_a_ss[n+1]

whose trace is the steady mean photon number <n>.  Both ladder flows are
degree-1 homogeneous in (theta_a, theta_p), so the unnormalized pair can
be evolved directly; then

    g2(tau) = sum_n n theta_p[n](tau) / <n>^2
    p_a(tau) = sum_n theta_a[n](tau) / <n>

where p_a(tau) is the probability that one given atom is excited at
delay tau after a photon detection.  At tau=0 these reduce to the
equal-time g2 and to the detection-conditioned inversion; for tau -> inf
theta relaxes back onto the steady ray and g2 -> 1.

Class-B lasers ring: g2(tau) oscillates at the relaxation-oscillation
frequency, and p_a oscillates a quarter period out of phase (the tangent
phase of the damped cosine).  :func:`extrema_lag_analysis` quantifies
this by locating the interior extrema of g2 and measuring, at each, the
distance of p_a from its steady value in units of the p_a oscillation
amplitude (the excursion at the turning points of p_a, which excludes
the initial monotone recovery from the detection).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoSignalError
from .integrate import IntegrationOptions, SteadyStateResult, _Ladder, steady_state
from .model import LaserState
from .observables import NO_SIGNAL_FLOOR, g2_zero, mean_photon_number, upper_occupation


@dataclass
class ThetaState:
    """Unnormalized detection-conditioned ladder pair; trace is <n>_ss."""

    theta_a: np.ndarray
    theta_p: np.ndarray

    @property
    def n_cut(self) -> int:
        return self.theta_p.size - 1

    @property
    def trace(self) -> float:
        return float(self.theta_p.sum())


def make_theta_initial(ss: SteadyStateResult | LaserState) -> ThetaState:
    """Detection-shifted initial condition from a converged steady state."""
    state = ss.state if isinstance(ss, SteadyStateResult) else ss
    p, rho_a = state.p, state.rho_a
    n1 = np.arange(1, p.size, dtype=np.float64)
    theta_p = np.zeros_like(p)
    theta_a = np.zeros_like(rho_a)
    theta_p[:-1] = n1 * p[1:]
    theta_a[:-1] = n1 * rho_a[1:]
    if theta_p.sum() <= NO_SIGNAL_FLOOR:
        raise NoSignalError("no photons in the steady state; "
                            "g2(tau) is undefined")
    return ThetaState(theta_a=theta_a, theta_p=theta_p)


@dataclass
class CorrelationTrace:
    """g2(tau) and the detection-conditioned atom occupation p_a(tau).

    ``tau`` holds the actually realized delays (integer multiples of the
    effective step closest to the requested grid).
    """

    model: str
    pump: float
    tau: np.ndarray
    g2: np.ndarray
    p_a: np.ndarray
    mean_n_ss: float
    pa_ss: float
    g2_zero_ss: float
    trace_drift: float


def g2_tau(params, tau_grid, options: IntegrationOptions | None = None,
           steady: SteadyStateResult | None = None) -> CorrelationTrace:
    """Correlation trace on the given delay grid (ascending, from >= 0).

    Computes (or reuses) the steady state, builds the detection-shifted
    theta pair and propagates it with the flow selected by
    ``options.model``, sampling at each grid point.
    """
    options = options or IntegrationOptions()
    tau_grid = np.asarray(tau_grid, dtype=np.float64)
    if tau_grid.ndim != 1 or tau_grid.size == 0:
        raise ConfigError("tau_grid must be a nonempty 1-d array")
    if tau_grid[0] < 0 or np.any(np.diff(tau_grid) <= 0):
        raise ConfigError("tau_grid must be ascending and nonnegative")

    ss = steady if steady is not None else steady_state(params, options)
    mean_ss = mean_photon_number(ss.state.p)
    if mean_ss <= NO_SIGNAL_FLOOR:
        raise NoSignalError(f"mean photon number {mean_ss:.3e} at pump "
                            f"{params.lambda_a:.6g}; g2(tau) is undefined")
    theta = make_theta_initial(ss)

    eng = _Ladder(params, options, theta.theta_a, theta.theta_p)
    inv_mean = 1.0 / mean_ss
    g2 = np.empty(tau_grid.size)
    p_a = np.empty(tau_grid.size)
    tau_act = np.empty(tau_grid.size)
    for i, target in enumerate(tau_grid):
        eng.advance_to(target)
        n = np.arange(eng.p.size, dtype=np.float64)
        g2[i] = float(n @ eng.p) * inv_mean * inv_mean
        if options.model == "classa":
            p_a[i] = float(eng.adia @ eng.p) * inv_mean
        else:
            p_a[i] = float(eng.rho_a.sum()) * inv_mean
        tau_act[i] = eng.t

    return CorrelationTrace(
        model=options.model, pump=params.lambda_a, tau=tau_act, g2=g2,
        p_a=p_a, mean_n_ss=mean_ss, pa_ss=upper_occupation(ss.state.rho_a),
        g2_zero_ss=g2_zero(ss.state.p), trace_drift=eng.trace_drift())


def conditional_upper_occupation(trace: CorrelationTrace):
    """(tau, p_a(tau), steady p_a) from a computed trace."""
    return trace.tau, trace.p_a, trace.pa_ss


@dataclass(frozen=True)
class Extremum:
    """One interior turning point of a sampled curve."""

    index: int
    tau: float
    value: float
    kind: str      # "max" or "min"
    swing: float   # |value - previous pivot value|


def find_extrema(y, floor: float = 1e-4):
    """Interior extrema of a sampled curve, ignoring wiggles below floor.

    A turning point is confirmed only after the curve has moved away from
    it by more than ``floor`` (hysteresis), so flat tails and round-off
    ripple produce nothing.
    """
    y = np.asarray(y, dtype=np.float64)
    out = []
    anchor = y[0]
    anchor_i = 0
    pivot = y[0]
    direction = 0
    for i in range(1, y.size):
        v = y[i]
        if direction == 0:
            if v > anchor + floor:
                direction = 1
            elif v < anchor - floor:
                direction = -1
            # track the most extreme point seen so far in both senses
            if (v > anchor and direction >= 0) or (v < anchor and direction <= 0):
                anchor, anchor_i = v, i
        elif direction == 1:
            if v > anchor:
                anchor, anchor_i = v, i
            elif v < anchor - floor:
                if anchor_i > 0:
                    out.append((anchor_i, "max", abs(anchor - pivot)))
                pivot = anchor
                anchor, anchor_i = v, i
                direction = -1
        else:
            if v < anchor:
                anchor, anchor_i = v, i
            elif v > anchor + floor:
                if anchor_i > 0:
                    out.append((anchor_i, "min", abs(anchor - pivot)))
                pivot = anchor
                anchor, anchor_i = v, i
                direction = 1
    return out


@dataclass
class LagReport:
    """Extrema of g2(tau) and the p_a phase offset at each of them.

    ``pa_amplitude`` is the oscillation amplitude of p_a: the largest
    excursion from the steady value measured at the interior extrema of
    p_a(tau).  The initial stretch of the trace, where p_a relaxes
    monotonically from its detection-conditioned start, is not
    oscillation and does not set the scale; for a ringing trace the first
    p_a extremum carries (nearly) the full excursion, so there the two
    readings agree.  ``pa_offsets`` give, per g2 extremum,
    |p_a(tau_ext) - pa_ss| / pa_amplitude.  Small offsets mean p_a
    crosses its steady value where g2 turns: the quarter-period lag of a
    damped classical oscillation.  Offsets are inf when p_a never turns
    at all.  ``extrema`` is empty when g2 is monotone (class-A-like
    decay).
    """

    extrema: list
    pa_amplitude: float
    pa_offsets: list


def extrema_lag_analysis(trace: CorrelationTrace,
                         floor: float = 1e-4) -> LagReport:
    raw = find_extrema(trace.g2, floor=floor)
    extrema = [Extremum(index=i, tau=float(trace.tau[i]),
                        value=float(trace.g2[i]), kind=kind, swing=swing)
               for i, kind, swing in raw]
    dev = np.abs(trace.p_a - trace.pa_ss)
    # hysteresis scaled to the signal: only genuine turns of p_a count
    turns = find_extrema(trace.p_a, floor=1e-4 * float(dev.max(initial=0.0)))
    amp = max((float(dev[i]) for i, _, _ in turns), default=0.0)
    if amp > 0.0:
        offsets = [float(dev[e.index]) / amp for e in extrema]
    else:
        offsets = [math.inf for _ in extrema]
    return LagReport(extrema=extrema, pa_amplitude=amp, pa_offsets=offsets)
