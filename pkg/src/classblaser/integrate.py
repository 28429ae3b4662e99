"""Fixed-step RK4 time integration on an adaptively truncated Fock ladder.

The driver walks the coupled ladder equations with classic RK4 at a fixed
requested step.  Two safety nets run underneath:

* the effective step is clamped so the stiffest ladder rate (cavity loss
  kappa * n_cut plus the collective-emission rate near the top rung)
  stays inside the RK4 stability interval;
* under the "auto" cutoff policy the ladder grows geometrically whenever
  the mass on the top rungs exceeds a threshold, or as soon as the tip of
  an advancing front touches the top rungs at all (see
  ``FRONT_CLEARANCE_REL``).  The check runs inside the compiled loop often
  enough that a fast transient cannot run past the absorbing boundary
  between checks.

No renormalization is ever applied: probability lost over the top rung
shows up as trace drift, which is monitored and reported.  A steady state
is accepted when the max-norm of the time derivative falls below
``tol_ss`` while the trace has drifted by less than ``trace_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError, NumericalError
from .model import (DEN_FLOOR_REL, LaserState, ModelParams, adiabatic_rho_a,
                    class_a_like_steady, rhs_class_a_like, rhs_class_b)
from .observables import detailed_balance_residual

MODEL_KINDS = ("classb", "classa")
INITIAL_KINDS = ("vacuum", "classa")
CUTOFF_POLICIES = ("auto", "fixed")

# RK4 damps real-axis eigenvalues up to |rate| * h of about 2.78; keep the
# stiffest ladder rate under this with some margin.
STABILITY_MARGIN = 2.5
# Round-off alone never drives probabilities this negative on a stable run.
NEG_ABORT = -1e-9
# Under the "auto" policy the ladder also grows as soon as any top rung
# rises above this fraction of the distribution peak.  The margin sits a
# factor 1000 below the pair-ratio denominator floor: an advancing front
# must never be pinned against the absorbing boundary at the floor scale,
# where the on/off switching of the pair term seeds a boundary-amplified
# instability.
FRONT_CLEARANCE_REL = 1e-3 * DEN_FLOOR_REL


@dataclass(frozen=True)
class IntegrationOptions:
    """Knobs of the ladder integrator.

    h               requested RK4 step (clamped for stability unless
                    ``clamp_step`` is off)
    t_max           integration horizon in model time
    tol_ss          steady state accepted when max |d/dt| falls below this
    trace_tol       allowed relative trace drift for a converged run
    model           "classb" (full joint dynamics) or "classa" (photon
                    distribution with the atom slaved adiabatically)
    cutoff          initial (policy "auto") or fixed Fock truncation index
    cutoff_policy   "auto" grows the ladder on tail mass, "fixed" never does
    cutoff_max      hard ceiling for automatic growth
    tail_threshold  mass fraction on the top ``tail_rungs`` rungs that
                    triggers growth
    initial         "vacuum" or "classa" (seed from the class-A-like steady
                    distribution; useful far above threshold where the
                    turn-on spike from vacuum would dwarf the steady state)
    sample_interval when set, :func:`evolve` records a snapshot every this
                    much model time
    """

    h: float = 1e-5
    t_max: float = 500.0
    tol_ss: float = 1e-10
    trace_tol: float = 1e-6
    model: str = "classb"
    cutoff: int = 50
    cutoff_policy: str = "auto"
    cutoff_max: int = 10_000
    tail_threshold: float = 1e-8
    tail_rungs: int = 5
    growth_factor: float = 1.5
    den_floor_rel: float = DEN_FLOOR_REL
    check_interval: float = 0.05
    initial: str = "vacuum"
    clamp_step: bool = True
    sample_interval: float | None = None

    def __post_init__(self):
        if self.h <= 0 or not math.isfinite(self.h):
            raise ConfigError("step h must be positive and finite")
        if self.t_max <= 0:
            raise ConfigError("t_max must be positive")
        if self.tol_ss <= 0 or self.trace_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {MODEL_KINDS}")
        if self.cutoff < 1:
            raise ConfigError("cutoff must be >= 1")
        if self.cutoff_policy not in CUTOFF_POLICIES:
            raise ConfigError(f"cutoff_policy must be one of {CUTOFF_POLICIES}")
        if self.cutoff_max < self.cutoff:
            raise ConfigError("cutoff_max must be >= cutoff")
        if not 1 <= self.tail_rungs <= self.cutoff:
            raise ConfigError("tail_rungs must be in [1, cutoff]")
        if self.growth_factor <= 1.0:
            raise ConfigError("growth_factor must exceed 1")
        if self.initial not in INITIAL_KINDS:
            raise ConfigError(f"initial must be one of {INITIAL_KINDS}")
        if self.check_interval <= 0:
            raise ConfigError("check_interval must be positive")


@dataclass
class EvolveResult:
    """Outcome of a time integration run."""

    final: LaserState
    t_final: float
    converged: bool
    max_residual: float
    trace_drift: float
    cutoff: int
    h_effective: float
    times: np.ndarray | None = None
    samples: list | None = None


@dataclass
class SteadyStateResult:
    """Converged (or timed-out) steady state with its diagnostics."""

    state: LaserState
    params: ModelParams
    model: str
    converged: bool
    elapsed: float
    max_residual: float
    trace_drift: float
    cutoff: int
    h_effective: float
    db_residual: float


class _Ladder:
    """Mutable arrays plus bookkeeping for one integration run."""

    def __init__(self, params: ModelParams, options: IntegrationOptions,
                 rho_a, p):
        self.params = params
        self.opts = options
        self.rho_a = np.ascontiguousarray(rho_a, dtype=np.float64)
        self.p = np.ascontiguousarray(p, dtype=np.float64)
        if self.rho_a.shape != self.p.shape:
            raise ConfigError("rho_a and p must have equal length")
        self.t = 0.0
        self.trace0 = float(self.p.sum())
        self.grew = False
        self._setup()

    @property
    def n_cut(self) -> int:
        return self.p.size - 1

    def _setup(self):
        m = self.p.size
        pr = self.params
        if self.opts.model == "classa":
            self.work = np.empty((_kernels.WORK_ROWS_A, m))
            n1 = np.arange(1, m + 1, dtype=np.float64)
            self.adia = pr.lambda_a / (pr.lambda_a + pr.big_gamma + pr.g2h * n1)
        else:
            self.work = np.empty((_kernels.WORK_ROWS_B, m))
            self.adia = None
        rate = pr.kappa * (m - 1) + pr.lambda_a + pr.big_gamma + pr.g2h * m
        if self.opts.model != "classa" and pr.n_atoms > 1.0:
            # Collective emission stiffens the atomic ladder by up to
            # 2 g2h (N-1) (n+1) R: the drain term's derivative carries R
            # itself plus the rho_a / (p[n]+p[n+1]) quotient, each at most
            # R.  On rungs with large n the pair ratio is bounded both by
            # the pump equilibrium lambda / (lambda + Gamma) and by the
            # gain-clamped value kappa / (g2h N); pad 20% for the
            # neighbour couplings of R.
            r_cap = min(1.0, pr.kappa / (pr.g2h * pr.n_atoms))
            denom = pr.lambda_a + pr.big_gamma
            if denom > 0.0:
                r_cap = min(r_cap, pr.lambda_a / denom)
            rate += 2.4 * pr.g2h * (pr.n_atoms - 1.0) * m * r_cap
        self.h_eff = min(self.opts.h, STABILITY_MARGIN / rate) \
            if self.opts.clamp_step else self.opts.h
        if self.opts.cutoff_policy == "auto":
            self.tail_abs = self.opts.tail_threshold * max(abs(self.trace0), 1e-300)
            self.front_rel = FRONT_CLEARANCE_REL
        else:
            self.tail_abs = math.inf  # NaN still trips the in-kernel check
            self.front_rel = 0.0
        # steps for the distribution front to cross the monitored rungs at
        # the fastest transport rate the ladder supports
        v_front = (pr.kappa + pr.g2h * pr.n_atoms) * max(self.n_cut, 1)
        self.tail_every = max(1, int(self.opts.tail_rungs / (v_front * self.h_eff)))

    def run(self, steps: int) -> int:
        """Advance up to `steps`, growing the ladder on tail events.

        Returns the number of steps actually taken before any growth."""
        pr = self.params
        if self.opts.model == "classa":
            done = _kernels.rk4_run_a(
                self.p, self.h_eff, steps, self.tail_every,
                self.opts.tail_rungs, self.tail_abs, self.front_rel,
                self.adia, pr.kappa, pr.g2h * pr.n_atoms, self.work)
        else:
            done = _kernels.rk4_run_b(
                self.rho_a, self.p, self.h_eff, steps, self.tail_every,
                self.opts.tail_rungs, self.tail_abs, self.front_rel,
                pr.kappa, pr.big_gamma, pr.lambda_a, pr.g2h, pr.n_atoms,
                self.opts.den_floor_rel, self.work)
        self.t += done * self.h_eff
        if done < steps:
            if not (np.all(np.isfinite(self.p))
                    and np.all(np.isfinite(self.rho_a))):
                raise NumericalError(
                    f"non-finite values at t={self.t:.6g} (h={self.h_eff:.3g}, "
                    f"cutoff={self.n_cut}); reduce the step or raise the cutoff")
            self._grow()
        return done

    def advance(self, steps: int):
        while steps > 0:
            steps -= self.run(steps)

    def advance_to(self, t_target: float):
        while True:
            steps = int(round((t_target - self.t) / self.h_eff))
            if steps <= 0:
                return
            self.run(steps)

    def _grow(self):
        if self.n_cut >= self.opts.cutoff_max:
            raise NumericalError(
                f"Fock cutoff limit {self.opts.cutoff_max} reached at "
                f"t={self.t:.6g} (tail mass "
                f"{float(self.p[-self.opts.tail_rungs:].sum()):.3e}); "
                "raise cutoff_max or lower the pump")
        new_cut = min(int(math.ceil(self.n_cut * self.opts.growth_factor)),
                      self.opts.cutoff_max)
        pad = new_cut + 1 - self.p.size
        self.p = np.concatenate([self.p, np.zeros(pad)])
        self.rho_a = np.concatenate([self.rho_a, np.zeros(pad)])
        self.grew = True
        self._setup()

    def derivative(self):
        if self.opts.model == "classa":
            return None, rhs_class_a_like(self.p, self.params)
        d = rhs_class_b(LaserState(self.rho_a, self.p, validate=False),
                        self.params, self.opts.den_floor_rel)
        return d.d_rho_a, d.d_p

    def residual(self) -> float:
        d_ra, d_p = self.derivative()
        r = float(np.max(np.abs(d_p)))
        if d_ra is not None:
            r = max(r, float(np.max(np.abs(d_ra))))
        return r

    def trace_drift(self) -> float:
        return abs(float(self.p.sum()) - self.trace0) \
            / max(abs(self.trace0), 1e-300)

    def sanity_check(self):
        if not (np.all(np.isfinite(self.p))
                and np.all(np.isfinite(self.rho_a))):
            raise NumericalError(
                f"non-finite values at t={self.t:.6g} (h={self.h_eff:.3g}, "
                f"cutoff={self.n_cut}); reduce the step or raise the cutoff")
        low = min(float(self.p.min()), float(self.rho_a.min()))
        if low < NEG_ABORT:
            raise NumericalError(
                f"positivity lost at t={self.t:.6g} (min occupation {low:.3e}); "
                "reduce the step or raise the cutoff")

    def state(self) -> LaserState:
        if self.opts.model == "classa":
            return LaserState(adiabatic_rho_a(self.p, self.params),
                              self.p.copy(), validate=False)
        return LaserState(self.rho_a.copy(), self.p.copy(), validate=False)


def rk4_step(state: LaserState, params: ModelParams, h: float,
             model: str = "classb", den_floor_rel: float = DEN_FLOOR_REL) -> LaserState:
    """One exact RK4 step of size h (no clamping, no growth); pure."""
    opts = IntegrationOptions(h=h, model=model, cutoff=state.n_cut,
                              cutoff_policy="fixed", den_floor_rel=den_floor_rel,
                              clamp_step=False, tail_rungs=min(5, state.n_cut),
                              cutoff_max=max(10_000, state.n_cut))
    eng = _Ladder(params, opts, state.rho_a.copy(), state.p.copy())
    eng.advance(1)
    return eng.state()


def initial_state(params: ModelParams, options: IntegrationOptions) -> LaserState:
    """Starting state per ``options.initial`` at the configured cutoff."""
    if options.initial == "vacuum":
        return LaserState.vacuum(options.cutoff)
    # class-A-like seed, pre-grown until its own tail fits under threshold
    n_cut = options.cutoff
    while True:
        p = class_a_like_steady(params, n_cut)
        tail = float(p[-options.tail_rungs:].sum())
        if (tail <= options.tail_threshold
                or options.cutoff_policy == "fixed"
                or n_cut >= options.cutoff_max):
            break
        n_cut = min(int(math.ceil(n_cut * options.growth_factor)),
                    options.cutoff_max)
    return LaserState(adiabatic_rho_a(p, params), p, validate=False)


def _run_to_steady(eng: _Ladder, options: IntegrationOptions):
    resid = eng.residual()
    drift = eng.trace_drift()
    if resid <= options.tol_ss and drift <= options.trace_tol:
        return True, resid, drift
    while True:
        left = int(round((options.t_max - eng.t) / eng.h_eff))
        if left <= 0:
            return False, resid, drift
        chunk = max(1, int(round(options.check_interval / eng.h_eff)))
        eng.advance(min(chunk, left))
        eng.sanity_check()
        resid = eng.residual()
        drift = eng.trace_drift()
        if resid <= options.tol_ss and drift <= options.trace_tol:
            return True, resid, drift


def evolve(state: LaserState, params: ModelParams,
           options: IntegrationOptions | None = None) -> EvolveResult:
    """Advance a given state to t_max or steady state, whichever first."""
    options = options or IntegrationOptions()
    eng = _Ladder(params, options, state.rho_a.copy(), state.p.copy())
    times, samples = None, None
    if options.sample_interval is None:
        converged, resid, drift = _run_to_steady(eng, options)
    else:
        times, samples = [0.0], [eng.state()]
        converged, resid, drift = False, math.inf, 0.0
        k = 0
        while eng.t < options.t_max and not converged:
            k += 1
            eng.advance_to(min(k * options.sample_interval, options.t_max))
            eng.sanity_check()
            times.append(eng.t)
            samples.append(eng.state())
            resid = eng.residual()
            drift = eng.trace_drift()
            converged = resid <= options.tol_ss and drift <= options.trace_tol
        times = np.asarray(times)
    return EvolveResult(final=eng.state(), t_final=eng.t, converged=converged,
                        max_residual=resid, trace_drift=drift,
                        cutoff=eng.n_cut, h_effective=eng.h_eff,
                        times=times, samples=samples)


def steady_state(params: ModelParams,
                 options: IntegrationOptions | None = None) -> SteadyStateResult:
    """Relax to the steady state from the configured initial condition."""
    options = options or IntegrationOptions()
    start = initial_state(params, options)
    eng = _Ladder(params, options, start.rho_a, start.p)
    converged, resid, drift = _run_to_steady(eng, options)
    st = eng.state()
    return SteadyStateResult(
        state=st, params=params, model=options.model, converged=converged,
        elapsed=eng.t, max_residual=resid, trace_drift=drift,
        cutoff=eng.n_cut, h_effective=eng.h_eff,
        db_residual=detailed_balance_residual(st, params))
