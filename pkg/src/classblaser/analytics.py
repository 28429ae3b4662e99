"""Laser thresholds: closed forms, corrections, and a numeric locator.

Three threshold notions for the class-B ladder model are implemented.

* :func:`class_a_like_threshold` solves the gain-clamping condition of
  the adiabatic (class-A-like) flow: pumping must push the unsaturated
  inversion past ``inversion_sat = kappa gamma_h / (2 g^2)``.  The root
    lambda_th0 = kappa (2 g^2 + big_gamma gamma_h) / (2 g^2 N - kappa gamma_h)
  exists only when n_atoms exceeds ``inversion_sat``.

* :func:`class_b_threshold_estimate` sharpens that with the leading
  finite-size correction.  An ansatz for the near-threshold shape of the
  joint occupation, rho_a[n] = Tr(rho_a) (xi + (1 - xi) p[n]), closes the
  bottom rung of the ladder; xi solves a quadratic whose roots are
  :func:`xi_roots`, and the shift is
    delta1 = kappa B (xi - (1 - xi)/N) / (1 - B),    B = inversion_sat / N,
  evaluated at the real part of the minus root.  The corrected threshold
  is lambda_th1 = lambda_th0 + delta1.

* :func:`numeric_threshold` dispenses with expansions: it bisects the
  pump for the sign change of p[0] - p[1] at the integrated steady state
  (above threshold the photon distribution develops a lasing peak, so
  p[1] overtakes p[0]).

A textbook class-A device (adiabatic cavity, no dephasing hierarchy) is
included as an independent reference: its steady distribution is a pure
birth-death balance and both of its standard threshold definitions have
closed forms.  In the thermodynamic regime the two models' thresholds
coincide, which the tests exploit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericalError
from .integrate import IntegrationOptions, steady_state
from .model import ModelParams, derived_params


def class_a_like_threshold(params: ModelParams):
    """Gain-clamping pump threshold of the adiabatic flow, or None.

    None means the device cannot lase: n_atoms does not exceed the
    saturated inversion kappa gamma_h / (2 g^2).
    """
    two_g2 = 2.0 * params.g * params.g
    denom = two_g2 * params.n_atoms - params.kappa * params.gamma_h
    if denom <= 0.0:
        return None
    return params.kappa * (two_g2 + params.big_gamma * params.gamma_h) / denom


def xi_roots(params: ModelParams):
    """Both roots of the bottom-rung closure quadratic, as complex numbers.

    The ansatz rho_a[n] = Tr(rho_a) (xi + (1 - xi) p[n]) balances the
    n = 0 rung of the ladder at threshold; xi solves
        xi_pm = (num_re +- sqrt(disc)) / (2 den)
    with the coefficients assembled below.  Complex roots (negative
    discriminant, the common case for strong coupling) come back as a
    conjugate pair; the physical choice downstream is Re(xi_minus).
    """
    g2 = params.g * params.g
    kgh = params.kappa * params.gamma_h
    ggh = params.big_gamma * params.gamma_h
    frac = (params.n_atoms - 1.0) / params.n_atoms
    b_sat = derived_params(params).inversion_sat / params.n_atoms

    den = 4.0 * g2 + 7.0 * kgh * frac + ggh - 4.0 * kgh
    scale = max(4.0 * g2, 7.0 * kgh * frac, abs(ggh - 4.0 * kgh), 1.0)
    if abs(den) < 1e-12 * scale:
        raise NumericalError(
            "degenerate closure quadratic: leading coefficient "
            f"{den:.3e} vanishes for these parameters")

    num_re = 5.0 * g2 + 4.0 * kgh * frac + ggh - 4.0 * kgh
    bn1 = b_sat * (params.n_atoms - 1.0)
    disc = (-8.0 * g2 * g2 * (2.0 + 7.0 * bn1)
            - 4.0 * g2 * (params.big_gamma - 4.0 * params.kappa) * params.gamma_h
            + (g2 * (5.0 + 8.0 * bn1)
               + (params.big_gamma - 4.0 * params.kappa) * params.gamma_h) ** 2)
    root = cmath.sqrt(complex(disc))
    return (0.5 * (num_re - root) / den, 0.5 * (num_re + root) / den)


def threshold_correction(params: ModelParams, xi: float) -> float:
    """Finite-size pump shift delta1 for a given (real) closure xi."""
    b_sat = derived_params(params).inversion_sat / params.n_atoms
    if b_sat >= 1.0:
        raise ConfigError("no threshold exists: n_atoms does not exceed "
                          "the saturated inversion")
    return params.kappa * b_sat * (xi - (1.0 - xi) / params.n_atoms) \
        / (1.0 - b_sat)


@dataclass(frozen=True)
class ThresholdReport:
    """Threshold ladder for one parameter set (pumps in model rate units).

    exists is False when the device cannot lase; the remaining fields are
    then None.  lambda_numeric is filled only by the numeric locator.
    """

    exists: bool
    lambda_th0: float | None = None
    xi_minus: complex | None = None
    xi_plus: complex | None = None
    xi_used: float | None = None
    delta1: float | None = None
    lambda_th1: float | None = None
    lambda_numeric: float | None = None


def class_b_threshold_estimate(params: ModelParams) -> ThresholdReport:
    """Zeroth-order threshold plus its first finite-size correction."""
    lam0 = class_a_like_threshold(params)
    if lam0 is None:
        return ThresholdReport(exists=False)
    xm, xp = xi_roots(params)
    xi = xm.real
    d1 = threshold_correction(params, xi)
    return ThresholdReport(exists=True, lambda_th0=lam0, xi_minus=xm,
                           xi_plus=xp, xi_used=xi, delta1=d1,
                           lambda_th1=lam0 + d1)


@dataclass
class NumericThreshold:
    """Bisection result for the p[0] = p[1] crossing."""

    lambda_th: float
    bracket: tuple
    iterations: int
    evaluations: list  # (pump, p0 - p1) pairs in evaluation order


def numeric_threshold(params: ModelParams, bracket=None, tol=None,
                      options: IntegrationOptions | None = None) -> NumericThreshold:
    """Locate the pump where p[1] overtakes p[0] at the steady state.

    Bisects inside ``bracket`` (default [lambda_th0 / 2, 4 lambda_th0]).
    Each evaluation integrates to the steady state; by default these runs
    are seeded from the class-A-like distribution, which reaches the same
    attractor as a vacuum start while skipping the turn-on spike.
    """
    lam0 = class_a_like_threshold(params)
    if lam0 is None:
        raise ConfigError("no threshold exists for these parameters")
    if bracket is None:
        bracket = (0.5 * lam0, 4.0 * lam0)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo < hi:
        raise ConfigError("bracket must satisfy 0 < lo < hi")
    if tol is None:
        tol = 0.01 * lam0
    if options is None:
        options = IntegrationOptions(initial="classa")

    evals = []

    def split(pump):
        res = steady_state(params.with_pump(pump), options)
        if not res.converged:
            raise NumericalError(
                f"steady state did not converge at pump {pump:.6g} "
                f"(residual {res.max_residual:.3e}); raise t_max")
        val = float(res.state.p[0] - res.state.p[1])
        evals.append((pump, val))
        return val

    f_lo, f_hi = split(lo), split(hi)
    if not (f_lo > 0.0 > f_hi):
        raise ConfigError(
            "bracket does not straddle the threshold: "
            f"p0-p1 = {f_lo:.3e} at {lo:.6g}, {f_hi:.3e} at {hi:.6g}")
    iterations = 0
    while hi - lo > tol:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if split(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return NumericThreshold(lambda_th=0.5 * (lo + hi),
                            bracket=(float(bracket[0]), float(bracket[1])),
                            iterations=iterations, evaluations=evals)


# ---------------------------------------------------------------------------
# Reference class-A device (independent of the ladder integrator)

@dataclass(frozen=True)
class ClassAParams:
    """Textbook class-A laser: atoms decay at gamma, no joint dynamics.

    kappa     cavity loss rate
    gamma     total decay rate of the upper level
    gamma_h   dephasing rate entering the stimulated rate
    g         light-matter coupling
    n_atoms   number of active atoms
    lambda_a  pump rate
    """

    kappa: float
    gamma: float
    gamma_h: float
    g: float
    n_atoms: float
    lambda_a: float = 0.0

    def __post_init__(self):
        if min(self.kappa, self.gamma, self.gamma_h, self.g) <= 0:
            raise ConfigError("kappa, gamma, gamma_h, g must be > 0")
        if self.n_atoms < 1 or self.lambda_a < 0:
            raise ConfigError("need n_atoms >= 1 and lambda_a >= 0")


def class_a_exact_distribution(ca: ClassAParams, n_max: int,
                               tail_tol: float = 1e-12) -> np.ndarray:
    """Steady photon distribution of the reference class-A laser.

    Birth-death balance gives
        p[n] / p[n-1] = N 2 g^2 r_a / (kappa (4 g^2 n + gamma gamma_h))
    with r_a = gamma lambda_a / (gamma + lambda_a) the pump-saturated
    excitation rate.  Evaluated in log space and normalized.  Raises when
    the top rungs still carry more than ``tail_tol``: n_max too small.
    """
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    if ca.lambda_a == 0.0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    r_a = ca.gamma * ca.lambda_a / (ca.gamma + ca.lambda_a)
    g2 = ca.g * ca.g
    n = np.arange(1, n_max + 1, dtype=np.float64)
    log_ratio = np.log(ca.n_atoms * 2.0 * g2 * r_a) \
        - np.log(ca.kappa * (4.0 * g2 * n + ca.gamma * ca.gamma_h))
    log_p = np.concatenate(([0.0], np.cumsum(log_ratio)))
    log_p -= log_p.max()
    p = np.exp(log_p)
    p /= p.sum()
    tail = float(p[-min(5, n_max):].sum())
    if tail > tail_tol:
        raise ConfigError(f"tail mass {tail:.3e} above tolerance: "
                          "n_max too small for these parameters")
    return p


@dataclass(frozen=True)
class ClassAThresholds:
    """Two standard thresholds of the reference device.

    beta0 is the spontaneous-emission fraction 4 g^2 / (4 g^2 + gamma
    gamma_h).  Fields are None when the pump cannot reach the required
    gain (saturation caps the pump term at n_atoms * gamma).
    """

    lambda_semiclassical: float | None
    lambda_p0p1: float | None
    beta0: float


def _solve_pump(ca: ClassAParams, required: float):
    # solve N gamma lambda / (gamma + lambda) = required for lambda
    denom = ca.n_atoms - required / ca.gamma
    if denom <= 0.0:
        return None
    return required / denom


def class_a_thresholds(ca: ClassAParams) -> ClassAThresholds:
    g2 = ca.g * ca.g
    beta0 = 4.0 * g2 / (4.0 * g2 + ca.gamma * ca.gamma_h)
    gain_sc = ca.kappa * ca.gamma_h * ca.gamma / (2.0 * g2)
    gain_p0p1 = 2.0 * ca.kappa / beta0
    return ClassAThresholds(
        lambda_semiclassical=_solve_pump(ca, gain_sc),
        lambda_p0p1=_solve_pump(ca, gain_p0p1),
        beta0=beta0)
