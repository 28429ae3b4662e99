"""Class-B laser density-matrix model on a truncated Fock ladder.

The laser state is carried by two real vectors indexed by the photon
number n = 0..n_cut: ``p[n]`` is the probability of finding n photons in
the cavity mode, and ``rho_a[n]`` is the joint probability of n photons
together with one given atom (all atoms are equivalent) sitting in the
upper laser level.  Fast dephasing slaves the optical coherences to these
populations, which closes the hierarchy at the level of the two diagonals
and produces the equations of motion implemented in :func:`rhs_class_b`:

    d rho_a[n] = lambda_a p[n]
                 - (lambda_a + big_gamma + g2h (n+1)) rho_a[n]
                 + kappa ((n+1) rho_a[n+1] - n rho_a[n])
                 + g2h (N-1) ( n  rho_a[n-1] R[n-1] - (n+1) rho_a[n] R[n] )

    d p[n]     = g2h N ( n rho_a[n-1] - (n+1) rho_a[n] )
                 + kappa ((n+1) p[n+1] - n p[n])

with g2h = 2 g^2 / gamma_h the single-atom stimulated rate per photon,
and R[n] = (rho_a[n] + rho_a[n+1]) / (p[n] + p[n+1]) the conditional
probability that a second atom is excited given the photon pair (n, n+1).
That conditional-probability closure is what couples different atoms; it
vanishes identically for a single atom, where the model becomes linear.

Indices outside the ladder read zero (absorbing truncation), so the top
rung leaks probability at the rate g2h N (n_cut+1) rho_a[n_cut]; the
integrator keeps that leak below tolerance by growing the cutoff.

Everything in this module is a pure function of its arguments.  The hot
integration loops live in :mod:`classblaser._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Pair denominators below this fraction of max(p) are treated as empty
# rungs and the corresponding two-atom term is dropped: the true term
# vanishes there (its numerator is bounded by the denominator squared),
# while round-off cancellation could otherwise leave a tiny positive
# denominator under a not-so-tiny numerator.  Relative to max(p), the
# guard scales with the state, which keeps the flow exactly degree-1
# homogeneous, branch decisions included.
DEN_FLOOR_REL = 1e-16

# Round-off may push probabilities slightly negative; anything in
# [NEG_CLIP, 0) is clamped to zero by consumers, anything lower is an error.
NEG_CLIP = -1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical rates of the class-B laser model.

    kappa      cavity photon loss rate
    gamma_h    pure dephasing rate of the lasing transition
    big_gamma  spontaneous upper-to-lower decay rate (time unit in presets)
    g          single-atom light-matter coupling
    n_atoms    number of active atoms
    lambda_a   incoherent pump rate into the upper level
    """

    kappa: float
    gamma_h: float
    big_gamma: float
    g: float
    n_atoms: float
    lambda_a: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in
                   (self.kappa, self.gamma_h, self.big_gamma, self.g,
                    self.n_atoms, self.lambda_a)):
            raise ConfigError("model parameters must be finite")
        if self.kappa < 0 or self.big_gamma < 0 or self.lambda_a < 0:
            raise ConfigError("rates kappa, big_gamma, lambda_a must be >= 0")
        if self.gamma_h <= 0:
            raise ConfigError("dephasing rate gamma_h must be > 0")
        if self.g <= 0:
            raise ConfigError("coupling g must be > 0")
        if self.n_atoms < 1:
            raise ConfigError("n_atoms must be >= 1")

    @property
    def g2h(self) -> float:
        """Stimulated emission rate per photon, 2 g^2 / gamma_h."""
        return 2.0 * self.g * self.g / self.gamma_h

    def with_pump(self, lambda_a: float) -> "ModelParams":
        return ModelParams(self.kappa, self.gamma_h, self.big_gamma,
                           self.g, self.n_atoms, lambda_a)


@dataclass(frozen=True)
class DerivedParams:
    """Dimensionless numbers derived from :class:`ModelParams`.

    beta           spontaneous-emission fraction funneled into the mode,
                   2 g^2 / (2 g^2 + (big_gamma + lambda_a) gamma_h)
    n_sat          saturation photon number, 1 / beta
    inversion_sat  population inversion at gain-loss balance,
                   kappa gamma_h / (2 g^2); lasing needs n_atoms above it
    """

    beta: float
    n_sat: float
    inversion_sat: float


def derived_params(params: ModelParams) -> DerivedParams:
    two_g2 = 2.0 * params.g * params.g
    beta = two_g2 / (two_g2 + (params.big_gamma + params.lambda_a) * params.gamma_h)
    n_sat = 1.0 / beta if beta > 0.0 else math.inf
    # g is validated positive, but 2 g^2 can still underflow to zero
    inversion_sat = params.kappa * params.gamma_h / two_g2 \
        if two_g2 > 0.0 else math.inf
    return DerivedParams(beta=beta, n_sat=n_sat, inversion_sat=inversion_sat)


class LaserState:
    """Joint atom-photon state on the truncated Fock ladder.

    Wraps the pair (rho_a, p) of equal-length float vectors.  On
    construction (unless ``validate=False``) enforces 0 <= rho_a[n] <=
    p[n] <= 1 up to round-off tolerance and a unit trace up to
    ``trace_tol``; the integrator monitors the same bounds in flight.
    """

    __slots__ = ("rho_a", "p")

    def __init__(self, rho_a, p, validate=True, atol=1e-9, trace_tol=1e-6):
        rho_a = np.ascontiguousarray(rho_a, dtype=np.float64)
        p = np.ascontiguousarray(p, dtype=np.float64)
        if rho_a.ndim != 1 or rho_a.shape != p.shape or p.size == 0:
            raise ConfigError("rho_a and p must be 1-d arrays of equal nonzero length")
        if validate:
            if not (np.all(np.isfinite(rho_a)) and np.all(np.isfinite(p))):
                raise ConfigError("state contains non-finite entries")
            if rho_a.min() < -atol or p.min() < -atol:
                raise ConfigError("negative occupation beyond tolerance")
            if np.any(rho_a > p + atol):
                raise ConfigError("rho_a[n] must not exceed p[n]")
            if p.max() > 1.0 + atol:
                raise ConfigError("probabilities must not exceed 1")
            if abs(p.sum() - 1.0) > trace_tol:
                raise ConfigError("photon distribution must sum to 1 "
                                  f"(got {p.sum():.9g})")
        self.rho_a = rho_a
        self.p = p

    @classmethod
    def vacuum(cls, n_cut: int) -> "LaserState":
        """Empty cavity, all atoms in the lower level."""
        if n_cut < 1:
            raise ConfigError("n_cut must be >= 1")
        p = np.zeros(n_cut + 1)
        p[0] = 1.0
        return cls(np.zeros(n_cut + 1), p, validate=False)

    @property
    def n_cut(self) -> int:
        return self.p.size - 1

    @property
    def trace(self) -> float:
        return float(self.p.sum())

    def copy(self) -> "LaserState":
        return LaserState(self.rho_a.copy(), self.p.copy(), validate=False)


@dataclass
class StateDerivative:
    """Time derivative of a :class:`LaserState` under the model flow."""

    d_rho_a: np.ndarray
    d_p: np.ndarray


def _pair_ratio(rho_a, p, den_floor_rel):
    # R[n] = (rho_a[n] + rho_a[n+1]) / (p[n] + p[n+1]); empty pairs give 0.
    # As a conditional probability R is clamped to [0, 1], which round-off
    # on transient front rungs can otherwise violate.
    num = rho_a.copy()
    num[:-1] += rho_a[1:]
    den = p.copy()
    den[:-1] += p[1:]
    ok = den > den_floor_rel * max(float(p.max()), 0.0)
    ratio = np.zeros_like(p)
    np.divide(num, den, out=ratio, where=ok)
    return np.clip(ratio, 0.0, 1.0)


def _photon_gain(rho_a, g2h_n, n):
    # d p[n] gain part: g2h N (n rho_a[n-1] - (n+1) rho_a[n])
    ra_dn = np.zeros_like(rho_a)
    ra_dn[1:] = rho_a[:-1]
    return g2h_n * (n * ra_dn - (n + 1.0) * rho_a)


def _photon_loss(p, kappa, n):
    p_up = np.zeros_like(p)
    p_up[:-1] = p[1:]
    return kappa * ((n + 1.0) * p_up - n * p)


def rhs_class_b(state: LaserState, params: ModelParams,
                den_floor_rel: float = DEN_FLOOR_REL) -> StateDerivative:
    """Full class-B flow: joint atom-photon plus photon marginal."""
    rho_a, p = state.rho_a, state.p
    n = np.arange(p.size, dtype=np.float64)
    g2h = params.g2h

    d_p = _photon_gain(rho_a, g2h * params.n_atoms, n) + _photon_loss(p, params.kappa, n)

    ratio = _pair_ratio(rho_a, p, den_floor_rel)
    ra_dn = np.zeros_like(rho_a)
    ra_dn[1:] = rho_a[:-1]
    ratio_dn = np.zeros_like(ratio)
    ratio_dn[1:] = ratio[:-1]
    two_atom = n * ra_dn * ratio_dn - (n + 1.0) * rho_a * ratio

    ra_up = np.zeros_like(rho_a)
    ra_up[:-1] = rho_a[1:]
    d_rho_a = (params.lambda_a * p
               - (params.lambda_a + params.big_gamma + g2h * (n + 1.0)) * rho_a
               + params.kappa * ((n + 1.0) * ra_up - n * rho_a)
               + g2h * (params.n_atoms - 1.0) * two_atom)
    return StateDerivative(d_rho_a=d_rho_a, d_p=d_p)


def adiabatic_rho_a(p: np.ndarray, params: ModelParams) -> np.ndarray:
    """Upper-level occupation slaved to the photon distribution.

    Setting the single-atom part of d rho_a to zero at fixed p gives
    rho_a[n] = lambda_a p[n] / (lambda_a + big_gamma + g2h (n+1)), the
    class-A-like closure used by :func:`rhs_class_a_like`.  Always
    0 <= rho_a[n] < p[n] wherever p[n] > 0.
    """
    p = np.asarray(p, dtype=np.float64)
    n = np.arange(p.size, dtype=np.float64)
    return params.lambda_a * p / (params.lambda_a + params.big_gamma
                                  + params.g2h * (n + 1.0))


def rhs_class_a_like(p: np.ndarray, params: ModelParams) -> np.ndarray:
    """Photon-only flow with the atom slaved adiabatically (class-A-like)."""
    p = np.asarray(p, dtype=np.float64)
    n = np.arange(p.size, dtype=np.float64)
    rho_a = adiabatic_rho_a(p, params)
    return _photon_gain(rho_a, params.g2h * params.n_atoms, n) \
        + _photon_loss(p, params.kappa, n)


def class_a_like_steady(params: ModelParams, n_cut: int) -> np.ndarray:
    """Normalized steady photon distribution of the class-A-like flow.

    Detailed balance between neighbouring rungs gives the recursion
    p[n] / p[n-1] = (2 g^2 N lambda_a / (gamma_h kappa))
                    / (lambda_a + big_gamma + 2 g^2 n / gamma_h),
    evaluated in log space so that strongly peaked distributions far from
    the origin do not overflow.
    """
    if params.lambda_a == 0.0:
        p = np.zeros(n_cut + 1)
        p[0] = 1.0
        return p
    n = np.arange(1, n_cut + 1, dtype=np.float64)
    top = 2.0 * params.g * params.g * params.n_atoms * params.lambda_a \
        / (params.gamma_h * params.kappa)
    log_ratio = np.log(top) - np.log(params.lambda_a + params.big_gamma
                                     + params.g2h * n)
    log_p = np.concatenate(([0.0], np.cumsum(log_ratio)))
    log_p -= log_p.max()
    p = np.exp(log_p)
    return p / p.sum()
