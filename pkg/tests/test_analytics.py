"""Threshold analytics tests: closed forms, corrections, numeric locator."""

import numpy as np
import pytest

from classblaser.analytics import (ClassAParams, ClassAThresholds,
                                   NumericThreshold, ThresholdReport,
                                   class_a_exact_distribution,
                                   class_a_like_threshold,
                                   class_a_thresholds,
                                   class_b_threshold_estimate,
                                   numeric_threshold, threshold_correction,
                                   xi_roots)
from classblaser.errors import ConfigError
from classblaser.model import ModelParams, derived_params
from classblaser.observables import mean_photon_number

MESO = ModelParams(kappa=100.0, gamma_h=1e4, big_gamma=1.0, g=10.0,
                   n_atoms=1e5)
NANO = ModelParams(kappa=10.0, gamma_h=1e3, big_gamma=1.0, g=50.0,
                   n_atoms=10.0)
SINGLE = ModelParams(kappa=100.0, gamma_h=1e3, big_gamma=1.0, g=10.0,
                     n_atoms=1.0)


# -------------------------------------------------------- zeroth threshold

def test_class_a_like_threshold_reference_values():
    assert class_a_like_threshold(MESO) == pytest.approx(0.0536842105, rel=1e-8)
    assert class_a_like_threshold(NANO) == pytest.approx(1.5, rel=1e-12)


def test_class_a_like_threshold_none_below_saturation():
    # a single atom cannot beat inversion_sat = 500 for these rates
    assert class_a_like_threshold(SINGLE) is None


def test_class_a_like_threshold_self_consistency():
    # at threshold the pump satisfies kappa / (N beta(lambda)) = lambda:
    # gain clamping written through the pump-broadened beta factor
    for pr in (MESO, NANO):
        lam0 = class_a_like_threshold(pr)
        beta = derived_params(pr.with_pump(lam0)).beta
        assert pr.kappa / (pr.n_atoms * beta) == pytest.approx(lam0, rel=1e-10)


# ----------------------------------------------------------------- xi roots

def test_xi_roots_satisfy_their_quadratic():
    # Vieta check with coefficients reassembled independently
    for pr in (MESO, NANO):
        xm, xp = xi_roots(pr)
        g2 = pr.g * pr.g
        kgh, ggh = pr.kappa * pr.gamma_h, pr.big_gamma * pr.gamma_h
        frac = (pr.n_atoms - 1.0) / pr.n_atoms
        den = 4.0 * g2 + 7.0 * kgh * frac + ggh - 4.0 * kgh
        num = 5.0 * g2 + 4.0 * kgh * frac + ggh - 4.0 * kgh
        assert xm + xp == pytest.approx(num / den, rel=1e-12)
        b1 = (derived_params(pr).inversion_sat / pr.n_atoms) * (pr.n_atoms - 1.0)
        disc = (-8.0 * g2 * g2 * (2.0 + 7.0 * b1)
                - 4.0 * g2 * (pr.big_gamma - 4.0 * pr.kappa) * pr.gamma_h
                + (g2 * (5.0 + 8.0 * b1)
                   + (pr.big_gamma - 4.0 * pr.kappa) * pr.gamma_h) ** 2)
        assert xm * xp == pytest.approx((num * num - disc) / (4 * den * den),
                                        rel=1e-10)


def test_xi_roots_conjugate_pair_for_mesoscopic():
    xm, xp = xi_roots(MESO)
    assert xm.imag != 0.0
    assert xp == pytest.approx(xm.conjugate(), rel=1e-12)


def test_xi_roots_single_atom_small_cavity_loss_limit():
    # N=1, kappa -> 0, Gamma gamma_h = 10 g^2: the discriminant becomes a
    # perfect square and xi_minus -> g^2/(4 g^2 + Gamma gamma_h) = 1/14
    pr = ModelParams(kappa=1e-9, gamma_h=10.0, big_gamma=1.0, g=1.0,
                     n_atoms=1.0)
    xm, xp = xi_roots(pr)
    assert xm.imag == 0.0
    assert xm.real == pytest.approx(1.0 / 14.0, abs=1e-8)
    assert xp.real == pytest.approx(1.0, abs=1e-8)


# ------------------------------------------------------------- correction

def test_threshold_correction_direct_formula():
    # b_sat = 0.5, N=1: delta1 = kappa b (2 xi - 1) / (1 - b)
    pr = ModelParams(kappa=1.0, gamma_h=1.0, big_gamma=1.0, g=1.0,
                     n_atoms=2.0)
    b = derived_params(pr).inversion_sat / pr.n_atoms
    assert b == pytest.approx(0.25)
    xi = 0.3
    expect = pr.kappa * b * (xi - (1 - xi) / 2.0) / (1 - b)
    assert threshold_correction(pr, xi) == pytest.approx(expect, rel=1e-12)


def test_threshold_correction_requires_gain_margin():
    with pytest.raises(ConfigError):
        threshold_correction(SINGLE, 0.3)  # b_sat = 500 >= 1


def test_class_b_threshold_estimate_mesoscopic():
    rep = class_b_threshold_estimate(MESO)
    assert rep.exists
    assert rep.xi_used == pytest.approx(rep.xi_minus.real, rel=1e-15)
    assert rep.lambda_th0 == pytest.approx(0.0536842105, rel=1e-8)
    assert rep.delta1 == pytest.approx(0.0090914, rel=1e-3)
    assert rep.lambda_th1 == pytest.approx(0.0627756, rel=1e-4)
    # the correction is a small fraction of the threshold itself
    assert 0.0 < rep.delta1 / rep.lambda_th0 < 0.2


def test_class_b_threshold_estimate_no_lasing():
    rep = class_b_threshold_estimate(SINGLE)
    assert rep == ThresholdReport(exists=False)


# -------------------------------------------------------- numeric locator

def test_numeric_threshold_nanoscopic():
    nt = numeric_threshold(NANO)
    assert isinstance(nt, NumericThreshold)
    assert 1.2 <= nt.lambda_th <= 1.8
    lam0 = class_a_like_threshold(NANO)
    assert nt.bracket == (pytest.approx(0.5 * lam0), pytest.approx(4.0 * lam0))
    # every evaluation is recorded; p0 - p1 flips sign across the root
    assert len(nt.evaluations) == nt.iterations + 2
    assert nt.evaluations[0][1] > 0.0 > nt.evaluations[1][1]


def test_numeric_threshold_bracket_errors():
    with pytest.raises(ConfigError):
        numeric_threshold(NANO, bracket=(2.0, 1.0))
    with pytest.raises(ConfigError):
        numeric_threshold(SINGLE)  # no threshold at all
    with pytest.raises(ConfigError, match="straddle"):
        numeric_threshold(NANO, bracket=(3.0, 6.0))  # both above


# ------------------------------------------------- reference class-A laser

def test_class_a_params_validation():
    ClassAParams(kappa=1.0, gamma=1.0, gamma_h=1.0, g=0.5, n_atoms=10.0)
    for bad in (dict(kappa=0.0), dict(gamma=-1.0), dict(g=0.0),
                dict(n_atoms=0.0), dict(lambda_a=-0.5)):
        kw = dict(kappa=1.0, gamma=1.0, gamma_h=1.0, g=0.5, n_atoms=10.0)
        kw.update(bad)
        with pytest.raises(ConfigError):
            ClassAParams(**kw)


def test_class_a_distribution_unpumped_is_vacuum():
    ca = ClassAParams(kappa=1.0, gamma=1.0, gamma_h=1.0, g=0.5, n_atoms=10.0)
    p = class_a_exact_distribution(ca, 10)
    assert p[0] == 1.0 and not p[1:].any()


def test_class_a_distribution_hand_ratio():
    # p1/p0 = N 2 g^2 r_a / (kappa (4 g^2 + gamma gamma_h)) with
    # r_a = gamma lambda / (gamma + lambda) = 2/3 here
    ca = ClassAParams(kappa=0.1, gamma=1.0, gamma_h=1.0, g=0.05,
                      n_atoms=100.0, lambda_a=2.0)
    p = class_a_exact_distribution(ca, 450)  # lasing peak sits near n=233
    assert p[1] / p[0] == pytest.approx(1.0 / 0.303, rel=1e-9)
    assert p.sum() == pytest.approx(1.0, abs=1e-13)


def test_class_a_distribution_tail_guard():
    ca = ClassAParams(kappa=0.1, gamma=1.0, gamma_h=1.0, g=0.05,
                      n_atoms=100.0, lambda_a=2.0)
    with pytest.raises(ConfigError, match="tail"):
        class_a_exact_distribution(ca, 4)


def test_class_a_thresholds_reference_values():
    ca = ClassAParams(kappa=1.0, gamma=1.0, gamma_h=1.0, g=0.5, n_atoms=10.0)
    th = class_a_thresholds(ca)
    assert isinstance(th, ClassAThresholds)
    assert th.beta0 == pytest.approx(0.5, rel=1e-12)
    assert th.lambda_semiclassical == pytest.approx(0.25, rel=1e-12)
    assert th.lambda_p0p1 == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_class_a_p0_equals_p1_at_that_threshold():
    ca = ClassAParams(kappa=1.0, gamma=1.0, gamma_h=1.0, g=0.5, n_atoms=10.0)
    lam = class_a_thresholds(ca).lambda_p0p1
    p = class_a_exact_distribution(
        ClassAParams(kappa=ca.kappa, gamma=ca.gamma, gamma_h=ca.gamma_h,
                     g=ca.g, n_atoms=ca.n_atoms, lambda_a=lam), 100)
    assert p[1] / p[0] == pytest.approx(1.0, rel=1e-10)


def test_class_a_thresholds_saturation_caps_pump():
    # too few atoms: the p0=p1 threshold is unreachable but the weaker
    # semiclassical one still exists
    ca = ClassAParams(kappa=1.0, gamma=1.0, gamma_h=1.0, g=0.5, n_atoms=3.0)
    th = class_a_thresholds(ca)
    assert th.lambda_p0p1 is None
    assert th.lambda_semiclassical == pytest.approx(2.0, rel=1e-12)


def test_thermodynamic_thresholds_coincide_across_models():
    # in the thermodynamic regime (2 g^2 / gamma_h << 1) the ladder
    # model's gain-clamping threshold and the textbook class-A
    # semiclassical threshold agree to relative order 2 g^2 / gamma_h
    pr = ModelParams(kappa=100.0, gamma_h=1e4, big_gamma=1.0, g=1.0,
                     n_atoms=1e6)
    lam0 = class_a_like_threshold(pr)
    ca = ClassAParams(kappa=pr.kappa, gamma=pr.big_gamma, gamma_h=pr.gamma_h,
                      g=pr.g, n_atoms=pr.n_atoms)
    lam_sc = class_a_thresholds(ca).lambda_semiclassical
    assert lam0 == pytest.approx(lam_sc, rel=0.01)


def test_class_a_mean_grows_through_threshold():
    # a low-beta device (beta0 ~ 0.01) shows the classic sharp kink:
    # crossing the p0=p1 threshold multiplies the mean by orders of one
    def at(lam):
        return class_a_exact_distribution(
            ClassAParams(kappa=0.1, gamma=1.0, gamma_h=1.0, g=0.05,
                         n_atoms=1000.0, lambda_a=lam), 300)

    th = class_a_thresholds(ClassAParams(kappa=0.1, gamma=1.0, gamma_h=1.0,
                                         g=0.05, n_atoms=1000.0))
    assert th.beta0 == pytest.approx(0.01 / 1.01, rel=1e-12)
    lo = mean_photon_number(at(0.5 * th.lambda_p0p1))
    hi = mean_photon_number(at(2.0 * th.lambda_p0p1))
    assert hi > 10.0 * lo
