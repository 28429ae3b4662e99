"""Compiled inner loops for the ladder integrator.

The right-hand sides mirror the reference implementations in
:mod:`classblaser.model` element by element (tests assert agreement).
All kernels are nopython, release the GIL (pump sweeps run them from a
thread pool) and mutate their arguments in place so the RK4 loop stays
allocation-free.

The chunk runners check the top `tail_rungs` rungs every `tail_every`
steps and return early when either the absolute mass there exceeds
`tail_abs` or any single rung rises above `front_rel` of the current
distribution peak, so the driver can grow the ladder before a fast
transient reaches the absorbing boundary.  The second test fires while
an advancing front is still far below the pair-ratio floor: a front
pinned against the boundary at that scale turns the on/off switching of
the pair term into noise that the boundary amplifies, so growth must
happen before contact.  The comparisons are written so that NaN also
triggers an early return.  The return value is the number of steps
taken.

Work-array layout, one row per ladder vector: the class-B runner uses
rows 0..7 for the four RK4 slopes (atom/photon pairs), rows 8..9 for the
trial state and row 10 for the pair-ratio scratch; the class-A-like
runner uses rows 0..3 for slopes and row 4 for the trial state.
"""

import numpy as np
from numba import njit

WORK_ROWS_B = 11
WORK_ROWS_A = 5


@njit(cache=True, nogil=True)
def rhs_b(rho_a, p, d_rho_a, d_p, ratio, kappa, big_gamma, pump, g2h,
          n_atoms, den_floor_rel):
    m = rho_a.shape[0]
    gain_all = g2h * n_atoms
    gain_pair = g2h * (n_atoms - 1.0)

    maxp = 0.0
    for n in range(m):
        if p[n] > maxp:
            maxp = p[n]
    floor = den_floor_rel * maxp

    for n in range(m - 1):
        den = p[n] + p[n + 1]
        r = (rho_a[n] + rho_a[n + 1]) / den if den > floor else 0.0
        # conditional excitation probability: clamp to its physical range
        ratio[n] = min(max(r, 0.0), 1.0)
    den = p[m - 1]
    r = rho_a[m - 1] / den if den > floor else 0.0
    ratio[m - 1] = min(max(r, 0.0), 1.0)

    for n in range(m):
        nf = float(n)
        ra_n = rho_a[n]
        ra_dn = rho_a[n - 1] if n > 0 else 0.0
        ra_up = rho_a[n + 1] if n + 1 < m else 0.0
        p_up = p[n + 1] if n + 1 < m else 0.0
        r_dn = ratio[n - 1] if n > 0 else 0.0

        d_p[n] = gain_all * (nf * ra_dn - (nf + 1.0) * ra_n) \
            + kappa * ((nf + 1.0) * p_up - nf * p[n])
        d_rho_a[n] = pump * p[n] \
            - (pump + big_gamma + g2h * (nf + 1.0)) * ra_n \
            + kappa * ((nf + 1.0) * ra_up - nf * ra_n) \
            + gain_pair * (nf * ra_dn * r_dn - (nf + 1.0) * ra_n * ratio[n])


@njit(cache=True, nogil=True)
def rhs_a(p, d_p, adia, kappa, gain_all):
    # adia[n] = pump / (pump + big_gamma + g2h (n+1)), fixed per cutoff
    m = p.shape[0]
    for n in range(m):
        nf = float(n)
        ra_n = adia[n] * p[n]
        ra_dn = adia[n - 1] * p[n - 1] if n > 0 else 0.0
        p_up = p[n + 1] if n + 1 < m else 0.0
        d_p[n] = gain_all * (nf * ra_dn - (nf + 1.0) * ra_n) \
            + kappa * ((nf + 1.0) * p_up - nf * p[n])


@njit(cache=True, nogil=True)
def _tail_ok(p, tail_rungs, tail_abs, front_rel):
    # Absolute values: an instability oscillating in sign must not hide
    # from the mass test by cancellation.
    maxp = 0.0
    for i in range(p.shape[0]):
        if p[i] > maxp:
            maxp = p[i]
    tm = 0.0
    ft = 0.0
    for i in range(p.shape[0] - tail_rungs, p.shape[0]):
        a = abs(p[i])
        tm += a
        if a > ft:
            ft = a
    ok = tm <= tail_abs  # False for NaN as well
    if front_rel > 0.0:
        # Early warning: the leading edge of an advancing front touches
        # the top rungs.  Growing here, orders of magnitude before the
        # pair-ratio floor, keeps the front from ever being pinned
        # against the absorbing boundary.
        ok = ok and ft <= front_rel * maxp
    return ok


@njit(cache=True, nogil=True)
def rk4_run_b(rho_a, p, h, steps, tail_every, tail_rungs, tail_abs,
              front_rel, kappa, big_gamma, pump, g2h, n_atoms,
              den_floor_rel, work):
    m = rho_a.shape[0]
    k1a, k1p = work[0], work[1]
    k2a, k2p = work[2], work[3]
    k3a, k3p = work[4], work[5]
    k4a, k4p = work[6], work[7]
    ta, tp = work[8], work[9]
    ratio = work[10]
    half = 0.5 * h
    sixth = h / 6.0
    done = 0
    while done < steps:
        burst = min(tail_every, steps - done)
        for _ in range(burst):
            rhs_b(rho_a, p, k1a, k1p, ratio, kappa, big_gamma, pump, g2h,
                  n_atoms, den_floor_rel)
            for i in range(m):
                ta[i] = rho_a[i] + half * k1a[i]
                tp[i] = p[i] + half * k1p[i]
            rhs_b(ta, tp, k2a, k2p, ratio, kappa, big_gamma, pump, g2h,
                  n_atoms, den_floor_rel)
            for i in range(m):
                ta[i] = rho_a[i] + half * k2a[i]
                tp[i] = p[i] + half * k2p[i]
            rhs_b(ta, tp, k3a, k3p, ratio, kappa, big_gamma, pump, g2h,
                  n_atoms, den_floor_rel)
            for i in range(m):
                ta[i] = rho_a[i] + h * k3a[i]
                tp[i] = p[i] + h * k3p[i]
            rhs_b(ta, tp, k4a, k4p, ratio, kappa, big_gamma, pump, g2h,
                  n_atoms, den_floor_rel)
            for i in range(m):
                rho_a[i] += sixth * (k1a[i] + 2.0 * (k2a[i] + k3a[i]) + k4a[i])
                p[i] += sixth * (k1p[i] + 2.0 * (k2p[i] + k3p[i]) + k4p[i])
        done += burst
        if not _tail_ok(p, tail_rungs, tail_abs, front_rel):
            break
    return done


@njit(cache=True, nogil=True)
def rk4_run_a(p, h, steps, tail_every, tail_rungs, tail_abs, front_rel,
              adia, kappa, gain_all, work):
    m = p.shape[0]
    k1, k2, k3, k4, tp = work[0], work[1], work[2], work[3], work[4]
    half = 0.5 * h
    sixth = h / 6.0
    done = 0
    while done < steps:
        burst = min(tail_every, steps - done)
        for _ in range(burst):
            rhs_a(p, k1, adia, kappa, gain_all)
            for i in range(m):
                tp[i] = p[i] + half * k1[i]
            rhs_a(tp, k2, adia, kappa, gain_all)
            for i in range(m):
                tp[i] = p[i] + half * k2[i]
            rhs_a(tp, k3, adia, kappa, gain_all)
            for i in range(m):
                tp[i] = p[i] + h * k3[i]
            rhs_a(tp, k4, adia, kappa, gain_all)
            for i in range(m):
                p[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
        done += burst
        if not _tail_ok(p, tail_rungs, tail_abs, front_rel):
            break
    return done
