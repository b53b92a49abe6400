"""Pure-Python twin of ``_kernels.pyx``.

Both backends consume the same bit generator in the same order and perform
the same floating-point operations, so they return identical results for a
given substream. Complex numbers are carried as explicit (re, im) pairs to
keep the operation order fixed.

Jitter codes: 0 none, 1 linear drift ``p1 * t``, 2 sinusoid ``p1 * sin(p2 * t)``.

Purification status codes: 0 target reached, 1 step cap hit, 2 AFC retries
exhausted, 3 initial fidelity not above 1/2.
"""

from math import cos, exp, sin, sqrt

import numpy as np

BARRIER_TOL = 1e-12


def _phase(code, p1, p2, t):
    if code == 1:
        return p1 * t
    if code == 2:
        return p1 * sin(p2 * t)
    return 0.0


def _afc(g, kt, tau, step, code, p1, p2, t, max_attempts):
    """Returns (ok, attempts, t_end, s0r, s0i, s1r, s1i)."""
    mag = exp(-kt)
    p_ok = exp(-2.0 * kt)
    attempts = 0
    while max_attempts <= 0 or attempts < max_attempts:
        attempts += 1
        u = g.random()
        if u < p_ok:
            ph1 = _phase(code, p1, p2, t)
            ph2 = _phase(code, p1, p2, t + tau)
            ar, ai = mag * cos(ph1), mag * sin(ph1)
            br, bi = mag * cos(ph2), mag * sin(ph2)
            if u < 0.5 * p_ok:
                return 1, attempts, t + step, br, bi, ar, ai
            return 1, attempts, t + step, ar, ai, br, bi
        t = t + step
    return 0, attempts, t, 0.0, 0.0, 0.0, 0.0


def afc_trial(bitgen, kt, tau, step, code, p1, p2, t0, max_attempts):
    """One AFC transmission with retries on a fresh substream."""
    return _afc(np.random.Generator(bitgen), kt, tau, step, code, p1, p2, t0, max_attempts)


def direct_trial(bitgen, kt, tau, step, code, p1, p2, t0, max_attempts):
    """Heralded single-photon sends until arrival.

    Returns (ok, attempts, t_end, fidelity) where fidelity is the Phi+
    overlap ``|(1 + T1(t))/2|^2`` of an uncorrected pair at the final start time.
    """
    g = np.random.Generator(bitgen)
    mag = exp(-kt)
    p_ok = exp(-2.0 * kt)
    t = t0
    attempts = 0
    while max_attempts <= 0 or attempts < max_attempts:
        attempts += 1
        if g.random() < p_ok:
            ph = _phase(code, p1, p2, t)
            re = 0.5 * (1.0 + mag * cos(ph))
            im = 0.5 * (mag * sin(ph))
            return 1, attempts, t + step, re * re + im * im
        t = t + step
    return 0, attempts, t, 0.0


def purify_trial(bitgen, kt, tau, step, code, p1, p2, t0, max_attempts,
                 f_target, step_cap, barrier, record):
    """Self-purification random walk with a reflecting barrier at the first fidelity.

    Returns (status, steps, attempts, resets, fidelity, t_end, trajectory,
    reset_steps); the last two are lists when ``record`` is true, else None.
    """
    g = np.random.Generator(bitgen)
    traj = [] if record else None
    reset_steps = [] if record else None
    ok, attempts, t, s0r, s0i, s1r, s1i = _afc(g, kt, tau, step, code, p1, p2, t0, max_attempts)
    if not ok:
        return 2, 0, attempts, 0, 0.0, t, traj, reset_steps
    epr = 0.5 * (s0r + s1r)
    epi = 0.5 * (s0i + s1i)
    emr = 0.5 * (s0r - s1r)
    emi = 0.5 * (s0i - s1i)
    n = sqrt(epr * epr + epi * epi + emr * emr + emi * emi)
    epr /= n
    epi /= n
    emr /= n
    emi /= n
    fid = epr * epr + epi * epi
    f0 = fid
    if record:
        traj.append(fid)
    if f0 <= 0.5:
        return 3, 0, attempts, 0, fid, t, traj, reset_steps
    steps = 0
    resets = 0
    while fid < f_target:
        if steps >= step_cap:
            return 1, steps, attempts, resets, fid, t, traj, reset_steps
        ok, k, t, s0r, s0i, s1r, s1i = _afc(g, kt, tau, step, code, p1, p2, t, max_attempts)
        attempts += k
        if not ok:
            return 2, steps, attempts, resets, fid, t, traj, reset_steps
        gpr = 0.5 * (s0r + s1r)
        gpi = 0.5 * (s0i + s1i)
        gmr = 0.5 * (s0r - s1r)
        gmi = 0.5 * (s0i - s1i)
        gp2 = gpr * gpr + gpi * gpi
        gm2 = gmr * gmr + gmi * gmi
        np2 = epr * epr + epi * epi
        nm2 = emr * emr + emi * emi
        up_w = gp2 * np2 + gm2 * nm2
        down_w = gm2 * np2 + gp2 * nm2
        p_up = up_w / (up_w + down_w)
        u = g.random()
        g.random()  # local outcome within the parity class; does not act on the pair
        if u < p_up:
            ar, ai, br, bi = gpr, gpi, gmr, gmi
        else:
            ar, ai, br, bi = gmr, gmi, gpr, gpi
        xr = epr * ar - epi * ai
        xi = epr * ai + epi * ar
        yr = emr * br - emi * bi
        yi = emr * bi + emi * br
        n = sqrt(xr * xr + xi * xi + yr * yr + yi * yi)
        epr = xr / n
        epi = xi / n
        emr = yr / n
        emi = yi / n
        fid = epr * epr + epi * epi
        steps += 1
        if barrier and fid < f0 - BARRIER_TOL:
            ok, k, t, s0r, s0i, s1r, s1i = _afc(g, kt, tau, step, code, p1, p2, t, max_attempts)
            attempts += k
            if not ok:
                return 2, steps, attempts, resets, fid, t, traj, reset_steps
            epr = 0.5 * (s0r + s1r)
            epi = 0.5 * (s0i + s1i)
            emr = 0.5 * (s0r - s1r)
            emi = 0.5 * (s0i - s1i)
            n = sqrt(epr * epr + epi * epi + emr * emr + emi * emi)
            epr /= n
            epi /= n
            emr /= n
            emi /= n
            fid = epr * epr + epi * epi
            resets += 1
            if record:
                reset_steps.append(steps)
        if record:
            traj.append(fid)
    return 0, steps, attempts, resets, fid, t, traj, reset_steps
