# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_kernels_py.py`` for the reference semantics.

Each function takes a numpy ``BitGenerator`` and draws from it through the
numpy C API, consuming exactly the same doubles as the Python twin.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, exp, sin, sqrt
from libc.stdlib cimport free, malloc, realloc
from numpy.random cimport bitgen_t

cdef double BARRIER_TOL = 1e-12


cdef inline bitgen_t* _bitgen(object bitgen) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")


cdef inline double _phase(int code, double p1, double p2, double t) noexcept nogil:
    if code == 1:
        return p1 * t
    if code == 2:
        return p1 * sin(p2 * t)
    return 0.0


cdef struct AfcResult:
    int ok
    long attempts
    double t_end
    double s0r
    double s0i
    double s1r
    double s1i


cdef AfcResult _afc(bitgen_t* rng, double kt, double tau, double step, int code,
                    double p1, double p2, double t, long max_attempts) noexcept nogil:
    cdef AfcResult res
    cdef double mag = exp(-kt)
    cdef double p_ok = exp(-2.0 * kt)
    cdef double u, ph1, ph2, ar, ai, br, bi
    res.attempts = 0
    while max_attempts <= 0 or res.attempts < max_attempts:
        res.attempts += 1
        u = rng.next_double(rng.state)
        if u < p_ok:
            ph1 = _phase(code, p1, p2, t)
            ph2 = _phase(code, p1, p2, t + tau)
            ar = mag * cos(ph1)
            ai = mag * sin(ph1)
            br = mag * cos(ph2)
            bi = mag * sin(ph2)
            res.ok = 1
            res.t_end = t + step
            if u < 0.5 * p_ok:
                res.s0r = br
                res.s0i = bi
                res.s1r = ar
                res.s1i = ai
            else:
                res.s0r = ar
                res.s0i = ai
                res.s1r = br
                res.s1i = bi
            return res
        t = t + step
    res.ok = 0
    res.t_end = t
    res.s0r = 0.0
    res.s0i = 0.0
    res.s1r = 0.0
    res.s1i = 0.0
    return res


def afc_trial(bitgen, double kt, double tau, double step, int code, double p1, double p2,
              double t0, long max_attempts):
    cdef bitgen_t* rng = _bitgen(bitgen)
    cdef AfcResult r
    with nogil:
        r = _afc(rng, kt, tau, step, code, p1, p2, t0, max_attempts)
    return r.ok, r.attempts, r.t_end, r.s0r, r.s0i, r.s1r, r.s1i


def direct_trial(bitgen, double kt, double tau, double step, int code, double p1, double p2,
                 double t0, long max_attempts):
    cdef bitgen_t* rng = _bitgen(bitgen)
    cdef double mag = exp(-kt)
    cdef double p_ok = exp(-2.0 * kt)
    cdef double t = t0
    cdef double ph, re, im
    cdef long attempts = 0
    cdef int ok = 0
    cdef double fid = 0.0
    with nogil:
        while max_attempts <= 0 or attempts < max_attempts:
            attempts += 1
            if rng.next_double(rng.state) < p_ok:
                ph = _phase(code, p1, p2, t)
                re = 0.5 * (1.0 + mag * cos(ph))
                im = 0.5 * (mag * sin(ph))
                fid = re * re + im * im
                t = t + step
                ok = 1
                break
            t = t + step
    return ok, attempts, t, fid


cdef struct Buffer:
    double* data
    long size
    long cap


cdef inline int _push(Buffer* buf, double value) noexcept nogil:
    cdef double* grown
    if buf.size == buf.cap:
        buf.cap = 2 * buf.cap + 16
        grown = <double*> realloc(buf.data, buf.cap * sizeof(double))
        if grown == NULL:
            return -1
        buf.data = grown
    buf.data[buf.size] = value
    buf.size += 1
    return 0


cdef inline double _normalize(double* epr, double* epi, double* emr, double* emi) noexcept nogil:
    cdef double n = sqrt(epr[0] * epr[0] + epi[0] * epi[0] + emr[0] * emr[0] + emi[0] * emi[0])
    epr[0] /= n
    epi[0] /= n
    emr[0] /= n
    emi[0] /= n
    return epr[0] * epr[0] + epi[0] * epi[0]


def purify_trial(bitgen, double kt, double tau, double step, int code, double p1, double p2,
                 double t0, long max_attempts, double f_target, long step_cap, bint barrier,
                 bint record):
    cdef bitgen_t* rng = _bitgen(bitgen)
    cdef Buffer traj
    cdef Buffer resets_buf
    cdef AfcResult r
    cdef int status = 0
    cdef int oom = 0
    cdef long steps = 0, resets = 0, attempts = 0
    cdef double t = t0
    cdef double epr = 0, epi = 0, emr = 0, emi = 0, fid = 0, f0 = 0
    cdef double gpr, gpi, gmr, gmi, gp2, gm2, np2, nm2, up_w, down_w, p_up, u
    cdef double ar, ai, br, bi, xr, xi, yr, yi, n
    traj.data = NULL
    traj.size = 0
    traj.cap = 0
    resets_buf.data = NULL
    resets_buf.size = 0
    resets_buf.cap = 0
    with nogil:
        r = _afc(rng, kt, tau, step, code, p1, p2, t0, max_attempts)
        attempts = r.attempts
        t = r.t_end
        if not r.ok:
            status = 2
        else:
            epr = 0.5 * (r.s0r + r.s1r)
            epi = 0.5 * (r.s0i + r.s1i)
            emr = 0.5 * (r.s0r - r.s1r)
            emi = 0.5 * (r.s0i - r.s1i)
            fid = _normalize(&epr, &epi, &emr, &emi)
            f0 = fid
            if record:
                oom |= _push(&traj, fid)
            if f0 <= 0.5:
                status = 3
        while status == 0 and fid < f_target:
            if steps >= step_cap:
                status = 1
                break
            r = _afc(rng, kt, tau, step, code, p1, p2, t, max_attempts)
            attempts += r.attempts
            t = r.t_end
            if not r.ok:
                status = 2
                break
            gpr = 0.5 * (r.s0r + r.s1r)
            gpi = 0.5 * (r.s0i + r.s1i)
            gmr = 0.5 * (r.s0r - r.s1r)
            gmi = 0.5 * (r.s0i - r.s1i)
            gp2 = gpr * gpr + gpi * gpi
            gm2 = gmr * gmr + gmi * gmi
            np2 = epr * epr + epi * epi
            nm2 = emr * emr + emi * emi
            up_w = gp2 * np2 + gm2 * nm2
            down_w = gm2 * np2 + gp2 * nm2
            p_up = up_w / (up_w + down_w)
            u = rng.next_double(rng.state)
            rng.next_double(rng.state)
            if u < p_up:
                ar = gpr
                ai = gpi
                br = gmr
                bi = gmi
            else:
                ar = gmr
                ai = gmi
                br = gpr
                bi = gpi
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
                r = _afc(rng, kt, tau, step, code, p1, p2, t, max_attempts)
                attempts += r.attempts
                t = r.t_end
                if not r.ok:
                    status = 2
                    break
                epr = 0.5 * (r.s0r + r.s1r)
                epi = 0.5 * (r.s0i + r.s1i)
                emr = 0.5 * (r.s0r - r.s1r)
                emi = 0.5 * (r.s0i - r.s1i)
                fid = _normalize(&epr, &epi, &emr, &emi)
                resets += 1
                if record:
                    oom |= _push(&resets_buf, <double> steps)
            if record:
                oom |= _push(&traj, fid)
    try:
        if oom:
            raise MemoryError("trajectory buffer allocation failed")
        if record:
            traj_out = [traj.data[i] for i in range(traj.size)]
            resets_out = [<long> resets_buf.data[i] for i in range(resets_buf.size)]
        else:
            traj_out = None
            resets_out = None
    finally:
        free(traj.data)
        free(resets_buf.data)
    return status, steps, attempts, resets, fid, t, traj_out, resets_out
