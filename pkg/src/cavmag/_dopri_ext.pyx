# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand-Prince 5(4) kernel for the scaled mean-field equations.

Same contract as ``_dopri_py``: see that module for argument layout.
"""

import numpy as np
from libc.math cimport cos, sqrt, fabs, pow, M_PI

cdef enum:
    STATUS_OK = 0
    STATUS_UNDERFLOW = 1
    STATUS_MAX_STEPS = 2

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double P[7][4]
_P = (
    (1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799),
    (0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072),
    (0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632),
    (0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844),
    (0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423),
)
for _j in range(7):
    for _c in range(4):
        P[_j][_c] = _P[_j][_c]

cdef double SAFETY = 0.9, MIN_FACTOR = 0.2, MAX_FACTOR = 10.0
cdef double STIFF_CAP = 2.0


cdef struct Model:
    double dc, dm, g, G, k, gm, om, tau


cdef inline void _rhs(Model* m, double t, double* y, double* out) noexcept nogil:
    cdef double w = 0.0
    if t < m.tau:
        w = m.om * cos(M_PI * t / (2.0 * m.tau))
    cdef double d = m.dm + m.gm * (y[2] * y[2] + y[3] * y[3])
    out[0] = m.dc * y[1] - m.k * y[0] + m.g * y[3] - m.G * y[1]
    out[1] = -m.dc * y[0] - m.k * y[1] - m.g * y[2] - m.G * y[0] - w
    out[2] = d * y[3] - m.gm * y[2] + m.g * y[1]
    out[3] = -d * y[2] - m.gm * y[3] - m.g * y[0]


cdef inline double _jacobian_bound(Model* m, double* y) noexcept nogil:
    cdef double d = m.dm + m.gm * (y[2] * y[2] + y[3] * y[3])
    cdef double cross = 2.0 * m.gm * y[2] * y[3]
    cdef double r = m.k + fabs(m.dc - m.G) + m.g
    cdef double r2 = fabs(m.dc + m.G) + m.k + m.g
    cdef double r3 = m.g + fabs(cross - m.gm) + fabs(d + 2.0 * m.gm * y[3] * y[3])
    cdef double r4 = m.g + fabs(d + 2.0 * m.gm * y[2] * y[2]) + fabs(cross + m.gm)
    if r2 > r:
        r = r2
    if r3 > r:
        r = r3
    if r4 > r:
        r = r4
    return r


cdef inline double _rms(double* v, double* scale) noexcept nogil:
    cdef double s = 0.0, r
    cdef int i
    for i in range(4):
        r = v[i] / scale[i]
        s += r * r
    return sqrt(s / 4.0)


cdef double _initial_step(Model* m, double t0, double* y0, double* f0, double rtol, double atol) noexcept nogil:
    cdef double scale[4]
    cdef double y1[4]
    cdef double f1[4]
    cdef double diff[4]
    cdef int i
    cdef double d0, d1, d2, h0, h1
    for i in range(4):
        scale[i] = atol + fabs(y0[i]) * rtol
    d0 = _rms(y0, scale)
    d1 = _rms(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(4):
        y1[i] = y0[i] + h0 * f0[i]
    _rhs(m, t0 + h0, y1, f1)
    for i in range(4):
        diff[i] = f1[i] - f0[i]
    d2 = _rms(diff, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = h0 * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        h1 = pow(0.01 / (d1 if d1 > d2 else d2), 0.2)
    return h1 if h1 < 100 * h0 else 100 * h0


cdef void _step(Model* m, double t, double* y, double h, double[7][4] k,
                double* yn, double* err) noexcept nogil:
    # k[0] holds f(t, y) on entry
    cdef double ys[4]
    cdef int i
    for i in range(4):
        ys[i] = y[i] + h * A21 * k[0][i]
    _rhs(m, t + C2 * h, ys, k[1])
    for i in range(4):
        ys[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i])
    _rhs(m, t + C3 * h, ys, k[2])
    for i in range(4):
        ys[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i])
    _rhs(m, t + C4 * h, ys, k[3])
    for i in range(4):
        ys[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i])
    _rhs(m, t + C5 * h, ys, k[4])
    for i in range(4):
        ys[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i])
    _rhs(m, t + h, ys, k[5])
    for i in range(4):
        yn[i] = y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i])
    _rhs(m, t + h, yn, k[6])
    for i in range(4):
        err[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i])


cdef inline void _dense(double* y, double h, double[7][4] k, double s, double* out) noexcept nogil:
    cdef double q[7]
    cdef int i, j
    for j in range(7):
        q[j] = s * (P[j][0] + s * (P[j][1] + s * (P[j][2] + s * P[j][3])))
    for i in range(4):
        out[i] = y[i]
        for j in range(7):
            out[i] += h * k[j][i] * q[j]


cdef struct StepResult:
    double t_new, h_used, h_next, err
    int rejected, status


cdef StepResult _advance(Model* m, double t, double* y, double h, double t_stop,
                         double rtol, double atol, double h_min, double h_max,
                         double[7][4] k, double* yn) noexcept nogil:
    """Accepted step from (t, y) with k[0] = f(t, y); fills k and yn."""
    cdef StepResult r
    cdef double err[4]
    cdef double scale[4]
    cdef double en, fac, a, b
    cdef int i, landing
    cdef double land_t = 0.0
    cdef double cap = STIFF_CAP / _jacobian_bound(m, y)
    if cap < h_max:
        h_max = cap
    r.rejected = 0
    while True:
        if h > h_max:
            h = h_max
        landing = 0
        if t + h >= t_stop:
            h = t_stop - t
            landing = 1
            land_t = t_stop
        if t < m.tau and m.tau < t + h:
            h = m.tau - t
            landing = 1
            land_t = m.tau
        if h < h_min:
            r.status = STATUS_UNDERFLOW
            r.t_new = t
            r.h_used = h
            r.h_next = h
            r.err = 0.0
            return r
        _step(m, t, y, h, k, yn, err)
        for i in range(4):
            a = fabs(y[i])
            b = fabs(yn[i])
            scale[i] = atol + (a if a > b else b) * rtol
        en = _rms(err, scale)
        if en <= 1.0:
            if en == 0.0:
                fac = MAX_FACTOR
            else:
                fac = SAFETY * pow(en, -0.2)
                if fac > MAX_FACTOR:
                    fac = MAX_FACTOR
            r.status = STATUS_OK
            r.t_new = land_t if landing else t + h
            r.h_used = h
            r.h_next = h * fac
            r.err = en
            return r
        r.rejected += 1
        fac = SAFETY * pow(en, -0.2)
        if fac < MIN_FACTOR:
            fac = MIN_FACTOR
        h *= fac


cdef Model _model(prm):
    cdef Model m
    m.dc, m.dm, m.g, m.G, m.k, m.gm, m.om, m.tau = [float(v) for v in prm]
    return m


def integrate(prm, y0, double t0, double t_end, t_eval, double rtol, double atol,
              double h_min, double h_max, long max_steps):
    cdef Model m = _model(prm)
    cdef double[::1] te = np.ascontiguousarray(t_eval, dtype=np.float64)
    cdef Py_ssize_t n_eval = te.shape[0]
    out_arr = np.empty((n_eval, 4), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double y[4]
    cdef double yn[4]
    cdef double tmp[4]
    cdef double k[7][4]
    cdef double t = t0, h, last_err = 0.0
    cdef long nstep = 0, nrej = 0
    cdef Py_ssize_t i = 0
    cdef int j
    cdef int status = STATUS_OK
    cdef StepResult r
    for j in range(4):
        y[j] = float(y0[j])
    with nogil:
        _rhs(&m, t, y, k[0])
        h = _initial_step(&m, t, y, k[0], rtol, atol)
        while i < n_eval and te[i] <= t:
            for j in range(4):
                out[i, j] = y[j]
            i += 1
        while t < t_end:
            if nstep >= max_steps:
                status = STATUS_MAX_STEPS
                break
            r = _advance(&m, t, y, h, t_end, rtol, atol, h_min, h_max, k, yn)
            nrej += r.rejected
            if r.status != STATUS_OK:
                status = r.status
                break
            nstep += 1
            last_err = r.err
            while i < n_eval and te[i] <= r.t_new:
                if te[i] == r.t_new:
                    for j in range(4):
                        out[i, j] = yn[j]
                else:
                    _dense(y, r.h_used, k, (te[i] - t) / r.h_used, tmp)
                    for j in range(4):
                        out[i, j] = tmp[j]
                i += 1
            t = r.t_new
            h = r.h_next
            for j in range(4):
                y[j] = yn[j]
                k[0][j] = k[6][j]
    return out_arr[:i].tolist(), nstep, nrej, last_err, status


def settle(prm, y0, double t0, double t_ready, double eps, double window, double t_max,
           double rtol, double atol, double h_min, double h_max, long max_steps):
    cdef Model m = _model(prm)
    cdef double y[4]
    cdef double yn[4]
    cdef double k[7][4]
    cdef double t = t0, h, last_err = 0.0, resid, ynorm, t_open = -1.0
    cdef long nstep = 0, nrej = 0
    cdef int j, opened = 0, converged = 0
    cdef int status = STATUS_OK
    cdef StepResult r
    for j in range(4):
        y[j] = float(y0[j])
    with nogil:
        _rhs(&m, t, y, k[0])
        h = _initial_step(&m, t, y, k[0], rtol, atol)
        resid = sqrt(k[0][0] * k[0][0] + k[0][1] * k[0][1] + k[0][2] * k[0][2] + k[0][3] * k[0][3])
        while True:
            if t >= t_ready:
                ynorm = sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3])
                if resid < eps * (ynorm if ynorm > 1.0 else 1.0):
                    if not opened:
                        opened = 1
                        t_open = t
                    elif t - t_open >= window:
                        converged = 1
                        break
                else:
                    opened = 0
            if t >= t_max:
                break
            if nstep >= max_steps:
                status = STATUS_MAX_STEPS
                break
            r = _advance(&m, t, y, h, t_max, rtol, atol, h_min, h_max, k, yn)
            nrej += r.rejected
            if r.status != STATUS_OK:
                status = r.status
                break
            nstep += 1
            last_err = r.err
            t = r.t_new
            h = r.h_next
            for j in range(4):
                y[j] = yn[j]
                k[0][j] = k[6][j]
            resid = sqrt(k[0][0] * k[0][0] + k[0][1] * k[0][1] + k[0][2] * k[0][2] + k[0][3] * k[0][3])
    return [y[0], y[1], y[2], y[3]], t, bool(converged), nstep, nrej, last_err, resid, status
