"""Pure-Python Dormand-Prince 5(4) kernel for the scaled mean-field equations.

Mirror of ``_dopri_ext.pyx``; both expose ``integrate`` and ``settle`` with
identical signatures and return layouts.  State vector layout is
``(Re alpha, Im alpha, Re beta, Im beta)``; ``prm`` is the tuple
``(delta_c, delta_m, g, G, kappa, gamma, omega0, tau)`` with ``tau <= 0``
meaning no pulse.
"""

from math import cos, pi, sqrt

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

# dense output: y(t + s h) = y + h * sum_j k_j * (P[j][0] s + P[j][1] s^2 + P[j][2] s^3 + P[j][3] s^4)
P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)

SAFETY, MIN_FACTOR, MAX_FACTOR = 0.9, 0.2, 10.0
# steps are capped at STIFF_CAP / rho(J); without it the controller parks the
# solution a tolerance-sized distance away from stable equilibria
STIFF_CAP = 2.0


def rhs(prm, t, y):
    dc, dm, g, G, k, gm, om, tau = prm
    x1, x2, x3, x4 = y
    w = om * cos(pi * t / (2.0 * tau)) if t < tau else 0.0
    d = dm + gm * (x3 * x3 + x4 * x4)
    return [
        dc * x2 - k * x1 + g * x4 - G * x2,
        -dc * x1 - k * x2 - g * x3 - G * x1 - w,
        d * x4 - gm * x3 + g * x2,
        -d * x3 - gm * x4 - g * x1,
    ]


def _jacobian_bound(prm, y):
    """Gershgorin bound on the spectral radius of the rhs Jacobian at ``y``."""
    dc, dm, g, G, k, gm = prm[:6]
    x3, x4 = y[2], y[3]
    d = dm + gm * (x3 * x3 + x4 * x4)
    cross = 2.0 * gm * x3 * x4
    return max(
        k + abs(dc - G) + g,
        abs(dc + G) + k + g,
        g + abs(cross - gm) + abs(d + 2.0 * gm * x4 * x4),
        g + abs(d + 2.0 * gm * x3 * x3) + abs(cross + gm),
    )


def _rms(v, scale):
    s = 0.0
    for a, b in zip(v, scale):
        s += (a / b) ** 2
    return sqrt(s / 4.0)


def _initial_step(prm, t0, y0, f0, rtol, atol):
    scale = [atol + abs(v) * rtol for v in y0]
    d0 = _rms(y0, scale)
    d1 = _rms(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = [a + h0 * b for a, b in zip(y0, f0)]
    f1 = rhs(prm, t0 + h0, y1)
    d2 = _rms([a - b for a, b in zip(f1, f0)], scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def _step(prm, t, y, k1, h):
    """One trial step; returns (y_new, k_all, err_vec)."""
    y2 = [y[i] + h * A21 * k1[i] for i in range(4)]
    k2 = rhs(prm, t + C2 * h, y2)
    y3 = [y[i] + h * (A31 * k1[i] + A32 * k2[i]) for i in range(4)]
    k3 = rhs(prm, t + C3 * h, y3)
    y4 = [y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in range(4)]
    k4 = rhs(prm, t + C4 * h, y4)
    y5 = [y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]) for i in range(4)]
    k5 = rhs(prm, t + C5 * h, y5)
    y6 = [y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]) for i in range(4)]
    k6 = rhs(prm, t + h, y6)
    yn = [y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]) for i in range(4)]
    k7 = rhs(prm, t + h, yn)
    err = [h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]) for i in range(4)]
    return yn, (k1, k2, k3, k4, k5, k6, k7), err


def _dense(y, h, ks, s):
    q = [0.0] * 7
    for j in range(7):
        pj = P[j]
        q[j] = s * (pj[0] + s * (pj[1] + s * (pj[2] + s * pj[3])))
    return [y[i] + h * sum(ks[j][i] * q[j] for j in range(7)) for i in range(4)]


def _advance(prm, t, y, f, h, t_stop, rtol, atol, h_min, h_max):
    """Take one accepted step.

    Returns ``(t_new, y_new, f_new, h_used, h_next, ks, err_norm, n_rejected, status)``.
    """
    tau = prm[7]
    rejected = 0
    h_max = min(h_max, STIFF_CAP / _jacobian_bound(prm, y))
    while True:
        h = min(h, h_max)
        landing = None
        if t + h >= t_stop:
            h = t_stop - t
            landing = t_stop
        if t < tau < t + h:
            h = tau - t
            landing = tau
        if h < h_min:
            return t, y, f, h, h, None, 0.0, rejected, STATUS_UNDERFLOW
        yn, ks, err = _step(prm, t, y, f, h)
        scale = [atol + max(abs(a), abs(b)) * rtol for a, b in zip(y, yn)]
        en = _rms(err, scale)
        if en <= 1.0:
            fac = MAX_FACTOR if en == 0.0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
            t_new = t + h if landing is None else landing
            return t_new, yn, ks[6], h, h * fac, ks, en, rejected, STATUS_OK
        rejected += 1
        h *= max(MIN_FACTOR, SAFETY * en ** -0.2)


def integrate(prm, y0, t0, t_end, t_eval, rtol, atol, h_min, h_max, max_steps):
    """Integrate from ``t0`` to ``t_end``, sampling at sorted ``t_eval``.

    Returns ``(samples, n_steps, n_rejected, last_error, status)`` with
    ``samples`` a list of 4-lists aligned with ``t_eval``.
    """
    t = float(t0)
    y = [float(v) for v in y0]
    f = rhs(prm, t, y)
    h = _initial_step(prm, t, y, f, rtol, atol)
    t_eval = list(t_eval)
    out = []
    i = 0
    n_eval = len(t_eval)
    while i < n_eval and t_eval[i] <= t:
        out.append(list(y))
        i += 1
    nstep = nrej = 0
    last_err = 0.0
    while t < t_end:
        if nstep >= max_steps:
            return out, nstep, nrej, last_err, STATUS_MAX_STEPS
        t_new, yn, fn, h_used, h, ks, en, rej, status = _advance(
            prm, t, y, f, h, t_end, rtol, atol, h_min, h_max
        )
        nrej += rej
        if status != STATUS_OK:
            return out, nstep, nrej, last_err, status
        nstep += 1
        last_err = en
        while i < n_eval and t_eval[i] <= t_new:
            if t_eval[i] == t_new:
                out.append(list(yn))
            else:
                out.append(_dense(y, h_used, ks, (t_eval[i] - t) / h_used))
            i += 1
        t, y, f = t_new, yn, fn
    return out, nstep, nrej, last_err, STATUS_OK


def settle(prm, y0, t0, t_ready, eps, window, t_max, rtol, atol, h_min, h_max, max_steps):
    """Integrate until the rhs norm stays below ``eps * max(1, |y|)`` for ``window``.

    The window may only open once ``t >= t_ready``.  Returns
    ``(y, t, converged, n_steps, n_rejected, last_error, residual, status)``.
    """
    t = float(t0)
    y = [float(v) for v in y0]
    f = rhs(prm, t, y)
    h = _initial_step(prm, t, y, f, rtol, atol)
    nstep = nrej = 0
    last_err = 0.0
    t_open = -1.0
    opened = False
    resid = sqrt(sum(v * v for v in f))
    while True:
        if t >= t_ready:
            ynorm = sqrt(sum(v * v for v in y))
            if resid < eps * max(1.0, ynorm):
                if not opened:
                    opened = True
                    t_open = t
                elif t - t_open >= window:
                    return y, t, True, nstep, nrej, last_err, resid, STATUS_OK
            else:
                opened = False
        if t >= t_max:
            return y, t, False, nstep, nrej, last_err, resid, STATUS_OK
        if nstep >= max_steps:
            return y, t, False, nstep, nrej, last_err, resid, STATUS_MAX_STEPS
        t, y, f, h_used, h, ks, en, rej, status = _advance(
            prm, t, y, f, h, t_max, rtol, atol, h_min, h_max
        )
        nrej += rej
        if status != STATUS_OK:
            return y, t, False, nstep, nrej, last_err, resid, status
        nstep += 1
        last_err = en
        resid = sqrt(sum(v * v for v in f))
