"""Independent reference computations used by the tests.

Nothing here calls into the package's closed forms, its integrator or its
matrix builders; each routine re-derives its answer by a separate route
(root finding, scipy integration, finite differences, complex arithmetic).
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar


def real_rhs(prm, y, t=0.0, pulse=None):
    """Mean-field equations written in complex form, returned as 4 reals."""
    dc, dm, g, G, k, gm = prm
    a = y[0] + 1j * y[1]
    b = y[2] + 1j * y[3]
    om = 0.0
    if pulse is not None and t < pulse[1]:
        om = pulse[0] * math.cos(math.pi * t / (2 * pulse[1]))
    da = -1j * (dc - 1j * k) * a - 1j * g * b - 1j * G * np.conj(a) - 1j * om
    db = -1j * (dm + gm * abs(b) ** 2 - 1j * gm) * b - 1j * g * a
    return np.array([da.real, da.imag, db.real, db.imag])


def scipy_trajectory(prm, y0, t_end, t_eval=None, pulse=None, rtol=1e-11, atol=1e-13):
    """Reference trajectory from scipy's DOP853."""
    sol = solve_ivp(
        lambda t, y: real_rhs(prm, y, t, pulse),
        (0.0, t_end),
        np.asarray(y0, dtype=float),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
    )
    assert sol.success, sol.message
    return sol


def numeric_jacobian(prm, y, h=1e-6):
    """Central-difference Jacobian of the real 4-component rhs."""
    y = np.asarray(y, dtype=float)
    J = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        J[:, j] = (real_rhs(prm, y + e) - real_rhs(prm, y - e)) / (2 * h)
    return J


def eta(prm):
    dc, dm, g, G, k, gm = prm
    return g * g / (dc * dc + k * k - G * G)


def n_plus_direct(prm, sign=+1):
    """Steady occupation from ``|A'|^2 = (eta G)^2`` solved as a quadratic in n."""
    dc, dm, g, G, k, gm = prm
    e = eta(prm)
    dmp = dm - e * dc
    gp = gm + e * k
    # gm^2 n^2 + 2 gm dmp n + dmp^2 + gp^2 - (e G)^2 = 0
    qa, qb, qc = gm * gm, 2 * gm * dmp, dmp * dmp + gp * gp - (e * G) ** 2
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        return math.nan
    return (-qb + sign * math.sqrt(disc)) / (2 * qa)


def g_c1_root(dc, g, k=1.0, gm=1.0):
    """Drive where the plus/minus roots merge, by bracketing the discriminant."""

    def f(G):
        p = (dc, 1.0, g, G, k, gm)
        e = eta(p)
        return e * G - (gm + e * k)

    return brentq(f, 0.0, math.hypot(dc, k) * (1 - 1e-12), xtol=1e-15, rtol=1e-15)


def g_c2_root(dc, dm, g, k=1.0, gm=1.0):
    """Drive where the plus root passes through zero occupation."""

    def f(G):
        p = (dc, dm, g, G, k, gm)
        e = eta(p)
        # n_plus = 0  <=>  (dm - e dc)^2 + (gm + e k)^2 = (e G)^2
        return (e * G) ** 2 - (dm - e * dc) ** 2 - (gm + e * k) ** 2

    return brentq(f, 0.0, math.hypot(dc, k) * (1 - 1e-9), xtol=1e-15, rtol=1e-15)


def zeta_root(dc, g, k=1.0, gm=1.0):
    """Detuning ratio at which the two critical drives coincide.

    ``G_c2 - G_c1`` touches zero there without changing sign, so the ratio
    is located as a minimizer; expect about 1e-7 accuracy.
    """
    gc1 = g_c1_root(dc, g, k, gm)
    res = minimize_scalar(
        lambda r: g_c2_root(dc, r * dc, g, k, gm) - gc1, bounds=(0.9, 1.1), method="bounded",
        options={"xatol": 1e-12},
    )
    return res.x


def moment_rhs_complex(dc, dm_tilde, g, G, k, gm, F, A):
    """Second-moment equations evaluated with complex arithmetic."""
    A1, A2, A3, A4, A5, A6 = A
    Fc = np.conj(F)
    return np.array(
        [
            -1j * ((dc - dm_tilde) - 1j * (k + gm)) * A1 - 1j * g * (A6 - A5) - 1j * G * np.conj(A2) + 1j * Fc * A2,
            -1j * ((dc + dm_tilde) - 1j * (k + gm)) * A2 - 1j * g * (A3 + A4) - 1j * G * np.conj(A1) - 1j * F * A1,
            -2j * (dc - 1j * k) * A3 - 2j * g * A2 - 1j * G * (2 * A5 + 1),
            -2j * (dm_tilde - 1j * gm) * A4 - 2j * g * A2 - 1j * F * (2 * A6 + 1),
            -2 * k * A5 - 1j * g * (np.conj(A1) - A1) - 1j * G * np.conj(A3) + 1j * G * A3,
            -2 * gm * A6 - 1j * g * (A1 - np.conj(A1)) - 1j * F * np.conj(A4) + 1j * Fc * A4,
        ]
    )


def pack(A):
    out = np.empty(12)
    out[0::2] = np.real(A)
    out[1::2] = np.imag(A)
    return out


def unpack(x):
    x = np.asarray(x, dtype=float)
    return x[0::2] + 1j * x[1::2]


def slope_finite_difference(dc, dm, g, k=1.0, gm=1.0, rel=1e-6, one_sided=False):
    """Centered-difference slope of the plus root (signed) at G_c2.

    Close to zeta the root only exists on one side of G_c2 within a tiny
    distance; ``one_sided`` then uses ``n(G_c2 + h) / h``.
    """
    gc = g_c2_root(dc, dm, g, k, gm)
    h = gc * rel

    def n(G):
        p = (dc, dm, g, G, k, gm)
        e = eta(p)
        disc = (e * G) ** 2 - (gm + e * k) ** 2
        return (-(dm - e * dc) + math.sqrt(disc)) / gm

    if one_sided:
        return n(gc + h) / h
    return (n(gc + h) - n(gc - h)) / (2 * h)


def spectrum_distance(a, b):
    """Largest gap between two eigenvalue sets under the best pairing."""
    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())
