"""Second moments of the linearized fluctuations around a steady state.

The six complex moments

    A1 = <da db+>, A2 = <da db>, A3 = <da da>,
    A4 = <db db>,  A5 = <da+ da>, A6 = <db+ db>

obey a closed linear system once noise cross terms are averaged out.  It is
written here as 12 real equations ``dx/dt = L x - c`` in the unknowns
``x = (Re A1, Im A1, ..., Re A6, Im A6)``; the steady state solves
``L x = c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import SingularSystem
from .params import ScaledState, SystemParams, validate_params
from .stability import linearization_point

__all__ = [
    "FluctuationMoments",
    "MomentSystem",
    "ConditionReport",
    "MomentTrajectory",
    "moment_system",
    "solve_steady_moments",
    "integrate_moments",
    "COND_LIMIT",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class FluctuationMoments:
    a1: complex
    a2: complex
    a3: complex
    a4: complex
    a5: complex
    a6: complex

    @classmethod
    def from_vector(cls, x) -> "FluctuationMoments":
        x = np.asarray(x, dtype=float)
        return cls(*(complex(x[2 * j], x[2 * j + 1]) for j in range(6)))

    def to_vector(self) -> np.ndarray:
        out = np.empty(12)
        for j, a in enumerate(self.as_tuple()):
            out[2 * j], out[2 * j + 1] = a.real, a.imag
        return out

    def as_tuple(self) -> tuple[complex, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a5, self.a6)


@dataclass(frozen=True)
class MomentSystem:
    matrix: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class ConditionReport:
    condition: float
    det_proxy: float


@dataclass(frozen=True)
class MomentTrajectory:
    t: np.ndarray
    x: np.ndarray

    def moments(self, i: int) -> FluctuationMoments:
        return FluctuationMoments.from_vector(self.x[i])


def _block(c: complex, conj: bool) -> np.ndarray:
    # real 2x2 action of z -> c*z (or c*conj(z)) on (Re z, Im z)
    if conj:
        return np.array([[c.real, c.imag], [c.imag, -c.real]])
    return np.array([[c.real, -c.imag], [c.imag, c.real]])


def moment_system(p: SystemParams, state: ScaledState) -> MomentSystem:
    """Real 12x12 form ``(L, c)`` of the moment equations at ``state``."""
    p = validate_params(p)
    lin = linearization_point(p, state)
    dc, k, g, G, gm = p.delta_c, p.kappa, p.g, p.big_g, p.gamma
    dt, F = lin.delta_m_tilde, lin.f_kerr
    Fc = F.conjugate()
    j = 1j
    N, C = False, True
    # (equation, moment, coefficient, acts on conjugate); indices are 1-based
    terms = [
        (1, 1, -j * (dc - dt) - (k + gm), N),
        (1, 6, -j * g, N),
        (1, 5, j * g, N),
        (1, 2, -j * G, C),
        (1, 2, j * Fc, N),
        (2, 2, -j * (dc + dt) - (k + gm), N),
        (2, 3, -j * g, N),
        (2, 4, -j * g, N),
        (2, 1, -j * G, C),
        (2, 1, -j * F, N),
        (3, 3, -2 * j * dc - 2 * k, N),
        (3, 2, -2 * j * g, N),
        (3, 5, -2 * j * G, N),
        (4, 4, -2 * j * dt - 2 * gm, N),
        (4, 2, -2 * j * g, N),
        (4, 6, -2 * j * F, N),
        (5, 5, -2 * k, N),
        (5, 1, -j * g, C),
        (5, 1, j * g, N),
        (5, 3, -j * G, C),
        (5, 3, j * G, N),
        (6, 6, -2 * gm, N),
        (6, 1, -j * g, N),
        (6, 1, j * g, C),
        (6, 4, -j * F, C),
        (6, 4, j * Fc, N),
    ]
    L = np.zeros((12, 12))
    for row, col, coef, conj in terms:
        r, c = 2 * (row - 1), 2 * (col - 1)
        L[r:r + 2, c:c + 2] += _block(complex(coef), conj)
    # constant drive terms -iG (in dA3/dt) and -iF (in dA4/dt)
    d = np.zeros(12)
    d[4:6] = (0.0, -G)
    d[6:8] = ((-j * F).real, (-j * F).imag)
    return MomentSystem(L, -d)


def solve_steady_moments(p: SystemParams, state: ScaledState) -> tuple[FluctuationMoments, ConditionReport]:
    """Steady-state moments by LU with partial pivoting.

    Raises `SingularSystem` on an exactly zero pivot or when the 2-norm
    condition number exceeds ``COND_LIMIT``.
    """
    sysm = moment_system(p, state)
    cond = float(np.linalg.cond(sysm.matrix))
    lu, piv = scipy.linalg.lu_factor(sysm.matrix, check_finite=True)
    diag = np.abs(np.diag(lu))
    det_proxy = float(np.prod(diag))
    if np.any(diag == 0.0) or not np.isfinite(cond):
        raise SingularSystem("moment system is singular", condition=np.inf)
    if cond > COND_LIMIT:
        raise SingularSystem(f"moment system condition number {cond:.3e} exceeds {COND_LIMIT:.0e}", condition=cond)
    x = scipy.linalg.lu_solve((lu, piv), sysm.rhs)
    return FluctuationMoments.from_vector(x), ConditionReport(cond, det_proxy)


def integrate_moments(
    p: SystemParams,
    state: ScaledState,
    x0,
    t_span: tuple[float, float],
    t_eval=None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> MomentTrajectory:
    """Integrate ``dx/dt = L x - c`` as an initial-value problem."""
    sysm = moment_system(p, state)
    L, c = sysm.matrix, sysm.rhs
    if isinstance(x0, FluctuationMoments):
        x0 = x0.to_vector()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (12,):
        raise ValueError("x0 must have 12 real components")
    sol = solve_ivp(
        lambda t, x: L @ x - c,
        t_span,
        x0,
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise ArithmeticError(sol.message)
    return MomentTrajectory(sol.t, sol.y.T.copy())
