"""Closed-form steady states of the mean-field equations.

Occupations are returned in units of ``gamma/K``; amplitudes in units of
``sqrt(gamma/K)``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import NumericalInconsistency, ZeroCoupling
from .params import ScaledState, SystemParams, validate_params

__all__ = [
    "DerivedQuantities",
    "CriticalStrengths",
    "BranchKind",
    "Branch",
    "derived_quantities",
    "critical_strengths",
    "branch_occupations",
    "plus_root",
    "reconstruct_amplitudes",
    "photon_occupation",
]

MODULUS_TOL = 1e-8


@dataclass(frozen=True)
class DerivedQuantities:
    """Cavity-eliminated coupling ``eta`` and the shifted magnon detuning/damping."""

    eta: float
    delta_m_prime: float
    gamma_prime: float


@dataclass(frozen=True)
class CriticalStrengths:
    zeta: float
    g_c1: float
    g_c2: float
    g_c2_applicable: bool


class BranchKind(str, enum.Enum):
    TRIVIAL = "trivial"
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class Branch:
    kind: BranchKind
    n_scaled: float

    def __post_init__(self):
        if self.n_scaled < 0 or not math.isfinite(self.n_scaled):
            raise ValueError(f"branch occupation must be finite and >= 0, got {self.n_scaled!r}")
        if self.kind is BranchKind.TRIVIAL and self.n_scaled != 0:
            raise ValueError("trivial branch has zero occupation")


TRIVIAL = Branch(BranchKind.TRIVIAL, 0.0)


def _cavity_denominator(p: SystemParams) -> float:
    return p.delta_c ** 2 + p.kappa ** 2 - p.big_g ** 2


def derived_quantities(p: SystemParams) -> DerivedQuantities:
    p = validate_params(p)
    eta = p.g ** 2 / _cavity_denominator(p)
    return DerivedQuantities(
        eta=eta,
        delta_m_prime=p.delta_m - eta * p.delta_c,
        gamma_prime=p.gamma + eta * p.kappa,
    )


def critical_strengths(p: SystemParams) -> CriticalStrengths:
    """Detuning-ratio threshold ``zeta`` and critical drives ``G_c1``, ``G_c2``.

    ``p.big_g`` is ignored.  ``G_c2`` is NaN when its radicand is negative;
    ``g_c2_applicable`` is False then, and also when ``G_c2`` reaches the
    bare-cavity bound ``sqrt(delta_c**2 + kappa**2)``.
    """
    p = validate_params(p.with_drive(0.0))
    dc, dm, g, k, gm = p.delta_c, p.delta_m, p.g, p.kappa, p.gamma
    g2 = g * g
    cav = dc * dc + k * k

    zeta = 2 * gm * gm / (math.sqrt(4 * cav * gm * gm + (4 * k * gm + g2) * g2) - (2 * k * gm + g2))
    g_c1 = math.sqrt(cav + (4 * k * gm + g2) * g2 / (4 * gm * gm)) - g2 / (2 * gm)

    radicand = cav - (2 * dc * dm - 2 * k * gm - g2) * g2 / (dm * dm + gm * gm)
    if radicand < 0:
        return CriticalStrengths(zeta, g_c1, math.nan, False)
    g_c2 = math.sqrt(radicand)
    return CriticalStrengths(zeta, g_c1, g_c2, g_c2 < math.sqrt(cav))


def plus_root(p: SystemParams, sign: int = +1) -> float:
    """Raw ``(-delta_m' +/- sqrt(eta^2 G^2 - gamma'^2)) / gamma``.

    NaN when the discriminant is negative; may be negative.  Used where the
    signed value matters (critical-point fitting).
    """
    d = derived_quantities(p)
    p = validate_params(p)
    disc = (d.eta * p.big_g) ** 2 - d.gamma_prime ** 2
    if disc < 0:
        return math.nan
    return (-d.delta_m_prime + sign * math.sqrt(disc)) / p.gamma


def branch_occupations(p: SystemParams) -> list[Branch]:
    """All steady-state branches at ``p``: trivial first, then plus, then minus."""
    p = validate_params(p)
    out = [TRIVIAL]
    for kind, sign in ((BranchKind.PLUS, +1), (BranchKind.MINUS, -1)):
        n = plus_root(p, sign)
        if n == n and n >= 0:
            out.append(Branch(kind, n))
    return out


def find_branch(p: SystemParams, kind: BranchKind) -> Branch | None:
    for br in branch_occupations(p):
        if br.kind is kind:
            return br
    return None


def reconstruct_amplitudes(p: SystemParams, br: Branch) -> tuple[ScaledState, ScaledState]:
    """Fixed point ``(alpha, beta)`` on branch ``br`` and its parity partner.

    The phase of beta follows from ``exp(-2i theta) = -A'/(eta G)`` with
    ``A' = delta_m' + gamma |beta|^2 - i gamma'``; the principal root
    ``theta`` in ``(-pi/2, pi/2]`` comes first.  The trivial branch returns
    two zero states.
    """
    p = validate_params(p)
    if br.kind is BranchKind.TRIVIAL or br.n_scaled == 0.0:
        z = ScaledState.zero()
        return z, z
    d = derived_quantities(p)
    a_prime = complex(d.delta_m_prime + p.gamma * br.n_scaled, -d.gamma_prime)
    eta_g = d.eta * p.big_g
    if eta_g == 0:
        raise NumericalInconsistency("non-trivial branch requires eta * G > 0")
    phase = -a_prime / eta_g
    if abs(abs(phase) - 1.0) > MODULUS_TOL:
        raise NumericalInconsistency(
            f"|A'/(eta G)| = {abs(phase)!r} differs from 1; branch does not belong to these parameters"
        )
    theta = -0.5 * cmath.phase(phase)
    if theta <= -math.pi / 2:
        theta += math.pi
    beta = math.sqrt(br.n_scaled) * cmath.exp(1j * theta)
    alpha = p.g * (-complex(p.delta_c, p.kappa) * beta + p.big_g * beta.conjugate()) / _cavity_denominator(p)
    s = ScaledState(alpha, beta)
    return s, -s


def photon_occupation(p: SystemParams, n_magnon_scaled: float) -> float:
    """Steady-state cavity occupation implied by a magnon occupation."""
    p = validate_params(p)
    n = n_magnon_scaled
    if n < 0:
        raise ValueError("occupation must be non-negative")
    if n == 0:
        return 0.0
    if p.g == 0:
        raise ZeroCoupling("photon occupation undefined for g = 0 with n > 0")
    return ((p.delta_m + p.gamma * n) ** 2 + p.gamma ** 2) * n / p.g ** 2
