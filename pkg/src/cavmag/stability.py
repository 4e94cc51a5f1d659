"""Linear stability of mean-field steady states and phase classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure
from .params import ScaledState, SystemParams, validate_params
from .steady_state import Branch, BranchKind, branch_occupations, reconstruct_amplitudes

__all__ = [
    "EPS_STAB",
    "LinearizationPoint",
    "StabilityReport",
    "PhaseLabel",
    "PhaseReport",
    "linearization_point",
    "fluctuation_matrix",
    "eigenvalues4",
    "stability_at",
    "branch_stability",
    "classify_phase",
    "phase_report",
    "characteristic_polynomial",
    "routh_hurwitz_stable",
]

EPS_STAB = 1e-9


@dataclass(frozen=True)
class LinearizationPoint:
    """Kerr-shifted magnon detuning and the squeezing term ``F = gamma beta^2``."""

    delta_m_tilde: float
    f_kerr: complex


@dataclass(frozen=True)
class StabilityReport:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    stable: bool
    margin: float
    marginal: bool


class PhaseLabel(str, enum.Enum):
    PSP = "PSP"
    PSBP = "PSBP"
    BP = "BP"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class PhaseReport:
    label: PhaseLabel
    trivial: StabilityReport
    plus: StabilityReport | None
    plus_branch: Branch | None


def linearization_point(p: SystemParams, state: ScaledState) -> LinearizationPoint:
    n = abs(state.beta) ** 2
    return LinearizationPoint(p.delta_m + 2 * p.gamma * n, p.gamma * state.beta ** 2)


def fluctuation_matrix(p: SystemParams, state: ScaledState) -> np.ndarray:
    """4x4 matrix of the linearized dynamics of ``(da, db, da^+, db^+)``."""
    p = validate_params(p)
    lin = linearization_point(p, state)
    dc, k, g, G, gm = p.delta_c, p.kappa, p.g, p.big_g, p.gamma
    dt, f = lin.delta_m_tilde, lin.f_kerr
    return np.array(
        [
            [-1j * dc - k, -1j * g, -1j * G, 0],
            [-1j * g, -1j * dt - gm, 0, -1j * f],
            [1j * G, 0, 1j * dc - k, 1j * g],
            [0, 1j * np.conj(f), 1j * g, 1j * dt - gm],
        ],
        dtype=complex,
    )


def _order(ev: np.ndarray, tol: float) -> np.ndarray:
    # real parts closer than tol count as tied; ties go by descending imag
    ev = ev[np.argsort(-ev.real, kind="stable")]
    out, group = [], [ev[0]]
    for z in ev[1:]:
        if group[-1].real - z.real <= tol:
            group.append(z)
        else:
            out.extend(sorted(group, key=lambda w: -w.imag))
            group = [z]
    out.extend(sorted(group, key=lambda w: -w.imag))
    return np.array(out)


def eigenvalues4(m: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by descending real part, then descending imaginary part.

    Real parts within ``1e-12 * max(1, |m|)`` of each other are treated as
    tied so rounding cannot reorder conjugate pairs.  LAPACK's
    Hessenberg/shifted-QR driver does the work.
    """
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return _order(ev, 1e-12 * max(1.0, float(np.abs(m).max())))


def _report(m: np.ndarray, eps: float) -> StabilityReport:
    ev = eigenvalues4(m)
    margin = float(ev.real.max())
    return StabilityReport(m, ev, margin < -eps, margin, abs(margin) < eps)


def stability_at(p: SystemParams, state: ScaledState, eps: float = EPS_STAB) -> StabilityReport:
    return _report(fluctuation_matrix(p, state), eps * validate_params(p).kappa)


def branch_stability(p: SystemParams, br: Branch, eps: float = EPS_STAB) -> StabilityReport:
    """Stability verdict for ``br``; identical for both parity partners."""
    state, _ = reconstruct_amplitudes(p, br)
    return stability_at(p, state, eps)


def phase_report(p: SystemParams, eps: float = EPS_STAB) -> PhaseReport:
    p = validate_params(p)
    branches = branch_occupations(p)
    trivial = branch_stability(p, branches[0], eps)
    plus_br = next((b for b in branches if b.kind is BranchKind.PLUS), None)
    plus = branch_stability(p, plus_br, eps) if plus_br is not None else None
    plus_stable = plus is not None and plus.stable
    if trivial.stable:
        label = PhaseLabel.BP if plus_stable else PhaseLabel.PSP
    else:
        label = PhaseLabel.PSBP if plus_stable else PhaseLabel.UNSTABLE
    return PhaseReport(label, trivial, plus, plus_br)


def classify_phase(p: SystemParams, eps: float = EPS_STAB) -> PhaseLabel:
    return phase_report(p, eps).label


def characteristic_polynomial(m: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest power first.

    For the fluctuation matrix the spectrum is closed under conjugation, so
    the coefficients are real up to rounding; the real part is returned.
    """
    coeffs = np.poly(np.asarray(m, dtype=complex))
    return np.real(coeffs)


def routh_hurwitz_stable(coeffs) -> bool:
    """Hurwitz test for a real quartic ``a0 s^4 + a1 s^3 + a2 s^2 + a3 s + a4``."""
    a0, a1, a2, a3, a4 = (float(c) for c in coeffs)
    if a0 < 0:
        a0, a1, a2, a3, a4 = -a0, -a1, -a2, -a3, -a4
    if min(a0, a1, a2, a3, a4) <= 0:
        return False
    h2 = a1 * a2 - a0 * a3
    h3 = a3 * h2 - a1 * a1 * a4
    return h2 > 0 and h3 > 0
