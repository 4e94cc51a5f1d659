"""Parameter and state types for the parametrically driven cavity-magnon model.

All rates and detunings are expressed in units of the cavity decay rate
``kappa`` (normally 1).  Mode amplitudes are measured in units of
``sqrt(gamma/K)``, which removes the Kerr coefficient ``K`` from the
dynamics: the Kerr shift ``K |<b>|^2`` becomes ``gamma * |beta|^2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, fields

from .errors import MissingPhysicalConstants, RejectedDrive, RejectedSign

__all__ = [
    "SystemParams",
    "ValidatedParams",
    "ScaledState",
    "validate_params",
    "decoherence_rate",
    "scaled_occupation_to_physical",
]


@dataclass(frozen=True)
class SystemParams:
    """Model constants.

    Attributes
    ----------
    delta_c, delta_m : float
        Cavity and magnon detunings from half the drive frequency.
    g : float
        Magnon-cavity coupling.
    big_g : float
        Parametric drive strength ``G``.
    kappa, gamma : float
        Cavity decay and magnon damping rates.
    kerr_physical : float, optional
        Kerr coefficient ``K`` in the same absolute units as ``gamma``.
        Only used to convert scaled occupations back to magnon numbers.
    """

    delta_c: float
    delta_m: float
    g: float
    big_g: float
    kappa: float = 1.0
    gamma: float = 1.0
    kerr_physical: float | None = None

    @property
    def drive_bound(self) -> float:
        """Drive strength at which the bare cavity becomes unstable."""
        return math.hypot(self.delta_c, self.kappa)

    @property
    def delta_ratio(self) -> float:
        return self.delta_m / self.delta_c

    def _copy(self, **changes) -> "SystemParams":
        # always drops the validated marker
        return SystemParams(**{**self.as_dict(), **changes})

    def with_drive(self, big_g: float) -> "SystemParams":
        return self._copy(big_g=float(big_g))

    def with_ratio(self, ratio: float) -> "SystemParams":
        """Copy with ``delta_m = ratio * delta_c``."""
        return self._copy(delta_m=float(ratio) * self.delta_c)

    def rescaled(self, s: float) -> "SystemParams":
        """Multiply every rate and detuning by ``s``."""
        return self._copy(
            delta_c=self.delta_c * s,
            delta_m=self.delta_m * s,
            g=self.g * s,
            big_g=self.big_g * s,
            kappa=self.kappa * s,
            gamma=self.gamma * s,
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(SystemParams)}


@dataclass(frozen=True)
class ValidatedParams(SystemParams):
    """`SystemParams` that passed :func:`validate_params`."""


def validate_params(p: SystemParams) -> ValidatedParams:
    """Check the model invariants and return the parameters marked valid.

    Raises
    ------
    RejectedSign
        A rate is not positive, a detuning is not positive, or ``g``/``G``
        is negative.
    RejectedDrive
        ``G >= sqrt(delta_c**2 + kappa**2)``.
    """
    if isinstance(p, ValidatedParams):
        return p
    values = p.as_dict()
    for name in ("delta_c", "delta_m", "g", "big_g", "kappa", "gamma"):
        v = values[name]
        if not math.isfinite(v):
            raise RejectedSign(f"{name} must be finite, got {v!r}")
    for name in ("kappa", "gamma", "delta_c", "delta_m"):
        if values[name] <= 0:
            raise RejectedSign(f"{name} must be > 0, got {values[name]!r}")
    for name in ("g", "big_g"):
        if values[name] < 0:
            raise RejectedSign(f"{name} must be >= 0, got {values[name]!r}")
    if p.kerr_physical is not None and not p.kerr_physical > 0:
        raise RejectedSign(f"kerr_physical must be > 0, got {p.kerr_physical!r}")
    if p.big_g >= p.drive_bound:
        raise RejectedDrive(
            f"drive G={p.big_g!r} must stay below sqrt(delta_c^2+kappa^2)={p.drive_bound!r}"
        )
    return ValidatedParams(**{k: float(v) if k != "kerr_physical" else v for k, v in values.items()})


def decoherence_rate(relaxation: float, dephasing: float = 0.0) -> float:
    """Total decoherence rate from a relaxation rate and a pure-dephasing rate."""
    if relaxation < 0 or dephasing < 0:
        raise RejectedSign("relaxation and dephasing rates must be non-negative")
    return 0.5 * relaxation + dephasing


def scaled_occupation_to_physical(n_scaled: float, gamma: float, kerr_physical: float | None) -> float:
    """Convert an occupation in units of ``gamma/K`` to an absolute number.

    ``gamma`` and ``kerr_physical`` must share units.
    """
    if kerr_physical is None:
        raise MissingPhysicalConstants("kerr_physical is required to convert occupations")
    if not kerr_physical > 0:
        raise RejectedSign(f"kerr_physical must be > 0, got {kerr_physical!r}")
    return n_scaled * (gamma / kerr_physical)


@dataclass(frozen=True)
class ScaledState:
    """Mean-field amplitudes ``(alpha, beta)`` in units of ``sqrt(gamma/K)``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise ValueError(f"non-finite state ({a!r}, {b!r})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def zero(cls) -> "ScaledState":
        return cls(0j, 0j)

    @classmethod
    def from_real(cls, y) -> "ScaledState":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]))

    def as_real(self) -> tuple[float, float, float, float]:
        return (self.alpha.real, self.alpha.imag, self.beta.real, self.beta.imag)

    @property
    def n_magnon(self) -> float:
        """Magnon occupation in units of ``gamma/K``."""
        return abs(self.beta) ** 2

    @property
    def n_photon(self) -> float:
        return abs(self.alpha) ** 2

    def norm(self) -> float:
        return math.hypot(abs(self.alpha), abs(self.beta))

    def __neg__(self) -> "ScaledState":
        return ScaledState(-self.alpha, -self.beta)
