"""Time-domain integration of the scaled mean-field equations.

The adaptive Dormand-Prince 5(4) kernel lives in two interchangeable
backends: the compiled ``_dopri_ext`` extension and the pure-Python
``_dopri_py`` fallback.  The compiled one is used when importable unless
``CAVMAG_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import importlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import StepSizeUnderflow
from .params import ScaledState, SystemParams, validate_params

__all__ = [
    "PulseSpec",
    "SolverConfig",
    "SettleConfig",
    "Trajectory",
    "SettleDiagnostics",
    "mean_field_rhs",
    "pulse_envelope",
    "integrate",
    "settle",
    "load_backend",
    "BACKEND",
]

_STATUS_UNDERFLOW = 1
_STATUS_MAX_STEPS = 2


def load_backend(name: str | None = None):
    """Return the kernel module ``"compiled"`` or ``"python"``.

    With ``name=None`` the compiled kernel is preferred.
    """
    if name is None:
        if os.environ.get("CAVMAG_PURE_PYTHON", "") not in ("", "0"):
            name = "python"
        else:
            try:
                return importlib.import_module("cavmag._dopri_ext")
            except ImportError:
                name = "python"
    if name == "compiled":
        return importlib.import_module("cavmag._dopri_ext")
    if name == "python":
        return importlib.import_module("cavmag._dopri_py")
    raise ValueError(f"unknown backend {name!r}")


_kernel = load_backend()
BACKEND = "compiled" if _kernel.__name__.endswith("_ext") else "python"


@dataclass(frozen=True)
class PulseSpec:
    """Auxiliary coherent pulse ``Omega(t) = Omega0 cos(pi t / 2 tau)`` for ``t < tau``."""

    omega0: float
    tau: float

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError("omega0 must be >= 0")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    h_min: float = 1e-14
    h_max: float = math.inf
    max_steps: int = 10_000_000


@dataclass(frozen=True)
class SettleConfig:
    eps: float = 1e-8
    window: float = 10.0
    t_max: float = 2000.0
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    steps: int
    rejected: int
    error_estimate: float

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> ScaledState:
        return ScaledState(self.alpha[i], self.beta[i])

    @property
    def n_magnon(self) -> np.ndarray:
        return np.abs(self.beta) ** 2


@dataclass(frozen=True)
class SettleDiagnostics:
    converged: bool
    t_final: float
    steps: int
    rejected: int
    error_estimate: float
    residual: float


def pulse_envelope(ps: PulseSpec | None, t: float) -> float:
    """Pulse amplitude at time ``t``; zero once ``t >= tau``."""
    if ps is None or t >= ps.tau:
        return 0.0
    return ps.omega0 * math.cos(math.pi * t / (2.0 * ps.tau))


def mean_field_rhs(
    p: SystemParams, state: ScaledState, t: float = 0.0, pulse: PulseSpec | None = None
) -> tuple[complex, complex]:
    """Time derivatives ``(d alpha/dt, d beta/dt)`` of the scaled amplitudes."""
    a, b = state.alpha, state.beta
    da = -1j * complex(p.delta_c, -p.kappa) * a - 1j * p.g * b - 1j * p.big_g * a.conjugate()
    w = pulse_envelope(pulse, t)
    if w != 0.0:
        da = da - 1j * w
    db = -1j * complex(p.delta_m + p.gamma * abs(b) ** 2, -p.gamma) * b - 1j * p.g * a
    return da, db


def _prm(p: SystemParams, pulse: PulseSpec | None) -> tuple:
    om, tau = (pulse.omega0, pulse.tau) if pulse is not None else (0.0, 0.0)
    return (p.delta_c, p.delta_m, p.g, p.big_g, p.kappa, p.gamma, om, tau)


def integrate(
    p: SystemParams,
    y0: ScaledState,
    t_span: tuple[float, float],
    solver_cfg: SolverConfig | None = None,
    pulse: PulseSpec | None = None,
    t_eval=None,
    backend=None,
) -> Trajectory:
    """Integrate from ``t_span[0]`` to ``t_span[1]`` with dense output at ``t_eval``.

    ``t_eval`` defaults to the two endpoints.  Raises `StepSizeUnderflow`
    when the controller shrinks the step below ``solver_cfg.h_min``.
    """
    p = validate_params(p)
    cfg = solver_cfg or SolverConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    te = np.array([t0, t1] if t_eval is None else t_eval, dtype=float)
    if te.ndim != 1 or np.any(np.diff(te) <= 0) or te[0] < t0 or te[-1] > t1:
        raise ValueError("t_eval must be strictly increasing inside t_span")
    kernel = _kernel if backend is None else load_backend(backend)
    samples, nstep, nrej, err, status = kernel.integrate(
        _prm(p, pulse), y0.as_real(), t0, t1, te, cfg.rtol, cfg.atol, cfg.h_min, cfg.h_max, cfg.max_steps
    )
    if status == _STATUS_UNDERFLOW:
        raise StepSizeUnderflow(f"step size fell below {cfg.h_min} (after {nstep} steps)")
    if status == _STATUS_MAX_STEPS:
        raise StepSizeUnderflow(f"step budget of {cfg.max_steps} exhausted before t={t1}")
    y = np.asarray(samples, dtype=float).reshape(-1, 4)
    return Trajectory(
        t=te,
        alpha=y[:, 0] + 1j * y[:, 1],
        beta=y[:, 2] + 1j * y[:, 3],
        steps=int(nstep),
        rejected=int(nrej),
        error_estimate=float(err),
    )


def settle(
    p: SystemParams,
    y0: ScaledState,
    pulse: PulseSpec | None = None,
    settle_cfg: SettleConfig | None = None,
    backend=None,
) -> tuple[ScaledState, SettleDiagnostics]:
    """Integrate until the state stops moving.

    Convergence means ``|rhs| < eps * max(1, |state|)`` held continuously
    for ``window`` time units after the pulse (if any) has ended.  Reaching
    ``t_max`` first is reported through ``converged=False``, not raised.
    """
    p = validate_params(p)
    cfg = settle_cfg or SettleConfig()
    s = cfg.solver
    kernel = _kernel if backend is None else load_backend(backend)
    t_ready = pulse.tau if pulse is not None else 0.0
    y, t, converged, nstep, nrej, err, resid, status = kernel.settle(
        _prm(p, pulse), y0.as_real(), 0.0, t_ready, cfg.eps, cfg.window, cfg.t_max,
        s.rtol, s.atol, s.h_min, s.h_max, s.max_steps,
    )
    if status == _STATUS_UNDERFLOW:
        raise StepSizeUnderflow(f"step size fell below {s.h_min} at t={t}")
    diag = SettleDiagnostics(bool(converged), float(t), int(nstep), int(nrej), float(err), float(resid))
    return ScaledState.from_real(y), diag
