"""Parameter sweeps, order-parameter curves and critical-point analysis.

Sweeps fan out over a process pool; results are always merged by index so
the output never depends on the worker count or completion order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import PulseSpec, SettleConfig, mean_field_rhs, settle
from .errors import CavmagError, InsufficientWindow, NotApplicable, ParameterError, SingularSystem
from .fluctuations import solve_steady_moments
from .params import ScaledState, SystemParams, validate_params
from .stability import phase_report, stability_at
from .steady_state import (
    Branch,
    branch_occupations,
    critical_strengths,
    plus_root,
    reconstruct_amplitudes,
)

__all__ = [
    "SweepGrid",
    "PhaseDiagram",
    "CurvePoint",
    "FluctuationPoint",
    "CriticalFit",
    "CriticalSlope",
    "PROTOCOLS",
    "DEFAULT_PULSE",
    "SMALL_SEED",
    "default_workers",
    "phase_diagram",
    "order_parameter_curve",
    "fluctuation_curve",
    "critical_exponent_fit",
    "analytic_critical_slope",
    "refine_g_c2",
]

PROTOCOLS = ("analytic", "ode_smallseed", "ode_pulse")
DEFAULT_PULSE = PulseSpec(omega0=2.0, tau=10.0)
SMALL_SEED = ScaledState(0.001, 0.001)
DEFAULT_FIT_WINDOW = (1e-7, 1e-5)


def default_workers() -> int:
    env = os.environ.get("CAVMAG_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"CAVMAG_WORKERS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def _parallel_map(fn, items, workers):
    items = list(items)
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# -- phase diagram ---------------------------------------------------------


@dataclass(frozen=True)
class SweepGrid:
    template: SystemParams
    g_min: float = 1.5
    g_max: float = 2.6
    g_count: int = 221
    ratio_min: float = 0.0
    ratio_max: float = 1.5
    ratio_count: int = 151

    def __post_init__(self):
        if self.g_count < 2 or self.ratio_count < 2:
            raise ParameterError("grid counts must be >= 2")
        if not self.g_max > self.g_min or not self.ratio_max > self.ratio_min:
            raise ParameterError("grid ranges must be increasing")
        if self.g_min < 0 or self.g_max >= self.template.drive_bound:
            raise ParameterError(
                f"drive range must lie in [0, {self.template.drive_bound!r}), got [{self.g_min}, {self.g_max}]"
            )

    @property
    def g_values(self) -> np.ndarray:
        return np.linspace(self.g_min, self.g_max, self.g_count)

    @property
    def ratio_values(self) -> np.ndarray:
        return np.linspace(self.ratio_min, self.ratio_max, self.ratio_count)


@dataclass(frozen=True)
class PhaseDiagram:
    """Labels indexed ``[ratio_index, g_index]``.

    ``status`` is ``"ok"``, ``"rejected"`` (parameters outside the model's
    validity region) or ``"failed"`` (numerical error); ``labels`` is empty
    for non-ok cells.
    """

    grid: SweepGrid
    labels: np.ndarray
    status: np.ndarray
    margin_trivial: np.ndarray
    margin_plus: np.ndarray

    def label_at(self, big_g: float, ratio: float) -> str:
        i = int(np.argmin(np.abs(self.grid.ratio_values - ratio)))
        j = int(np.argmin(np.abs(self.grid.g_values - big_g)))
        return self.labels[i, j]

    def counts(self) -> dict[str, int]:
        vals, n = np.unique(self.status, return_counts=True)
        return {str(v): int(c) for v, c in zip(vals, n)}


def _phase_cell(p: SystemParams):
    try:
        rep = phase_report(validate_params(p))
    except ParameterError:
        return "", "rejected", math.nan, math.nan
    except (CavmagError, ArithmeticError, ValueError):
        return "", "failed", math.nan, math.nan
    mp = rep.plus.margin if rep.plus is not None else math.nan
    return rep.label.value, "ok", rep.trivial.margin, mp


def _phase_row(args):
    template, ratio, g_values = args
    row_p = template.with_ratio(ratio)
    return [_phase_cell(row_p.with_drive(G)) for G in g_values]


def phase_diagram(grid: SweepGrid, workers: int | None = None) -> PhaseDiagram:
    """Classify every grid cell; per-cell errors become cell status."""
    gv = grid.g_values
    rows = _parallel_map(_phase_row, [(grid.template, r, gv) for r in grid.ratio_values], workers)
    shape = (grid.ratio_count, grid.g_count)
    labels = np.empty(shape, dtype=object)
    status = np.empty(shape, dtype=object)
    mt = np.full(shape, math.nan)
    mp = np.full(shape, math.nan)
    for i, row in enumerate(rows):
        for j, (lab, st, a, b) in enumerate(row):
            labels[i, j], status[i, j], mt[i, j], mp[i, j] = lab, st, a, b
    return PhaseDiagram(grid, labels, status, mt, mp)


# -- order parameter -------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    big_g: float
    n_scaled: float
    branch: str
    settled: bool
    residual: float
    status: str = "ok"


def _identify_branch(p: SystemParams, n: float) -> str:
    best, best_d = "other", math.inf
    for br in branch_occupations(p):
        d = abs(br.n_scaled - n)
        if d < best_d:
            best, best_d = br.kind.value, d
    return best if best_d <= 1e-3 * max(1.0, n) else "other"


def _state_residual(p: SystemParams, s: ScaledState) -> float:
    da, db = mean_field_rhs(p, s)
    return math.hypot(abs(da), abs(db))


def select_stable_branch(p: SystemParams, prefer: str = "broken") -> Branch | None:
    """Stable branch reported by analytic curves.

    ``prefer="broken"`` picks the symmetry-broken branch wherever it is
    stable (where the pulse protocol lands); ``"symmetric"`` keeps the
    trivial branch while it is stable (where a small seed stays).
    """
    rep = phase_report(p)
    plus_ok = rep.plus is not None and rep.plus.stable
    if prefer == "broken":
        order = [(plus_ok, rep.plus_branch), (rep.trivial.stable, branch_occupations(p)[0])]
    elif prefer == "symmetric":
        order = [(rep.trivial.stable, branch_occupations(p)[0]), (plus_ok, rep.plus_branch)]
    else:
        raise ValueError(f"prefer must be 'broken' or 'symmetric', got {prefer!r}")
    for ok, br in order:
        if ok:
            return br
    return None


def _curve_point(args) -> CurvePoint:
    template, G, protocol, pulse, settle_cfg, prefer = args
    try:
        p = validate_params(template.with_drive(G))
    except ParameterError as exc:
        return CurvePoint(G, math.nan, "", False, math.nan, f"rejected: {exc}")
    try:
        if protocol == "analytic":
            br = select_stable_branch(p, prefer)
            if br is None:
                return CurvePoint(G, math.nan, "none", False, math.nan, "unstable")
            state, _ = reconstruct_amplitudes(p, br)
            return CurvePoint(G, br.n_scaled, br.kind.value, True, _state_residual(p, state))
        if protocol == "ode_smallseed":
            state, diag = settle(p, SMALL_SEED, None, settle_cfg)
        elif protocol == "ode_pulse":
            state, diag = settle(p, ScaledState.zero(), pulse or DEFAULT_PULSE, settle_cfg)
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
        n = state.n_magnon
        return CurvePoint(
            G, n, _identify_branch(p, n), diag.converged, diag.residual, "ok" if diag.converged else "not_settled"
        )
    except (CavmagError, ArithmeticError) as exc:
        return CurvePoint(G, math.nan, "", False, math.nan, f"failed: {exc}")


def order_parameter_curve(
    p_template: SystemParams,
    g_values,
    protocol: str = "analytic",
    pulse: PulseSpec | None = None,
    settle_cfg: SettleConfig | None = None,
    prefer: str = "broken",
    workers: int | None = None,
) -> list[CurvePoint]:
    """Steady magnon occupation versus drive strength.

    ``analytic`` evaluates the closed-form branches; ``ode_smallseed``
    settles from ``(0.001, 0.001)``; ``ode_pulse`` settles from rest under
    the auxiliary pulse (default ``Omega0=2``, ``tau=10``).
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    tasks = [(p_template, float(G), protocol, pulse, settle_cfg, prefer) for G in g_values]
    return _parallel_map(_curve_point, tasks, workers)


# -- fluctuations ----------------------------------------------------------


@dataclass(frozen=True)
class FluctuationPoint:
    big_g: float
    branch: str
    a5: float
    a6: float
    condition: float
    status: str = "ok"


def _fluct_point(args) -> FluctuationPoint:
    template, G, prefer = args
    try:
        p = validate_params(template.with_drive(G))
        br = select_stable_branch(p, prefer)
    except ParameterError as exc:
        return FluctuationPoint(G, "", math.nan, math.nan, math.nan, f"rejected: {exc}")
    if br is None:
        return FluctuationPoint(G, "none", math.nan, math.nan, math.nan, "unstable")
    state, _ = reconstruct_amplitudes(p, br)
    try:
        m, rep = solve_steady_moments(p, state)
    except SingularSystem as exc:
        return FluctuationPoint(G, br.kind.value, math.nan, math.nan, exc.condition, "singular")
    return FluctuationPoint(G, br.kind.value, m.a5.real, m.a6.real, rep.condition)


def fluctuation_curve(
    p_template: SystemParams, g_values, prefer: str = "broken", workers: int | None = None
) -> list[FluctuationPoint]:
    """``<db+ db>`` (and ``<da+ da>``) on the stable branch at each drive."""
    tasks = [(p_template, float(G), prefer) for G in g_values]
    return _parallel_map(_fluct_point, tasks, workers)


# -- critical behaviour ----------------------------------------------------


class CriticalSlope(NamedTuple):
    eta_c: float
    lambda1: float
    lambda2: float
    slope: float


@dataclass(frozen=True)
class CriticalFit:
    nu: float
    prefactor: float
    eta_c: float
    lambda1: float
    lambda2: float
    analytic_slope: float
    g_c2: float
    offsets: np.ndarray = field(repr=False)
    delta_n: np.ndarray = field(repr=False)


def analytic_critical_slope(p_template: SystemParams) -> CriticalSlope:
    """Linear coefficient of the occupation just above ``G_c2``.

    Raises `NotApplicable` when ``G_c2`` is outside the physical window or
    the square root in the expansion has a non-positive radicand.
    """
    p = validate_params(p_template.with_drive(0.0))
    cs = critical_strengths(p)
    if not cs.g_c2_applicable:
        raise NotApplicable("G_c2 is not applicable for these parameters")
    gc = cs.g_c2
    k, gm, dc = p.kappa, p.gamma, p.delta_c
    eta_c = p.g ** 2 / (dc ** 2 + k ** 2 - gc ** 2)
    lam1 = 2 * eta_c ** 2 * gc / p.g ** 2
    radicand = (eta_c * gc) ** 2 - (gm + eta_c * k) ** 2
    if not radicand > 0:
        raise NotApplicable(f"expansion radicand {radicand!r} is not positive")
    lam2 = (eta_c * gc * (eta_c + lam1 * gc) - lam1 * k * (gm + eta_c * k)) / math.sqrt(radicand)
    return CriticalSlope(eta_c, lam1, lam2, (lam1 * dc + lam2) / gm)


def refine_g_c2(p_template: SystemParams, half_width: float = 1e-6, tol: float = 1e-12) -> float:
    """Closed-form ``G_c2`` polished by bisection on the trivial-branch margin.

    Falls back to the closed form when the bracket shows no sign change.
    """
    p = validate_params(p_template.with_drive(0.0))
    cs = critical_strengths(p)
    if not cs.g_c2_applicable:
        raise NotApplicable("G_c2 is not applicable for these parameters")

    def margin(G):
        return stability_at(p.with_drive(G), ScaledState.zero()).margin

    lo, hi = cs.g_c2 - half_width, min(cs.g_c2 + half_width, np.nextafter(p.drive_bound, 0))
    m_lo, m_hi = margin(lo), margin(hi)
    if not (m_lo < 0 < m_hi):
        return cs.g_c2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_exponent_fit(
    p_template: SystemParams,
    side_window: tuple[float, float] = DEFAULT_FIT_WINDOW,
    n_points: int = 21,
) -> CriticalFit:
    """Fit ``delta_n ~ (G - G_c2)^nu`` on log-spaced relative offsets above ``G_c2``.

    ``prefactor`` is the least-squares coefficient of ``delta_n`` against
    ``G - G_c2`` (line through the origin), for comparison with the
    analytic slope.
    """
    p = validate_params(p_template.with_drive(0.0))
    cs = critical_strengths(p)
    if p.delta_ratio <= cs.zeta:
        raise NotApplicable(f"detuning ratio {p.delta_ratio!r} is not above zeta={cs.zeta!r}")
    slope = analytic_critical_slope(p)
    gc = refine_g_c2(p)
    lo, hi = side_window
    if not 0 < lo < hi:
        raise ValueError("side_window must satisfy 0 < lo < hi")
    offsets = np.geomspace(lo, hi, n_points)
    n_c = plus_root(p.with_drive(gc))
    dG, dn = [], []
    for r in offsets:
        G = gc * (1 + r)
        try:
            n = plus_root(p.with_drive(G))
        except ParameterError:
            continue
        d = n - n_c
        if math.isfinite(d) and d > 0:
            dG.append(G - gc)
            dn.append(d)
    if len(dG) < 5:
        raise InsufficientWindow(f"only {len(dG)} usable points in window {side_window}")
    dG, dn = np.array(dG), np.array(dn)
    nu, _ = np.polyfit(np.log(dG), np.log(dn), 1)
    prefactor = float(dn @ dG / (dG @ dG))
    return CriticalFit(
        nu=float(nu),
        prefactor=prefactor,
        eta_c=slope.eta_c,
        lambda1=slope.lambda1,
        lambda2=slope.lambda2,
        analytic_slope=slope.slope,
        g_c2=gc,
        offsets=dG / gc,
        delta_n=dn,
    )
