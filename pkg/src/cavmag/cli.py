"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failures above
``failure_threshold``, 4 I/O error.  Errors go to stderr as
``cavmag: error E_<CODE>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .config import COMMANDS, RunConfig, config_from_dict, merge_overrides, read_raw
from .dynamics import SolverConfig, integrate
from .errors import CavmagError, ConfigParse, InsufficientWindow, NotApplicable, ParameterError
from .output import (
    EVOLVE_COLUMNS,
    FIT_COLUMNS,
    FLUCT_COLUMNS,
    ORDER_COLUMNS,
    PHASE_COLUMNS,
    OutputWriter,
    RunManifest,
    gnuplot_script,
)
from .params import ScaledState
from .steady_state import critical_strengths
from .sweep import critical_exponent_fit, fluctuation_curve, order_parameter_curve, phase_diagram

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class NumericalFailures(Exception):
    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = counts


def _err(code: str, msg: str) -> None:
    print(f"cavmag: error {code}: {msg}", file=sys.stderr)


# -- argument parsing ------------------------------------------------------

# (flag, config block, config key, type, nargs)
_PARAM_FLAGS = [
    ("--delta-c", "params", "delta_c", float, None),
    ("--delta-m", "params", "delta_m", float, None),
    ("--delta-ratio", "params", "delta_ratio", float, None),
    ("--g", "params", "g", float, None),
    ("--drive", "params", "G", float, None),
    ("--G-over-kappa", "params", "G_over_kappa", float, None),
    ("--kappa", "params", "kappa", float, None),
    ("--kappa-r", "params", "kappa_r", float, None),
    ("--kappa-phi", "params", "kappa_phi", float, None),
    ("--gamma", "params", "gamma", float, None),
    ("--gamma-r", "params", "gamma_r", float, None),
    ("--gamma-phi", "params", "gamma_phi", float, None),
    ("--kerr", "params", "kerr", float, None),
]
_TOL_FLAGS = [
    ("--rtol", "tolerances", "rtol", float, None),
    ("--atol", "tolerances", "atol", float, None),
    ("--eps", "tolerances", "eps", float, None),
    ("--settle-window", "tolerances", "window", float, None),
    ("--t-max", "tolerances", "t_max", float, None),
]
_GRID_FLAGS = [
    ("--g-min", "grid", "g_min", float, None),
    ("--g-max", "grid", "g_max", float, None),
    ("--g-count", "grid", "g_count", int, None),
    ("--ratio-min", "grid", "ratio_min", float, None),
    ("--ratio-max", "grid", "ratio_max", float, None),
    ("--ratio-count", "grid", "ratio_count", int, None),
]
_CURVE_FLAGS = [
    ("--g-min", "curve", "g_min", float, None),
    ("--g-max", "curve", "g_max", float, None),
    ("--g-count", "curve", "g_count", int, None),
]
_PULSE_FLAGS = [
    ("--omega0", "pulse", "omega0", float, None),
    ("--tau", "pulse", "tau", float, None),
]
_EVOLVE_FLAGS = [
    ("--t-end", "evolve", "t_end", float, None),
    ("--n-samples", "evolve", "n_samples", int, None),
    ("--alpha0", "evolve", "alpha0", float, 2),
    ("--beta0", "evolve", "beta0", float, 2),
]
_FIT_FLAGS = [
    ("--window", "fit", "window", float, 2),
    ("--n-points", "fit", "n_points", int, None),
]


def _dest(block, key):
    return f"ov__{block}__{key}"


def _add(parser, specs):
    for flag, block, key, typ, nargs in specs:
        kw = {"type": typ, "default": None, "dest": _dest(block, key)}
        if nargs:
            kw["nargs"] = nargs
            kw["metavar"] = ("A", "B")
        parser.add_argument(flag, **kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cavmag",
        description="Mean-field phases of a parametrically driven cavity-magnon system.",
        epilog="Precedence: built-in defaults < --config file < command-line flags.",
    )
    ap.add_argument("--version", action="version", version=f"cavmag {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", dest=_dest("top", "output_dir"), default=None, help="output directory")
    common.add_argument("--workers", dest=_dest("top", "workers"), type=int, default=None)
    common.add_argument(
        "--failure-threshold", dest=_dest("top", "failure_threshold"), type=float, default=None,
        help="largest tolerated fraction of failed cells (default 0)",
    )
    _add(common, _PARAM_FLAGS)
    _add(common, _TOL_FLAGS)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("phase-diagram", parents=[common], help="classify a (G, Delta_m/Delta_c) grid")
    _add(sp, _GRID_FLAGS)
    sp = sub.add_parser("order-parameter", parents=[common], help="steady occupation versus G")
    _add(sp, _CURVE_FLAGS)
    _add(sp, _PULSE_FLAGS)
    sp.add_argument("--protocol", dest=_dest("curve", "protocol"), choices=("analytic", "ode_smallseed", "ode_pulse"))
    sp.add_argument("--prefer", dest=_dest("curve", "prefer"), choices=("broken", "symmetric"))
    sp = sub.add_parser("fluctuations", parents=[common], help="steady fluctuation moments versus G")
    _add(sp, _CURVE_FLAGS)
    sp.add_argument("--prefer", dest=_dest("curve", "prefer"), choices=("broken", "symmetric"))
    sp = sub.add_parser("evolve", parents=[common], help="trajectory from an initial state")
    _add(sp, _EVOLVE_FLAGS)
    sp = sub.add_parser("pulse", parents=[common], help="trajectory under the auxiliary pulse")
    _add(sp, _EVOLVE_FLAGS)
    _add(sp, _PULSE_FLAGS)
    sp = sub.add_parser("critical-exponent", parents=[common], help="power-law fit above G_c2")
    _add(sp, _FIT_FLAGS)
    sub.add_parser("criticals", parents=[common], help="print zeta, G_c1 and G_c2")
    return ap


def _overrides(ns: argparse.Namespace) -> dict:
    out: dict = {}
    for dest, val in vars(ns).items():
        if not dest.startswith("ov__") or val is None:
            continue
        _, block, key = dest.split("__", 2)
        if isinstance(val, list):
            val = list(val)
        if block == "top":
            out[key] = val
        else:
            out.setdefault(block, {})[key] = val
    return out


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    raw, text = ({}, None)
    if ns.config:
        raw, text = read_raw(ns.config)
        if not isinstance(raw, dict):
            raise ConfigParse("configuration must be a JSON object")
    merged = merge_overrides(raw, _overrides(ns))
    merged["command"] = ns.command
    return config_from_dict(merged, text)


# -- commands --------------------------------------------------------------


def _check_failures(failed: int, considered: int, cfg: RunConfig, counts: dict) -> None:
    if considered and failed / considered > cfg.failure_threshold:
        raise NumericalFailures(f"{failed} of {considered} cells failed (threshold {cfg.failure_threshold})", counts)


def _cmd_criticals(cfg: RunConfig, _writer) -> dict:
    cs = critical_strengths(cfg.params)
    print(f"zeta={cs.zeta!r}")
    print(f"G_c1={cs.g_c1!r}")
    print(f"G_c2={cs.g_c2!r}" if cs.g_c2_applicable else "G_c2=not_applicable")
    return {}


def _cmd_phase_diagram(cfg: RunConfig, w: OutputWriter) -> dict:
    pd = phase_diagram(cfg.sweep_grid(), cfg.workers)
    gv, rv = pd.grid.g_values, pd.grid.ratio_values
    rows = (
        (float(gv[j]), float(rv[i]), pd.labels[i, j] or pd.status[i, j], float(pd.margin_trivial[i, j]),
         float(pd.margin_plus[i, j]))
        for i in range(len(rv))
        for j in range(len(gv))
    )
    w.write_csv("phase_diagram.csv", PHASE_COLUMNS, rows)
    w.write_text("phase_diagram.gp", gnuplot_script("phase-diagram", "phase_diagram.csv", "phase_diagram.png"))
    counts = pd.counts()
    ok = counts.get("ok", 0)
    failed = counts.get("failed", 0)
    print(f"phase-diagram: {pd.status.size} cells, {ok} ok, {counts.get('rejected', 0)} rejected, {failed} failed")
    _check_failures(failed, ok + failed, cfg, counts)
    return counts


def _cmd_order_parameter(cfg: RunConfig, w: OutputWriter) -> dict:
    c = cfg.curve
    pts = order_parameter_curve(
        cfg.params, c.g_values, c.protocol, cfg.pulse.spec(), cfg.tolerances.settle_config(), c.prefer, cfg.workers
    )
    w.write_csv("order_parameter.csv", ORDER_COLUMNS, ((p.big_g, p.n_scaled, p.branch, p.settled, p.residual) for p in pts))
    w.write_text("order_parameter.gp", gnuplot_script("order-parameter", "order_parameter.csv", "order_parameter.png"))
    counts = _status_counts(p.status for p in pts)
    failed = sum(v for k, v in counts.items() if k.startswith(("failed", "not_settled")))
    considered = sum(v for k, v in counts.items() if not k.startswith("rejected"))
    print(f"order-parameter ({c.protocol}): {len(pts)} points, {failed} failed or unsettled")
    _check_failures(failed, considered, cfg, counts)
    return counts


def _cmd_fluctuations(cfg: RunConfig, w: OutputWriter) -> dict:
    c = cfg.curve
    pts = fluctuation_curve(cfg.params, c.g_values, c.prefer, cfg.workers)
    w.write_csv("fluctuations.csv", FLUCT_COLUMNS, ((p.big_g, p.branch, p.a5, p.a6, p.condition, p.status) for p in pts))
    w.write_text("fluctuations.gp", gnuplot_script("fluctuations", "fluctuations.csv", "fluctuations.png"))
    counts = _status_counts(p.status for p in pts)
    failed = counts.get("singular", 0)
    considered = sum(v for k, v in counts.items() if not k.startswith("rejected"))
    print(f"fluctuations: {len(pts)} points, {failed} singular")
    _check_failures(failed, considered, cfg, counts)
    return counts


def _status_counts(statuses) -> dict:
    out: dict = {}
    for s in statuses:
        key = s.split(":", 1)[0]
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


def _trajectory(cfg: RunConfig, w: OutputWriter, pulse) -> dict:
    e, t = cfg.evolve, cfg.tolerances
    y0 = ScaledState(complex(*e.alpha0), complex(*e.beta0))
    t_eval = np.linspace(0.0, e.t_end, e.n_samples)
    tr = integrate(cfg.params, y0, (0.0, e.t_end), SolverConfig(t.rtol, t.atol), pulse, t_eval)
    name = "pulse" if pulse is not None else "evolve"
    rows = (
        (float(tr.t[i]), tr.alpha[i].real, tr.alpha[i].imag, tr.beta[i].real, tr.beta[i].imag, float(tr.n_magnon[i]))
        for i in range(len(tr))
    )
    w.write_csv(f"{name}.csv", EVOLVE_COLUMNS, rows)
    w.write_text(f"{name}.gp", gnuplot_script(name, f"{name}.csv", f"{name}.png"))
    print(f"{name}: {len(tr)} samples, final n_scaled={float(tr.n_magnon[-1])!r}, {tr.steps} steps")
    return {"samples": len(tr), "steps": tr.steps, "rejected_steps": tr.rejected}


def _cmd_evolve(cfg, w):
    return _trajectory(cfg, w, None)


def _cmd_pulse(cfg, w):
    return _trajectory(cfg, w, cfg.pulse.spec())


def _cmd_critical_exponent(cfg: RunConfig, w: OutputWriter) -> dict:
    try:
        fit = critical_exponent_fit(cfg.params, cfg.fit.window, cfg.fit.n_points)
    except (NotApplicable, InsufficientWindow) as exc:
        raise NumericalFailures(str(exc)) from exc
    rows = ((float(r), float(r * fit.g_c2), float(d)) for r, d in zip(fit.offsets, fit.delta_n))
    w.write_csv("critical_exponent.csv", FIT_COLUMNS, rows)
    summary = {
        "nu": fit.nu,
        "prefactor": fit.prefactor,
        "analytic_slope": fit.analytic_slope,
        "eta_c": fit.eta_c,
        "lambda1": fit.lambda1,
        "lambda2": fit.lambda2,
        "g_c2": fit.g_c2,
        "relative_deviation": (fit.prefactor - fit.analytic_slope) / fit.analytic_slope,
    }
    w.write_text("critical_exponent.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    w.write_text(
        "critical_exponent.gp",
        gnuplot_script("critical-exponent", "critical_exponent.csv", "critical_exponent.png", slope=fit.analytic_slope),
    )
    for k, v in summary.items():
        print(f"{k}={v!r}")
    return {"points": len(fit.delta_n)}


_COMMANDS = {
    "phase-diagram": _cmd_phase_diagram,
    "order-parameter": _cmd_order_parameter,
    "fluctuations": _cmd_fluctuations,
    "evolve": _cmd_evolve,
    "pulse": _cmd_pulse,
    "critical-exponent": _cmd_critical_exponent,
    "criticals": _cmd_criticals,
}
assert set(_COMMANDS) == set(COMMANDS)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
    except (ConfigParse, ParameterError) as exc:
        _err("E_CONFIG", str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        _err("E_IO", str(exc))
        return EXIT_IO

    t0 = time.perf_counter()
    writer = None
    code = EXIT_OK
    try:
        if ns.command != "criticals":
            writer = OutputWriter(cfg.output_dir, RunManifest("cavmag", __version__, ns.command, cfg.to_dict()))
        counts = _COMMANDS[ns.command](cfg, writer)
    except NumericalFailures as exc:
        _err("E_NUMERIC", str(exc))
        code = EXIT_NUMERIC
        counts = exc.counts
    except OSError as exc:
        _err("E_IO", str(exc))
        return EXIT_IO
    except (CavmagError, ArithmeticError) as exc:
        _err("E_NUMERIC", f"{type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    if writer is not None:
        if counts is not None:
            writer.manifest.counts = counts
        try:
            path = writer.finish(round(time.perf_counter() - t0, 6))
        except OSError as exc:
            _err("E_IO", str(exc))
            return EXIT_IO
        if code == EXIT_OK:
            print(f"manifest: {path}")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
