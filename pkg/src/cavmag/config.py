"""Run configuration: JSON files, ratio forms and normalization to kappa = 1.

Layout of a config file (every block optional)::

    {
      "command": "phase-diagram",
      "params": {"delta_c": 3.0, "delta_ratio": 1.0, "g": 2.4, "gamma": 1.0},
      "grid": {"g_min": 1.5, "g_max": 2.6, "g_count": 221, ...},
      "curve": {"g_min": 1.9, "g_max": 2.3, "g_count": 81, "protocol": "analytic"},
      "pulse": {"omega0": 2.0, "tau": 10.0},
      "evolve": {"t_end": 200.0, "n_samples": 401, "alpha0": [0, 0], "beta0": [0, 0]},
      "fit": {"window": [1e-7, 1e-5], "n_points": 21},
      "tolerances": {"rtol": 1e-9, "atol": 1e-12, "eps": 1e-8, "window": 10.0, "t_max": 2000.0},
      "output_dir": "out",
      "workers": 4,
      "failure_threshold": 0.0
    }

Parameter keys accept either absolute rates or ratio forms:
``delta_m`` or ``delta_ratio`` (Delta_m / Delta_c), ``G`` or ``G_over_kappa``,
``kappa`` or ``kappa_r`` + ``kappa_phi``, ``gamma`` or ``gamma_r`` + ``gamma_phi``.
Decay pairs combine as ``r/2 + phi``.  All rates, including ``kerr``, are
divided by the resolved ``kappa``.  Precedence is defaults < file < flags.
"""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .dynamics import PulseSpec, SettleConfig, SolverConfig
from .errors import ConfigParse, ParameterError, RejectedDrive
from .params import SystemParams, decoherence_rate, validate_params
from .sweep import PROTOCOLS, SweepGrid

__all__ = [
    "COMMANDS",
    "GridBlock",
    "CurveBlock",
    "PulseBlock",
    "EvolveBlock",
    "FitBlock",
    "ToleranceBlock",
    "RunConfig",
    "resolve_params",
    "config_from_dict",
    "load_config",
    "merge_overrides",
]

COMMANDS = (
    "phase-diagram",
    "order-parameter",
    "fluctuations",
    "evolve",
    "pulse",
    "critical-exponent",
    "criticals",
)

PARAM_KEYS = {
    "delta_c", "delta_m", "delta_ratio", "g", "G", "G_over_kappa",
    "kappa", "kappa_r", "kappa_phi", "gamma", "gamma_r", "gamma_phi", "kerr",
}
# keys that supersede each other when a later layer sets one of them
_ALTERNATIVES = {
    "delta_m": ("delta_ratio",),
    "delta_ratio": ("delta_m",),
    "G": ("G_over_kappa",),
    "G_over_kappa": ("G",),
    "kappa": ("kappa_r", "kappa_phi"),
    "kappa_r": ("kappa",),
    "kappa_phi": ("kappa",),
    "gamma": ("gamma_r", "gamma_phi"),
    "gamma_r": ("gamma",),
    "gamma_phi": ("gamma",),
}


@dataclass(frozen=True)
class GridBlock:
    g_min: float = 1.5
    g_max: float = 2.6
    g_count: int = 221
    ratio_min: float = 0.0
    ratio_max: float = 1.5
    ratio_count: int = 151


@dataclass(frozen=True)
class CurveBlock:
    g_min: float = 1.5
    g_max: float = 2.6
    g_count: int = 111
    protocol: str = "analytic"
    prefer: str = "broken"

    @property
    def g_values(self) -> list[float]:
        n = self.g_count
        return [self.g_min + (self.g_max - self.g_min) * i / (n - 1) for i in range(n)]


@dataclass(frozen=True)
class PulseBlock:
    omega0: float = 2.0
    tau: float = 10.0

    def spec(self) -> PulseSpec:
        return PulseSpec(self.omega0, self.tau)


@dataclass(frozen=True)
class EvolveBlock:
    t_end: float = 200.0
    n_samples: int = 401
    alpha0: tuple[float, float] = (0.0, 0.0)
    beta0: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class FitBlock:
    window: tuple[float, float] = (1e-7, 1e-5)
    n_points: int = 21


@dataclass(frozen=True)
class ToleranceBlock:
    rtol: float = 1e-9
    atol: float = 1e-12
    eps: float = 1e-8
    window: float = 10.0
    t_max: float = 2000.0

    def settle_config(self) -> SettleConfig:
        return SettleConfig(self.eps, self.window, self.t_max, SolverConfig(self.rtol, self.atol))


_BLOCKS = {
    "grid": GridBlock,
    "curve": CurveBlock,
    "pulse": PulseBlock,
    "evolve": EvolveBlock,
    "fit": FitBlock,
    "tolerances": ToleranceBlock,
}
_TOP_KEYS = {"command", "params", "output_dir", "workers", "failure_threshold", *_BLOCKS}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration; ``params`` is normalized to kappa = 1."""

    params: SystemParams
    command: str | None = None
    grid: GridBlock = field(default_factory=GridBlock)
    curve: CurveBlock = field(default_factory=CurveBlock)
    pulse: PulseBlock = field(default_factory=PulseBlock)
    evolve: EvolveBlock = field(default_factory=EvolveBlock)
    fit: FitBlock = field(default_factory=FitBlock)
    tolerances: ToleranceBlock = field(default_factory=ToleranceBlock)
    output_dir: str = "out"
    workers: int | None = None
    failure_threshold: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        p = self.params
        out: dict[str, Any] = {
            "command": self.command,
            "params": {
                "delta_c": p.delta_c,
                "delta_m": p.delta_m,
                "g": p.g,
                "G": p.big_g,
                "kappa": p.kappa,
                "gamma": p.gamma,
                "kerr": p.kerr_physical,
            },
        }
        for name in _BLOCKS:
            blk = dataclasses.asdict(getattr(self, name))
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in blk.items()}
        out["output_dir"] = self.output_dir
        out["workers"] = self.workers
        out["failure_threshold"] = self.failure_threshold
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def sweep_grid(self) -> SweepGrid:
        g = self.grid
        return SweepGrid(self.params, g.g_min, g.g_max, g.g_count, g.ratio_min, g.ratio_max, g.ratio_count)


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _number(raw: dict, key: str, text: str | None) -> float:
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigParse(f"expected a number, got {v!r}", key=key, line=_line_of(text, key))
    return float(v)


def resolve_params(raw: dict, text: str | None = None) -> SystemParams:
    """Turn a ``params`` block into normalized `SystemParams` (kappa = 1).

    The drive is checked against its bound only when one is given;
    otherwise ``G = 0``.
    """
    if not isinstance(raw, dict):
        raise ConfigParse("'params' must be an object", key="params", line=_line_of(text, "params"))
    unknown = sorted(set(raw) - PARAM_KEYS)
    if unknown:
        raise ConfigParse(f"unknown parameter key {unknown[0]!r}", key=unknown[0], line=_line_of(text, unknown[0]))

    def pair(name):
        r, phi = f"{name}_r", f"{name}_phi"
        if name in raw and (r in raw or phi in raw):
            raise ConfigParse(f"give either {name!r} or ({r!r}, {phi!r}), not both", key=name, line=_line_of(text, name))
        if r in raw or phi in raw:
            if r not in raw:
                raise ConfigParse(f"{phi!r} requires {r!r}", key=phi, line=_line_of(text, phi))
            try:
                return decoherence_rate(_number(raw, r, text), _number(raw, phi, text) if phi in raw else 0.0)
            except ParameterError as exc:
                raise ConfigParse(str(exc), key=r, line=_line_of(text, r)) from exc
        return _number(raw, name, text) if name in raw else 1.0

    def either(a, b):
        if a in raw and b in raw:
            raise ConfigParse(f"give either {a!r} or {b!r}, not both", key=b, line=_line_of(text, b))

    for key in ("delta_c", "g"):
        if key not in raw:
            raise ConfigParse(f"missing required parameter {key!r}", key=key)
    either("delta_m", "delta_ratio")
    either("G", "G_over_kappa")
    if "delta_m" not in raw and "delta_ratio" not in raw:
        raise ConfigParse("missing 'delta_m' or 'delta_ratio'", key="delta_m")

    kappa = pair("kappa")
    gamma = pair("gamma")
    if not (math.isfinite(kappa) and kappa > 0):
        raise ConfigParse(f"kappa must be positive, got {kappa!r}", key="kappa", line=_line_of(text, "kappa"))
    dc = _number(raw, "delta_c", text)
    dm = dc * _number(raw, "delta_ratio", text) if "delta_ratio" in raw else _number(raw, "delta_m", text)
    big_g = kappa * _number(raw, "G_over_kappa", text) if "G_over_kappa" in raw else (
        _number(raw, "G", text) if "G" in raw else 0.0
    )
    kerr = raw.get("kerr")
    kerr = None if kerr is None else _number(raw, "kerr", text) / kappa
    p = SystemParams(dc / kappa, dm / kappa, _number(raw, "g", text) / kappa, big_g / kappa, 1.0, gamma / kappa, kerr)
    try:
        validate_params(p)
    except ParameterError as exc:
        key = "params"
        if isinstance(exc, RejectedDrive):
            key = "G_over_kappa" if "G_over_kappa" in raw else "G"
        raise ConfigParse(str(exc), key=key, line=_line_of(text, key)) from exc
    return p


def _block(name: str, raw: Any, text: str | None):
    cls = _BLOCKS[name]
    if not isinstance(raw, dict):
        raise ConfigParse(f"{name!r} must be an object", key=name, line=_line_of(text, name))
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigParse(f"unknown key {unknown[0]!r} in {name!r}", key=unknown[0], line=_line_of(text, unknown[0]))
    kw = {}
    for k, v in raw.items():
        default = getattr(cls(), k)
        if isinstance(default, tuple):
            if not (isinstance(v, (list, tuple)) and len(v) == 2):
                raise ConfigParse(f"expected a pair of numbers, got {v!r}", key=k, line=_line_of(text, k))
            v = tuple(_number({k: x}, k, text) for x in v)
        elif isinstance(default, bool) or isinstance(default, str):
            if not isinstance(v, str):
                raise ConfigParse(f"expected a string, got {v!r}", key=k, line=_line_of(text, k))
        elif isinstance(default, int):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigParse(f"expected an integer, got {v!r}", key=k, line=_line_of(text, k))
        else:
            v = _number({k: v}, k, text)
        kw[k] = v
    return cls(**kw)


def config_from_dict(raw: dict, text: str | None = None) -> RunConfig:
    """Validate and resolve a raw (JSON-decoded) configuration mapping."""
    if not isinstance(raw, dict):
        raise ConfigParse("configuration must be a JSON object")
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        raise ConfigParse(f"unknown key {unknown[0]!r}", key=unknown[0], line=_line_of(text, unknown[0]))
    if "params" not in raw:
        raise ConfigParse("missing 'params' block", key="params")
    params = resolve_params(raw["params"], text)
    kw: dict[str, Any] = {"params": params}
    cmd = raw.get("command")
    if cmd is not None and cmd not in COMMANDS:
        raise ConfigParse(f"unknown command {cmd!r}", key="command", line=_line_of(text, "command"))
    kw["command"] = cmd
    for name in _BLOCKS:
        if name in raw:
            kw[name] = _block(name, raw[name], text)
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ConfigParse("output_dir must be a string", key="output_dir", line=_line_of(text, "output_dir"))
        kw["output_dir"] = raw["output_dir"]
    w = raw.get("workers")
    if w is not None and (isinstance(w, bool) or not isinstance(w, int) or w < 1):
        raise ConfigParse(f"workers must be a positive integer, got {w!r}", key="workers", line=_line_of(text, "workers"))
    kw["workers"] = w
    if "failure_threshold" in raw:
        ft = _number(raw, "failure_threshold", text)
        if not 0.0 <= ft <= 1.0:
            raise ConfigParse("failure_threshold must lie in [0, 1]", key="failure_threshold",
                              line=_line_of(text, "failure_threshold"))
        kw["failure_threshold"] = ft
    cfg = RunConfig(**kw)
    _check_blocks(cfg, text, check_grid=cmd == "phase-diagram")
    return cfg


def _check_blocks(cfg: RunConfig, text: str | None, check_grid: bool = True) -> None:
    # the grid only has to fit the drive bound when the phase diagram uses it
    if check_grid:
        try:
            cfg.sweep_grid()
        except ParameterError as exc:
            raise ConfigParse(str(exc), key="grid", line=_line_of(text, "grid")) from exc
    c = cfg.curve
    if c.g_count < 1 or c.g_min > c.g_max:
        raise ConfigParse("curve needs g_count >= 1 and g_min <= g_max", key="curve", line=_line_of(text, "curve"))
    if c.protocol not in PROTOCOLS:
        raise ConfigParse(f"protocol must be one of {PROTOCOLS}", key="protocol", line=_line_of(text, "protocol"))
    if c.prefer not in ("broken", "symmetric"):
        raise ConfigParse("prefer must be 'broken' or 'symmetric'", key="prefer", line=_line_of(text, "prefer"))
    try:
        cfg.pulse.spec()
    except ValueError as exc:
        raise ConfigParse(str(exc), key="pulse", line=_line_of(text, "pulse")) from exc
    e = cfg.evolve
    if not e.t_end > 0 or e.n_samples < 2:
        raise ConfigParse("evolve needs t_end > 0 and n_samples >= 2", key="evolve", line=_line_of(text, "evolve"))
    lo, hi = cfg.fit.window
    if not 0 < lo < hi:
        raise ConfigParse("fit window must satisfy 0 < lo < hi", key="window", line=_line_of(text, "window"))
    t = cfg.tolerances
    if not (t.rtol > 0 and t.atol > 0 and t.eps > 0 and t.window >= 0 and t.t_max > 0):
        raise ConfigParse("tolerances must be positive", key="tolerances", line=_line_of(text, "tolerances"))


def merge_overrides(raw: dict, overrides: dict) -> dict:
    """Overlay flag values onto a raw config mapping (flags win).

    ``overrides`` mirrors the file layout; a parameter set here drops its
    alternative spelling from ``raw`` so ratio and absolute forms never clash.
    """
    out = json.loads(json.dumps(raw))
    for key, val in overrides.items():
        if isinstance(val, dict):
            blk = out.setdefault(key, {})
            if not isinstance(blk, dict):
                blk = out[key] = {}
            for k, v in val.items():
                if key == "params":
                    for alt in _ALTERNATIVES.get(k, ()):
                        blk.pop(alt, None)
                blk[k] = v
        else:
            out[key] = val
    return out


def read_raw(path: str | Path) -> tuple[dict, str]:
    """Decode a config file, mapping JSON syntax errors to `ConfigParse`."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return raw, text


def load_config(path: str | Path) -> RunConfig:
    raw, text = read_raw(path)
    return config_from_dict(raw, text)
