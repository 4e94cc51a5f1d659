import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cavmag.config import (
    RunConfig,
    config_from_dict,
    load_config,
    merge_overrides,
    resolve_params,
)
from cavmag.errors import ConfigParse, RejectedDrive, RejectedSign
from cavmag.output import csv_text, format_value
from conftest import ref_params

REF_PARAMS = {"delta_c": 3.0, "delta_ratio": 1.0, "g": 2.4, "kappa": 1.0, "gamma": 1.0}


def write(tmp_path, obj, name="run.cfg"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=2))
    return path


def test_reference_parameter_file(tmp_path):
    cfg = load_config(write(tmp_path, {"params": REF_PARAMS}))
    p = cfg.params
    assert (p.delta_c, p.delta_m, p.g, p.big_g, p.kappa, p.gamma) == (3.0, 3.0, 2.4, 0.0, 1.0, 1.0)


def test_shipped_configs_load():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    a = load_config(root / "fig2a.cfg")
    assert a.command == "phase-diagram" and a.grid.g_count == 221 and a.grid.ratio_count == 151
    b = load_config(root / "fig4a.cfg")
    assert b.curve.protocol == "ode_pulse" and b.params.delta_m == pytest.approx(0.9)
    c = load_config(root / "fig3a.cfg")
    assert c.curve.protocol == "ode_smallseed" and c.curve.prefer == "symmetric"


def test_drive_above_bound_rejected_with_location(tmp_path):
    text = '{\n  "params": {\n    "delta_c": 3.0,\n    "delta_m": 3.0,\n    "g": 2.4,\n    "G_over_kappa": 3.5\n  }\n}\n'
    with pytest.raises(ConfigParse) as info:
        load_config(write(tmp_path, text))
    assert isinstance(info.value.__cause__, RejectedDrive)
    assert info.value.key == "G_over_kappa" and info.value.line == 6


def test_decay_pair_combined():
    p = resolve_params({"delta_c": 3.0, "delta_m": 3.0, "g": 2.4, "kappa_r": 1.0, "kappa_phi": 0.5,
                        "gamma_r": 1.0, "gamma_phi": 0.5})
    assert p.kappa == 1.0 and p.gamma == 1.0
    p = resolve_params({"delta_c": 3.0, "delta_m": 3.0, "g": 2.4, "kappa_r": 4.0, "gamma": 1.0})
    # kappa = 2, everything rescaled by it
    assert (p.delta_c, p.g, p.gamma) == (1.5, 1.2, 0.5)


def test_kappa_normalization_preserves_dimensionless_ratios():
    raw = {"delta_c": 6.0, "delta_ratio": 0.5, "g": 4.8, "G_over_kappa": 2.0, "kappa": 2.0, "gamma": 2.0, "kerr": 1e-9}
    p = resolve_params(raw)
    assert (p.delta_c, p.delta_m, p.g, p.big_g, p.kappa, p.gamma) == (3.0, 1.5, 2.4, 2.0, 1.0, 1.0)
    assert p.kerr_physical == 5e-10


@pytest.mark.parametrize(
    "extra,key",
    [({"delta_m": 3.0}, "delta_ratio"), ({"G": 1.0, "G_over_kappa": 1.0}, "G_over_kappa"),
     ({"kappa_r": 2.0}, "kappa"), ({"speed": 1.0}, "speed")],
)
def test_conflicting_or_unknown_parameter_keys(extra, key):
    with pytest.raises(ConfigParse) as info:
        resolve_params({**REF_PARAMS, **extra})
    assert info.value.key == key


def test_missing_and_bad_values():
    with pytest.raises(ConfigParse):
        resolve_params({"delta_c": 3.0, "g": 2.4})
    with pytest.raises(ConfigParse):
        resolve_params({**REF_PARAMS, "g": "big"})
    with pytest.raises(ConfigParse) as info:
        resolve_params({**REF_PARAMS, "delta_ratio": -1.0})
    assert isinstance(info.value.__cause__, RejectedSign)


def test_unknown_keys_anywhere(tmp_path):
    for raw in ({"params": REF_PARAMS, "colour": 1}, {"params": REF_PARAMS, "grid": {"g_step": 0.1}}):
        with pytest.raises(ConfigParse):
            config_from_dict(raw)


def test_invalid_json_reports_line(tmp_path):
    with pytest.raises(ConfigParse) as info:
        load_config(write(tmp_path, '{\n  "params": {\n    "g": 2.4,\n  }\n}'))
    assert info.value.line == 4


@pytest.mark.parametrize(
    "block",
    [{"curve": {"protocol": "guess"}}, {"command": "phase-diagram", "grid": {"g_max": 3.3}}, {"pulse": {"tau": 0.0}},
     {"fit": {"window": [1e-3, 1e-5]}}, {"curve": {"g_count": 2.5}}, {"workers": 0}, {"failure_threshold": 2.0},
     {"command": "plot"}],
)
def test_bad_blocks_rejected(block):
    with pytest.raises(ConfigParse):
        config_from_dict({"params": REF_PARAMS, **block})


@given(
    st.floats(0.1, 10), st.floats(0.05, 2.0), st.floats(0, 5), st.floats(0, 0.99), st.floats(0.1, 5),
    st.integers(2, 500), st.sampled_from(["analytic", "ode_smallseed", "ode_pulse"]),
)
def test_round_trip(dc, r, g, drive_frac, gamma, count, protocol):
    raw = {
        "command": "order-parameter",
        "params": {"delta_c": dc, "delta_ratio": r, "g": g, "G_over_kappa": drive_frac * math.hypot(dc, 1.0),
                   "gamma": gamma},
        "curve": {"g_count": count, "protocol": protocol},
        "workers": 2,
    }
    cfg = config_from_dict(raw)
    again = config_from_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_grid_checked_only_for_phase_diagram():
    raw = {"params": {"delta_c": 1.0, "delta_m": 1.0, "g": 0.5}}
    assert config_from_dict({**raw, "command": "evolve"}).command == "evolve"
    with pytest.raises(ConfigParse) as info:
        config_from_dict({**raw, "command": "phase-diagram"})
    assert info.value.key == "grid"


def test_default_config_round_trip():
    cfg = RunConfig(ref_params(1.0, 2.0))
    assert config_from_dict(cfg.to_dict()) == cfg


def test_overrides_replace_alternative_spellings():
    merged = merge_overrides({"params": dict(REF_PARAMS), "curve": {"g_count": 5}}, {"params": {"delta_m": 0.9},
                                                                               "curve": {"g_min": 2.0}})
    assert "delta_ratio" not in merged["params"] and merged["params"]["delta_m"] == 0.9
    assert merged["curve"] == {"g_count": 5, "g_min": 2.0}
    cfg = config_from_dict(merged)
    assert cfg.params.delta_m == 0.9


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_formatting_round_trips(x):
    assert float(format_value(x)) == x


def test_value_formatting():
    import numpy as np

    assert format_value(True) == "true"
    assert format_value(np.float64(0.1)) == "0.1"
    assert format_value(float("nan")) == "nan"
    assert format_value(-math.inf) == "-inf"
    assert format_value("a,b") == '"a,b"'
    assert csv_text(("x", "y"), [(1, 2.5)]) == "x,y\n1,2.5\n"
    with pytest.raises(ValueError):
        csv_text(("x",), [(1, 2)])
