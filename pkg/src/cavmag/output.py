"""Result persistence: CSV tables, gnuplot scripts and a hashed JSON manifest.

Floats are written with ``repr`` (shortest string that parses back to the
same double), ``.`` decimal separator, LF line endings and a header row.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "PHASE_COLUMNS",
    "ORDER_COLUMNS",
    "EVOLVE_COLUMNS",
    "FLUCT_COLUMNS",
    "FIT_COLUMNS",
    "format_value",
    "csv_text",
    "RunManifest",
    "OutputWriter",
    "gnuplot_script",
]

PHASE_COLUMNS = ("G_over_kappa", "delta_ratio", "phase", "stability_margin_trivial", "stability_margin_plus")
ORDER_COLUMNS = ("G_over_kappa", "n_scaled", "branch", "settled", "residual")
EVOLVE_COLUMNS = ("t_kappa", "re_alpha", "im_alpha", "re_beta", "im_beta", "n_scaled")
FLUCT_COLUMNS = ("G_over_kappa", "branch", "a5", "a6", "condition", "status")
FIT_COLUMNS = ("relative_offset", "delta_G", "delta_n")


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if hasattr(v, "dtype"):
        return format_value(v.item())
    if isinstance(v, float):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    s = str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    tool: str
    version: str
    command: str
    config: dict
    duration_s: float = 0.0
    counts: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "tool": self.tool,
                "version": self.version,
                "command": self.command,
                "config": self.config,
                "duration_s": self.duration_s,
                "counts": self.counts,
                "files": self.files,
            },
            indent=2,
            sort_keys=True,
        ) + "\n"


class OutputWriter:
    """Writes files into one directory and records their sha256 hashes."""

    def __init__(self, directory: str | Path, manifest: RunManifest):
        self.dir = Path(directory)
        self.manifest = manifest
        self.dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str) -> Path:
        data = text.encode("utf-8")
        path = self.dir / name
        with open(path, "wb") as fh:
            fh.write(data)
        self.manifest.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def write_csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
        return self.write_text(name, csv_text(columns, rows))

    def finish(self, duration_s: float) -> Path:
        self.manifest.duration_s = duration_s
        path = self.dir / "manifest.json"
        with open(path, "wb") as fh:
            fh.write(self.manifest.to_json().encode("utf-8"))
        return path


_GP_HEAD = 'set datafile separator ","\nset terminal pngcairo size 900,650\nset output "{png}"\n'

_GP_BODY = {
    "phase-diagram": (
        'set xlabel "G/kappa"\nset ylabel "Delta_m/Delta_c"\n'
        'set cbrange [0:3]\nset cbtics ("PSP" 0, "PSBP" 1, "BP" 2, "Unstable" 3)\n'
        'phase(s) = s eq "PSP" ? 0 : s eq "PSBP" ? 1 : s eq "BP" ? 2 : s eq "Unstable" ? 3 : NaN\n'
        'plot "{data}" skip 1 using 1:2:(phase(strcol(3))) with points pt 5 ps 0.4 palette notitle\n'
    ),
    "order-parameter": (
        'set xlabel "G/kappa"\nset ylabel "<b+b> (gamma/K)"\n'
        'plot "{data}" skip 1 using 1:2 with linespoints pt 7 ps 0.5 notitle\n'
    ),
    "fluctuations": (
        'set xlabel "G/kappa"\nset ylabel "<db+ db>"\nset logscale y\n'
        'plot "{data}" skip 1 using 1:4 with linespoints pt 7 ps 0.5 notitle\n'
    ),
    "evolve": (
        'set xlabel "kappa t"\nset ylabel "|beta|^2 (gamma/K)"\n'
        'plot "{data}" skip 1 using 1:6 with lines notitle\n'
    ),
    "critical-exponent": (
        'set xlabel "G - G_c2"\nset ylabel "delta n"\nset logscale xy\n'
        'plot "{data}" skip 1 using 2:3 with points pt 7 title "data", '
        "{slope!r}*x title \"analytic slope\"\n"
    ),
}


def gnuplot_script(kind: str, data: str, png: str, **extra) -> str:
    body = _GP_BODY["evolve" if kind == "pulse" else kind]
    return _GP_HEAD.format(png=png) + body.format(data=data, **extra)
