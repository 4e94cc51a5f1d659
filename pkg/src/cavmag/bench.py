"""Timing comparison of the compiled and pure-Python integration kernels.

Usage::

    python -m cavmag.bench [--repeat N]

Each case settles the mean-field equations once per repetition and reports
the best wall-clock time per backend, the speed-up and the largest
difference between the two final states (expected to be zero or at
rounding level).
"""

from __future__ import annotations

import argparse
import sys
import time

from .dynamics import PulseSpec, integrate, load_backend, settle
from .params import ScaledState, SystemParams

CASES = [
    ("settle, trivial branch", SystemParams(3.0, 3.0, 2.4, 1.8), ScaledState(0.001, 0.001), None),
    ("settle, broken branch", SystemParams(3.0, 1.2, 2.4, 2.3), ScaledState(2.1 + 1.1j, 2.1 - 1.1j), None),
    ("settle, pulse", SystemParams(3.0, 0.9, 2.4, 2.3), ScaledState.zero(), PulseSpec(2.0, 10.0)),
]


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_benchmark(repeat: int = 5, stream=sys.stdout) -> list[dict]:
    try:
        load_backend("compiled")
    except ImportError:
        print("compiled backend unavailable; only the Python kernel can be timed", file=stream)
        return []
    rows = []
    for name, p, y0, pulse in CASES:
        times, finals = {}, {}
        for backend in ("compiled", "python"):
            times[backend], (state, _) = _best(lambda: settle(p, y0, pulse, backend=backend), repeat)
            finals[backend] = state
        diff = abs(finals["compiled"].alpha - finals["python"].alpha) + abs(finals["compiled"].beta - finals["python"].beta)
        rows.append({"case": name, **times, "speedup": times["python"] / times["compiled"], "max_diff": diff})
    # long dense trajectory
    p, y0 = SystemParams(3.0, 1.2, 2.4, 2.3), ScaledState(0.1 + 0.1j, 0.1 - 0.1j)
    times, trs = {}, {}
    for backend in ("compiled", "python"):
        times[backend], trs[backend] = _best(
            lambda: integrate(p, y0, (0.0, 500.0), t_eval=[500.0 * i / 2000 for i in range(2001)], backend=backend),
            repeat,
        )
    diff = float(abs(trs["compiled"].beta - trs["python"].beta).max())
    rows.append({"case": "integrate, 2001 samples", **times, "speedup": times["python"] / times["compiled"], "max_diff": diff})

    print(f"{'case':<26}{'compiled [ms]':>15}{'python [ms]':>14}{'speedup':>10}{'max diff':>12}", file=stream)
    for r in rows:
        print(
            f"{r['case']:<26}{1e3 * r['compiled']:>15.3f}{1e3 * r['python']:>14.3f}"
            f"{r['speedup']:>10.1f}{r['max_diff']:>12.2e}",
            file=stream,
        )
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m cavmag.bench", description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    run_benchmark(args.repeat)
    return 0


if __name__ == "__main__":
    sys.exit(main())
