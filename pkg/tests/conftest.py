import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from cavmag.params import SystemParams  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# cavity detuning, coupling and damping shared by most checks
DC, G_COUPLING, KAPPA, GAMMA = 3.0, 2.4, 1.0, 1.0


def ref_params(ratio=1.0, drive=0.0) -> SystemParams:
    return SystemParams(DC, ratio * DC, G_COUPLING, drive, KAPPA, GAMMA)


def prm_tuple(p):
    return (p.delta_c, p.delta_m, p.g, p.big_g, p.kappa, p.gamma)


@pytest.fixture
def base():
    return ref_params()


# one verdict line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
