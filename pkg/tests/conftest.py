import math
import os

import pytest

from levinterf.core import particle_from_radius
from levinterf.protocol import ProtocolParams

TWO_PI = 2 * math.pi
BB_ENV = "LEVINTERF_BB_TABLE"

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"CRITERION {n}: {status}  {detail}")


@pytest.fixture
def acceptance():
    """Record (and echo) one status line per acceptance criterion."""
    def record(n: int, status: str, detail: str) -> None:
        _ACCEPTANCE[n] = (status, detail)
        print(f"CRITERION {n}: {status}  {detail}")
    return record


@pytest.fixture(scope="session")
def bb_table_path():
    return os.environ.get(BB_ENV) or None


@pytest.fixture(scope="session")
def particle50():
    return particle_from_radius(50e-9)


def case_params(omega2_khz: float = 2.5, tau4: float = 0.087e-3) -> ProtocolParams:
    phi2 = 0.05 * math.pi
    wp = ProtocolParams.omega_p_for((TWO_PI * omega2_khz * 1e3) ** 2, phi2)
    return ProtocolParams(TWO_PI * 100e3, 0.5, 2e-3, 1.34e-3, phi2, wp, 10e-6, 0.66e-3,
                          TWO_PI * 10e3, tau4)


def splitting_params() -> ProtocolParams:
    phi2 = 0.9 * math.pi / 4
    wp = ProtocolParams.omega_p_for((TWO_PI * 1.66e3) ** 2, phi2)
    return ProtocolParams(TWO_PI * 100e3, 0.5, 2e-3, 0.92e-3, phi2, wp, 10e-6, 349e-3, 0.0, 0.0)
