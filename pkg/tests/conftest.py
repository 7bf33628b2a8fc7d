import math

import pytest
from hypothesis import HealthCheck, settings

from bogocool.physical_system import SystemParams

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def internal_params(m_b=1.0, a_ab=0.05, a_bb=1e-9, rho0=0.8, temperature=0.0):
    return SystemParams.from_internal(m_b=m_b, a_ab=a_ab, a_bb=a_bb, rho0=rho0, temperature=temperature)


def subsonic_params(r=0.01, m_b=1.0, rho0=1e3, a_ab=0.01, temperature=0.0):
    """Subsonic bath with l0*omega/u = r (internal units, u = 1/r)."""
    u = 1.0 / r
    a_bb = m_b * u * u * m_b / (4 * math.pi * rho0)  # g_bb rho0 / m_b = u^2 with g_bb = 4 pi a_bb / m_b
    return SystemParams.from_internal(m_b=m_b, a_ab=a_ab, a_bb=a_bb, rho0=rho0, temperature=temperature)


@pytest.fixture
def deep_supersonic():
    """m_a = m_b, hbar*omega / (m_b u^2/2) ~ 2e8."""
    return internal_params()


@pytest.fixture
def subsonic():
    return subsonic_params()


# acceptance lines, filled by test_acceptance and echoed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
