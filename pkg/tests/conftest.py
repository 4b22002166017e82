import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from raoi.policies import SystemConfig, UserConfig
from raoi.tables import ppv_table

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

K_GRID = tuple(range(4, 12))
P_GRID = (1.0, 2.0, 3.0, 4.0)


@pytest.fixture(scope="session")
def ppv():
    return ppv_table(15, K_GRID, P_GRID, N=15)


@pytest.fixture(scope="session")
def ppv_cfg(ppv):
    return SystemConfig(users=(UserConfig(ppv), UserConfig(ppv)))


def long_division_remainder(a_bits, g_bits):
    """Bit-serial GF(2) long division on MSB-first lists; returns the remainder
    as an MSB-first list of length len(g_bits) - 1."""
    a = list(a_bits)
    g = list(g_bits)
    r = len(g) - 1
    for i in range(len(a) - r):
        if a[i]:
            for j in range(len(g)):
                a[i + j] ^= g[j]
    return a[len(a) - r:]


def flip(bits, positions):
    out = np.array(bits, dtype=np.uint8).copy()
    for p in positions:
        out[p] ^= 1
    return out


def make_table(success, k_values, p_values, n=15, N=None):
    """Synthetic genie-detection table with the given success grid."""
    from raoi.gf2codes import NO_CRC
    from raoi.tables import ErrorTable

    s = np.asarray(success, dtype=float).reshape(len(k_values), len(p_values))
    return ErrorTable(n=n, N=N or n, k_values=k_values, p_values=p_values, crc=NO_CRC,
                      code_family="external", detection="genie", reported_success=s,
                      genie_success=s.copy(), undetected=np.zeros_like(s))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
