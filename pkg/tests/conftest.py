import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
CRIT1_LAMBDAS = (0.04, 0.25, 0.5, 0.81)


@pytest.fixture(scope="session")
def crit1_graphs():
    """Solved graphs for the standard map at 0.99 of the threshold."""
    from twistlab.graphsolve import solve
    from twistlab.twist import standard_map

    out = {}
    for lam in CRIT1_LAMBDAS:
        kappa = 0.99 * (1.0 - np.sqrt(lam)) ** 2
        p = standard_map(lam, kappa, alpha1=0.38)
        out[lam] = (p, solve(p, tol=1e-10))
    return out


ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
