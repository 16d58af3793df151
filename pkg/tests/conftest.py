import os

import pytest
from hypothesis import HealthCheck, settings

from heisenberg_wave.littlewood_paley import DyadicProfile
from heisenberg_wave.spectral_core import GroupParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def params():
    return GroupParams(1)


@pytest.fixture(scope="session")
def profile():
    return DyadicProfile()


# one summary line per acceptance criterion, printed after the run
_CRITERIA: dict[str, str] = {}


@pytest.fixture
def record_criterion():
    def record(label: str, checks: list) -> list:
        failed = [c for c in checks if not c.passed]
        mark = "FAIL" if failed else "PASS"
        line = f"{mark} {label}: {len(checks) - len(failed)}/{len(checks)} checks"
        if failed:
            line += "; failing: " + ", ".join(f"{c.claim_id}={c.observed:.4g}" for c in failed[:6])
            if len(failed) > 6:
                line += f", ... ({len(failed) - 6} more)"
        _CRITERIA[label] = line
        print(line)
        return failed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for label in sorted(_CRITERIA, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(_CRITERIA[label])
