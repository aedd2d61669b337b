import os
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SUITE_LIMIT_S = 600.0
_lines = []


def pytest_sessionstart(session):
    session.config._igt_t0 = time.perf_counter()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance(request):
    """Write one PASS/FAIL line per acceptance criterion to the terminal."""
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def report(label, ok, detail, elapsed, limit):
        ok = bool(ok) and elapsed < limit
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail} ({elapsed:.1f}s < {limit:g}s)"
        _lines.append(line)
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - config._igt_t0
    if _lines:
        ok = elapsed < SUITE_LIMIT_S
        _lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion 8 (suite time): "
                      f"{elapsed:.1f}s < {SUITE_LIMIT_S:g}s")
        terminalreporter.section("acceptance criteria")
        for line in _lines:
            terminalreporter.write_line(line)
