"""Shared fixtures and the acceptance summary hook.

The acceptance suite exercises four full experiment runs; they are
session scoped so the expensive sweeps execute once regardless of how
many criteria read them. Every criterion registers a one line verdict
through :func:`record`, echoed in the terminal summary.
"""

from __future__ import annotations

import time

import pytest

from perturbcs import run_preset

RESULTS: list[tuple[float, str, str]] = []


def record(number: float, passed: bool, detail: str) -> str:
    """Register one acceptance verdict; returns the formatted line."""
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:g}: {status} {detail}"
    RESULTS.append((number, status, detail))
    print(line)
    return line


def _timed_preset(name: str):
    start = time.perf_counter()
    result = run_preset(name)
    return result, time.perf_counter() - start


@pytest.fixture(scope="session")
def fig5_run():
    """Positive-signal exact recovery preset: 20 trials at epsilon 0."""
    return _timed_preset("fig5")


@pytest.fixture(scope="session")
def fig2_desk_run():
    """Noise sweep preset: 10 trials per epsilon in {0.1,0.5,1,1.5,2}."""
    return _timed_preset("fig2-desk")


@pytest.fixture(scope="session")
def fig3_desk_run():
    """Radius sweep preset: 10 trials per r in {0.1, 0.5, 1.0}."""
    return _timed_preset("fig3-desk")


@pytest.fixture(scope="session")
def fig6_run():
    """Two-source direction protocol, 100 trials at m=30, n=90."""
    return _timed_preset("fig6")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(RESULTS, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number:g}: {status} {detail}")
