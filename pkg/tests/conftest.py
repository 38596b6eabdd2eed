from __future__ import annotations

from pathlib import Path

import pytest

from insarfopt.scenario import (
    ScenarioConfig,
    bundled_scenario_path,
    dumps_scenario,
    reference_scenario,
    with_overrides,
)
from insarfopt.sca_ao import RunReport, ao_solve, benchmark1_vertical, benchmark2_equal_power


@pytest.fixture(scope="session")
def ref() -> ScenarioConfig:
    return reference_scenario()


@pytest.fixture(scope="session")
def ref_path() -> Path:
    return bundled_scenario_path()


@pytest.fixture(scope="session")
def proposed_run(ref) -> RunReport:
    return ao_solve(ref)


@pytest.fixture(scope="session")
def vertical_run(ref) -> RunReport:
    return benchmark1_vertical(ref)


@pytest.fixture(scope="session")
def equal_power_run(ref) -> RunReport:
    return benchmark2_equal_power(ref)


@pytest.fixture
def write_scenario(tmp_path):
    """Write ``ref`` with overrides to a file and return its path."""

    def _write(s: ScenarioConfig, name: str = "case.scenario", **overrides) -> Path:
        if overrides:
            s = with_overrides(s, {k.replace("__", "."): v for k, v in overrides.items()})
        path = tmp_path / name
        path.write_text(dumps_scenario(s), encoding="utf-8")
        return path

    return _write


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one test per acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid and rep.when == "call":
                name = nodeid.split("::test_criterion_")[1]
                lines.append(f"criterion {name}: {'PASS' if outcome == 'passed' else 'FAIL'}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
