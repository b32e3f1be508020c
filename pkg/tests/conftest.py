import functools

import pytest

from biphoton_capacity.geometry import build_grid, default_extent
from biphoton_capacity.joint import joint_matrix
from biphoton_capacity.state import Basis, GaussianBiphotonState

REFERENCE_STATE = GaussianBiphotonState(sigma_c=40.0, sigma_p=1500.0, wavelength=650.0)


@functools.lru_cache(maxsize=None)
def reference_grids(n: int, basis: Basis, offset: float = 0.0):
    extent = default_extent(REFERENCE_STATE, basis, 0.8)
    return build_grid(n, extent, (0.0, 0.0), basis), build_grid(n, extent, (offset, offset), basis)


@functools.lru_cache(maxsize=None)
def reference_joint(n: int, basis: Basis, offset: float = 0.0):
    return joint_matrix(REFERENCE_STATE, *reference_grids(n, basis, offset))


@pytest.fixture
def reference_state():
    return REFERENCE_STATE


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, name: str, checks: dict) -> None:
    """Record one acceptance line; ``checks`` maps a description to a bool."""
    ok = all(checks.values())
    detail = "; ".join(f"{'ok' if v else 'FAILED'}: {k}" for k, v in checks.items())
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion} ({name}) :: {detail}")
    assert ok, detail


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split()[0])):
            terminalreporter.write_line(line)
