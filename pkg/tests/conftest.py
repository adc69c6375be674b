from __future__ import annotations

import numpy as np
import pytest

from sicqb.cli import golden_fiducial_path
from sicqb.formats import read_fiducial
from sicqb.sic import SicPovm

ACCEPTANCE_LINES: list[str] = []

QUBIT_FIDUCIAL = np.array([
    np.cos(np.arccos(1 / np.sqrt(3)) / 2),
    np.exp(1j * np.pi / 4) * np.sin(np.arccos(1 / np.sqrt(3)) / 2),
])
HESSE_FIDUCIAL = np.array([0, 1, -1]) / np.sqrt(2)


@pytest.fixture(scope="session")
def golden_sics() -> dict[int, SicPovm]:
    return {d: SicPovm.from_fiducial(read_fiducial(golden_fiducial_path(d))) for d in range(2, 9)}


@pytest.fixture(scope="session")
def qubit_sic() -> SicPovm:
    return SicPovm.from_fiducial(QUBIT_FIDUCIAL)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
