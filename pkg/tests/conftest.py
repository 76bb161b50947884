import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mdsc import CodeParams, build_sc, fixtures  # noqa: E402

# toy code: gamma=2, kappa=3, z=3, m=1, L=3
TOY_PM = np.array([[0, 1, 0], [1, 0, 1]])
TOY_CM = np.array([[0, 0, 0], [0, 1, 2]])
TOY_PARAMS = CodeParams(2, 3, 3, 1, 3)


@pytest.fixture(scope="session")
def toy():
    return build_sc(TOY_CM, TOY_PM, TOY_PARAMS)


@pytest.fixture(scope="session")
def sc1():
    return fixtures.sc_code("SC-Code-1")


@pytest.fixture(scope="session")
def sc2():
    return fixtures.sc_code("SC-Code-2")


@pytest.fixture(scope="session")
def md1():
    return fixtures.md_code("MD-SC-Code-1")


@pytest.fixture(scope="session")
def md2():
    return fixtures.md_code("MD-SC-Code-2")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
