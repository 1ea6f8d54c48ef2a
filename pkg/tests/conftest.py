import sys

import numpy as np
import pytest

from oqamwifi import oqam


@pytest.fixture(scope="session")
def proto():
    return oqam.design_prototype(64, 4)


@pytest.fixture(scope="session")
def aux_weights(proto):
    return oqam.intrinsic_weights(proto, oqam.AUX_SPAN_K, oqam.AUX_SPAN_N)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
