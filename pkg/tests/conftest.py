from __future__ import annotations

import numpy as np
import pytest

from fziplab.gf import make_field

FIELD_PARAMS = [(2, 1), (2, 2), (3, 1), (3, 2)]


@pytest.fixture(params=FIELD_PARAMS, ids=lambda pn: f"GF{pn[0]}^{pn[1]}")
def field(request):
    return make_field(*request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
