import sys

import numpy as np
import pytest

from pcman import validate
from pcman.core import TEXT_RECIPROCITY_TOL

from oracles import C0


@pytest.fixture
def c0():
    """The four-alternative example matrix, values as printed (4 decimals)."""
    return validate(C0, tol=TEXT_RECIPROCITY_TOL)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
