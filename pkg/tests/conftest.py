import numpy as np
import pytest
from hypothesis import settings

from smolu.dynamics import make_rng

settings.register_profile("smolu", deadline=None, max_examples=30, derandomize=True)
settings.load_profile("smolu")


@pytest.fixture
def rng():
    return make_rng(1234)


def even_field(N, y1=0.0, y2=0.0):
    from smolu.spectral import TWO_PI, SpectralField
    return SpectralField.from_modes(N, {0: 1 / TWO_PI, 2: y1 / TWO_PI, 4: y2 / TWO_PI})


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
