import numpy as np
import pytest
from hypothesis import strategies as st

from stablespline.grid import make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20141029)


@st.composite
def grids(draw, min_size=1, max_size=30, min_gap=1e-3, max_gap=5.0):
    gaps = draw(st.lists(st.floats(min_gap, max_gap), min_size=min_size - 1,
                         max_size=max_size - 1))
    return make_grid(np.concatenate(([0.0], np.cumsum(gaps))))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
