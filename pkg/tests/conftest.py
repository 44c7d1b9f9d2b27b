import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

sys.path.insert(0, str(Path(__file__).parent))

from fdepth import FunctionalDataset  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def d3():
    """Three constant curves at 1, 2, 3 on four grid points."""
    return FunctionalDataset.from_array(np.repeat([[1.0], [2.0], [3.0]], 4, axis=1))


@pytest.fixture
def d3_csv(tmp_path):
    path = tmp_path / "d3.csv"
    path.write_text("1,1,1,1\n2,2,2,2\n3,3,3,3\n")
    return path


def int_curves(max_n=8, max_p=6, lo=-3, hi=3):
    """Small-integer curve matrices: plenty of ties and exact slab edges."""
    shape = st.tuples(st.integers(1, max_n), st.integers(1, max_p))
    return shape.flatmap(lambda s: arrays(np.float64, s, elements=st.integers(lo, hi).map(float)))


# Acceptance lines collected during the session and echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
