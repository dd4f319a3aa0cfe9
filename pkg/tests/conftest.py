import sys
from pathlib import Path

import numpy as np
import pytest

from animqa.synth import synth_walk_rig

sys.path.insert(0, str(Path(__file__).parent))

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def walker():
    """Full 18-joint walking character, 60 frames at 30 fps."""
    return synth_walk_rig(seed=3)


@pytest.fixture(scope="session")
def small_walker():
    """A cheap 6-joint character for tests that loop over many cases."""
    return synth_walk_rig(joint_count=6, frame_count=30, seed=11, points_per_bone=12)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
