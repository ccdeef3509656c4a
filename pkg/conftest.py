import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from src.multi_elicit.core import OutcomeSpace  # noqa: E402
from src.multi_elicit.session_log import configure_session_log  # noqa: E402


@pytest.fixture(autouse=True)
def quiet_session_log():
    """Every test starts with a fresh, non-verbose session log."""
    log = configure_session_log(verbose=False)
    yield log
    log.close()


@pytest.fixture
def bernoulli():
    return OutcomeSpace.from_values([0, 1])


@pytest.fixture
def three_outcomes():
    return OutcomeSpace.from_values([0, 1, 2])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
