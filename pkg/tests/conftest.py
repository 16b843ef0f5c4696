import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from couplestress.geometry import make_domain  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def unit_box():
    return make_domain("box", 1.0, 8)


@pytest.fixture(scope="session")
def unit_ball():
    return make_domain("ball", 1.0, 16)
