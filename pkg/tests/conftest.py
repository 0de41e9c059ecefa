import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from pidkit import fixtures  # noqa: E402
from pidkit.config import SolverConfig  # noqa: E402

@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

@pytest.fixture(scope="session")
def cfg():
    return SolverConfig(threads=1)

@pytest.fixture(scope="session")
def four_bit():
    return fixtures.one_bit_each()
