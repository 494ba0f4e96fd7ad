import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def pairs():
    from waveseg.filterbank import BUILTIN_NAMES, builtin_filter_pair

    return {name: builtin_filter_pair(name) for name in BUILTIN_NAMES}
