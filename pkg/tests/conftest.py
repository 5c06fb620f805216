import numpy as np
import pytest

from temporalcube import limitlaw


@pytest.fixture(scope="session")
def limit_ctx():
    return limitlaw.build_context()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240801)
