import numpy as np
import pytest

from phasekit.scales import ScaleParam


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_scale():
    return ScaleParam(1.0)
