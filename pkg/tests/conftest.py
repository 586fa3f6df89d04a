import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

from mmiboost.dataset import Dataset  # noqa: E402


def make_dataset(X, y, name="toy", raw=False):
    return Dataset(np.asarray(X, float), np.asarray(y, np.int8), name=name, raw=raw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def noisy_data():
    """Uniform features in [0, 1] with labels from a noisy linear rule."""
    r = np.random.default_rng(7)
    X = r.random((80, 4))
    y = np.where(X[:, 0] + 0.5 * X[:, 1] + 0.3 * r.standard_normal(80) > 0.75, 1, -1)
    return make_dataset(X, y)
