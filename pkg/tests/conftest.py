import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from frontline.core import Bounds, Frame, UnitSnapshot  # noqa: E402
from frontline.kernels import KernelSpec  # noqa: E402
from frontline.svm import TrainingSet, fit  # noqa: E402

SYMMETRIC_BOUNDS = Bounds(-2.0, -2.0, 2.0, 2.0)


@pytest.fixture
def two_point_model():
    ts = TrainingSet([(-1.0, 0.0), (1.0, 0.0)], [1, -1], C=10.0)
    return fit(ts, KernelSpec("rbf", gamma=1.0))


@pytest.fixture
def two_unit_frame():
    return Frame(0.0, (UnitSnapshot("g", 0, (-1.0, 0.0)), UnitSnapshot("b", 1, (1.0, 0.0))))


def random_instance(rng, n_lo=4, n_hi=10):
    n = int(rng.integers(n_lo, n_hi + 1))
    x = rng.random((n, 2))
    y = np.array([1.0] * (n // 2) + [-1.0] * (n - n // 2))
    rng.shuffle(y)
    w = rng.uniform(0.25, 1.0, n)
    return x, y, w
