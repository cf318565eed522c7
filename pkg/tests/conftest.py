import numpy as np
import pytest

from imgrestore.grid import ImageGrid


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_image(rng, side, lo=0.0, hi=255.0):
    return ImageGrid(rng.uniform(lo, hi, size=(side, side)))


@pytest.fixture
def img8(rng):
    return random_image(rng, 8)
