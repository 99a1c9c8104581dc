import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hypdiam.hexagon import build_hexagon


@functools.lru_cache(maxsize=32)
def hexagon(ell: float):
    return build_hexagon(ell)


@pytest.fixture
def hex6():
    return hexagon(6.0)


@pytest.fixture
def hex_regular():
    import math

    return hexagon(2.0 * math.acosh(2.0))
