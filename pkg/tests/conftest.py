# Add src/ to sys.path so modules can import each other with absolute imports
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from fan import orthogonal_completion, polygon_cone, quadrant, ray_fan, simplex_cone, square_cone  # noqa: E402

FANS = ROOT / "fans"
GOLDEN = ROOT / "tests" / "golden"


@pytest.fixture
def ray():
    fan = ray_fan()
    return fan, orthogonal_completion(fan)


@pytest.fixture
def quad():
    fan = quadrant()
    return fan, orthogonal_completion(fan)


@pytest.fixture
def simplex3():
    fan = simplex_cone(3)
    return fan, orthogonal_completion(fan)


@pytest.fixture
def square():
    fan = square_cone()
    return fan, orthogonal_completion(fan)


@pytest.fixture
def pentagon():
    fan = polygon_cone(5)
    return fan, orthogonal_completion(fan)


@pytest.fixture
def fans_dir():
    return FANS


@pytest.fixture
def golden_dir():
    return GOLDEN
