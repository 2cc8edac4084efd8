import sys
from pathlib import Path

import mpmath as mp
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tacfermi.numerics import PrecisionContext


@pytest.fixture(autouse=True)
def _high_ambient_precision():
    """Comparisons in tests happen above the precision under test."""
    old = mp.mp.prec
    mp.mp.prec = 640
    yield
    mp.mp.prec = old


@pytest.fixture
def ctx256():
    return PrecisionContext(bits=256)


@pytest.fixture
def ctx512():
    return PrecisionContext(bits=512)
