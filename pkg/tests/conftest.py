import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cmsunit.survey import scan


@pytest.fixture(scope="session")
def scan0_5000():
    """Full j0 = 0 scan to |Delta| <= 5000 (shared across acceptance tests)."""
    return scan(0, 5000)


@pytest.fixture(scope="session")
def scan1728_5000():
    """Full j0 = 1728 scan to |Delta| <= 5000."""
    return scan(1728, 5000)
