import sys
import warnings
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("psifrac", deadline=None, max_examples=50)
settings.load_profile("psifrac")

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(autouse=True)
def _quiet_overflow():
    # trial LM steps may overflow; they are rejected, not errors
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture
def table1_path():
    return DATA / "world_1910_2010.csv"


@pytest.fixture
def table4_path():
    return DATA / "world_2000_2010.csv"

# shared helper modules live next to the tests
sys.path.insert(0, str(Path(__file__).resolve().parent))
