import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import build_corpus  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()
