from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    return FIXTURES / "demo"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return FIXTURES / "golden"
