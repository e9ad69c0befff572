from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="module")
def fixtures_dir_module() -> Path:
    return FIXTURES


def fixture_path(*parts: str) -> Path:
    return FIXTURES.joinpath(*parts)
