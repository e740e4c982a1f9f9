from pathlib import Path

import pytest

from couplings.settings import Settings, configure


FIXTURES = Path(__file__).parent.parent / 'fixtures'


@pytest.fixture(autouse=True)
def default_settings():
    configure(Settings())
    yield
    configure(Settings())


@pytest.fixture
def fixtures():
    return FIXTURES
