import pytest

from art.smtback import Backend


@pytest.fixture(scope="session")
def backend():
    b = Backend()
    yield b
    b.close()
