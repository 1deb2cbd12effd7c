import pytest

from cclg.terms import reset_fresh_names


@pytest.fixture(autouse=True)
def _fresh_names():
    reset_fresh_names()
    yield
