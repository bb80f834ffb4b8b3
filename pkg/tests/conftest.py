import pytest

from netgen import closed_corpus, open_corpus


@pytest.fixture(scope="session")
def closed_nets():
    return closed_corpus()


@pytest.fixture(scope="session")
def open_nets():
    return open_corpus()
