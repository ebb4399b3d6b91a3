import pytest

from symuniv.modform import qexp_newform


@pytest.fixture(scope="session")
def delta_small():
    return qexp_newform(12, 2000)


@pytest.fixture(scope="session")
def delta():
    return qexp_newform(12, 100_000)


@pytest.fixture(scope="session")
def form16():
    return qexp_newform(16, 2000)


@pytest.fixture(scope="session")
def form18():
    return qexp_newform(18, 300)
