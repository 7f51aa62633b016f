import pytest

from semrd import load_bundled


@pytest.fixture(scope="session")
def fork_net():
    return load_bundled("fork")


@pytest.fixture(scope="session")
def chain_net():
    return load_bundled("chain")


@pytest.fixture(scope="session")
def scene_net():
    return load_bundled("scene")
