import pytest

from confmass.config import load_config, load_expected


@pytest.fixture(scope="session")
def flat_cfg():
    return load_config("flat.chart")


@pytest.fixture(scope="session")
def iso_cfg():
    return load_config("schwarzschild.chart")


@pytest.fixture(scope="session")
def lee_cfg():
    return load_config("schwarzschild-lee.chart")


@pytest.fixture(scope="session")
def rot_cfg():
    return load_config("schwarzschild-rot-lee.chart")


@pytest.fixture(scope="session")
def p4_cfg():
    return load_config("perturbed4.chart")


@pytest.fixture(scope="session")
def ends_cfg():
    return load_config("twoends.ends")


@pytest.fixture(scope="session")
def expected():
    return load_expected()
