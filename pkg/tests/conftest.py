import pytest

from pmfeedback import awgn, bsc, build_kernel, dmc


@pytest.fixture(scope="session")
def bsc011():
    return bsc("0.11")


@pytest.fixture(scope="session")
def bsc011_kernel(bsc011):
    return build_kernel(bsc011)


@pytest.fixture(scope="session")
def awgn11():
    return awgn(1, 1)


@pytest.fixture(scope="session")
def awgn11_kernel(awgn11):
    return build_kernel(awgn11)


@pytest.fixture(scope="session")
def dmc3():
    return dmc(["0.2", "0.5", "0.3"],
               [["0.7", "0.2", "0.1"],
                ["0.1", "0.8", "0.1"],
                ["0.25", "0.25", "0.5"]])
