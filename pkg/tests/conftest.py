import pytest

from oacspectra import AlgebraicRate, CodeParams, partition_cosets, solve_asymptotic_ccs


@pytest.fixture(scope="session")
def f_half():
    """Asymptotic spectrum at r = 1/2 on the reference 4096-node grid."""
    return solve_asymptotic_ccs(0.5, 4096, 1e-9)


@pytest.fixture(scope="session")
def p4():
    return CodeParams(4, 0.5)


@pytest.fixture(scope="session")
def cp4(p4):
    return partition_cosets(p4)


@pytest.fixture(scope="session")
def golden():
    return AlgebraicRate.parse("x^2-x-1")


@pytest.fixture(scope="session")
def plastic():
    return AlgebraicRate.parse("x^3-x-1")
