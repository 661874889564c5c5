import numpy as np
import pytest

from routhkit.systems import (make_classical_demo, make_se2, make_se2_nonsimple,
                              make_wong_demo)

A_REF = 0.5
MU_REF = 0.3


@pytest.fixture(scope="session")
def se2():
    return make_se2(A_REF, MU_REF)


@pytest.fixture(scope="session")
def se2_original():
    return make_se2(A_REF, MU_REF, basis="original")


@pytest.fixture(scope="session")
def se2_nonsimple():
    return make_se2_nonsimple(A_REF, MU_REF)


@pytest.fixture(scope="session")
def classical():
    return make_classical_demo()


@pytest.fixture(scope="session")
def wong():
    return make_wong_demo()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
