import warnings

import numpy as np
import pytest

import ddefloquet as df
from ddefloquet.systems import s2_model, s3_density
from ddefloquet.verify import s2_linearization


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def s3():
    return s3_density()


@pytest.fixture(scope="session")
def s3_modes(s3):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return df.find_exponents(s3, n_win=10, depth=10, tol=1e-12)


@pytest.fixture(scope="session")
def vdp_model():
    return s2_model()


@pytest.fixture(scope="session")
def vdp_orbit2(vdp_model):
    return df.expand_pl(vdp_model, 0.1, 2)


@pytest.fixture(scope="session")
def vdp_linearization():
    return s2_linearization(0.1, 2)


@pytest.fixture(scope="session")
def vdp_linearization_full():
    # untrimmed kernel band, for tests that compare against exact Jacobians
    return s2_linearization(0.1, 2, bandwidth=None)
