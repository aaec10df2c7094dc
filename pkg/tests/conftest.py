import numpy as np
import pytest

from lsmgraph import arclength_reparameterize, hardy_weinberg


@pytest.fixture(scope="session")
def hw_curve():
    """Arclength-parameterized Hardy-Weinberg curve, shared across tests."""
    return arclength_reparameterize(hardy_weinberg(), tol=1e-10)


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))
