import numpy as np
import pytest

from scldpc import catalog_lookup


@pytest.fixture(scope="session")
def massey():
    """Catalog code: rate 2/3, m=13, J=4."""
    return catalog_lookup("massey-r23-m13-j4")


@pytest.fixture(scope="session")
def robinson():
    """Catalog code: rate 3/4, m=19, J=4."""
    return catalog_lookup("robinson-r34-m19-j4")


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0DEC)
