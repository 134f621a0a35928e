import itertools

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def sigma_by_subsets(lam, k):
    """Brute-force elementary symmetric polynomial (oracle, small m only)."""
    if k == 0:
        return 1.0
    return float(sum(np.prod(c) for c in itertools.combinations(lam, k)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
