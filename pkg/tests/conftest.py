import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from engine.confrac import build_liouville_alpha, golden_ratio
from engine.sieve import liouville_sieve, mobius_sieve


@pytest.fixture(scope="session")
def liouville_alpha():
    return build_liouville_alpha()


@pytest.fixture(scope="session")
def golden():
    return golden_ratio(40)


@pytest.fixture(scope="session")
def mu_table():
    return mobius_sieve(10**5)


@pytest.fixture(scope="session")
def lambda_table():
    return liouville_sieve(10**4)
