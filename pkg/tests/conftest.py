import pytest

from omegahunt.sieve import build_table


@pytest.fixture(scope="session")
def table_small():
    """Sieve to 10^4: enough for value-level checks."""
    return build_table(10**4)


@pytest.fixture(scope="session")
def table_med():
    """Sieve to 10^5: oracle-equivalence scale."""
    return build_table(10**5)


@pytest.fixture(scope="session")
def table_1e6():
    """Sieve to 10^6: series-residual scale."""
    return build_table(10**6)
