import numpy as np
import pytest


def ks_statistic(samples, cdf):
    """One-sample KS statistic against a callable CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = len(s)
    f = np.asarray(cdf(s), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


@pytest.fixture
def ks():
    return ks_statistic
