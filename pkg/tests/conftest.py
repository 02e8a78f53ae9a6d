import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def naive_matmul(a, b):
    """Triple-loop product with exactly rounded accumulation."""
    import math
    n, k = a.shape
    m = b.shape[1]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            out[i, j] = math.fsum(a[i, t] * b[t, j] for t in range(k))
    return out
