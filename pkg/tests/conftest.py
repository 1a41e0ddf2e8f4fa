from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def binomial_ok(count: int, shots: int, p: float, k: float = 4.0) -> bool:
    sigma = np.sqrt(max(p * (1 - p), 0.0) / shots)
    if sigma == 0:
        return count / shots == p
    return abs(count / shots - p) <= k * sigma
