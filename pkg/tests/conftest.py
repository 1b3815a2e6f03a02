"""Shared fixtures: the three-whole worked example and its model settings."""

import numpy as np
import pytest

from setdecode.model import ModelParams
from setdecode.system import build_system


@pytest.fixture
def s3():
    """Three wholes over three parts, the smallest system with real overlap."""
    return build_system({"w1": ["p1", "p2"], "w2": ["p2", "p3"],
                         "w3": ["p1", "p2", "p3"]})


@pytest.fixture
def params25():
    return ModelParams(alpha=0.1, gamma=0.9, pi=0.25, lam=5.0)


@pytest.fixture
def x110():
    return np.array([1, 1, 0], dtype=np.uint8)
