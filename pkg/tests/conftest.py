from pathlib import Path

import numpy as np
import pytest

from svcfl.dataset import default_paths
from svcfl.dataset.ingest import load_sources, prepare_silos

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def fixture_paths():
    return {sid: str(p) for sid, p in default_paths(FIXTURES).items()}


@pytest.fixture(scope="session")
def prepared(fixture_paths):
    return prepare_silos(load_sources(fixture_paths))


def blobs(n, d, seed, shift=1.5):
    """Two Gaussian classes separated along every axis."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 0, 1
    X = rng.normal(size=(n, d)) + shift * (2 * y[:, None] - 1)
    return X, y
