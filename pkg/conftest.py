"""Shared pytest fixtures."""

import numpy as np
import pytest

from config import SPEED_OF_LIGHT, SPEED_OF_LIGHT_ENV, set_tolerance_overrides
from src.rng import make_rng
from src.spin_algebra import SpinQuantum, spin_matrices


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    monkeypatch.delenv(SPEED_OF_LIGHT_ENV, raising=False)
    set_tolerance_overrides()
    yield
    set_tolerance_overrides()


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240611)


@pytest.fixture
def c() -> float:
    return SPEED_OF_LIGHT


@pytest.fixture(params=[1, 2, 3, 4], ids=lambda v: f"two_s={v}")
def sm(request):
    return spin_matrices(SpinQuantum(request.param))
