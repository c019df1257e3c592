import numpy as np
import pytest

from stochconv import (
    HilbertSpec,
    IntegrandSpec,
    QWienerSpec,
    SemigroupSpec,
    SpectralOperator,
    TimeGrid,
    sample_increments,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


@pytest.fixture
def scalar_space():
    return HilbertSpec(1, "H")


@pytest.fixture
def scalar_wiener(scalar_space):
    """Unit-covariance scalar noise on [0, 1] with 200 steps, 400 paths."""
    spec = QWienerSpec(scalar_space, [1.0])
    return sample_increments(spec, TimeGrid(1.0, 200), 424242, 400)


@pytest.fixture
def unit_integrand(scalar_space):
    return IntegrandSpec.from_constant(SpectralOperator(scalar_space, scalar_space, [1.0]))


@pytest.fixture
def ou_semigroup(scalar_space):
    return SemigroupSpec(scalar_space, rates=[1.0], horizon=1.0)


def relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale
