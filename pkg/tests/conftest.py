"""Shared builders for the test suite"""
import numpy as np
import pytest

from cell.solver import homogenize
from core.symbol import gradient_symbol, power_symbol
from harness.expressions import build_coefficient
from torus.lattice import Lattice

TWO_PHASE = {"type": "two_phase", "values": [1.0, 4.0], "fraction": 0.5}
SMOOTH_2D = {
    "type": "trig_polynomial",
    "mean": 2.0,
    "modes": [
        {"wave": [1, 0], "amplitude": 0.5, "kind": "cos"},
        {"wave": [0, 1], "amplitude": 0.5, "kind": "sin"},
        {"wave": [1, 1], "amplitude": 0.3, "kind": "cos"},
    ],
}


@pytest.fixture(scope="session")
def unit_lattice_1d():
    return Lattice.rectangular([1.0])


@pytest.fixture(scope="session")
def unit_lattice_2d():
    return Lattice.rectangular([1.0, 1.0])


@pytest.fixture(scope="session")
def gradient_1d():
    return gradient_symbol(1).with_ellipticity()


@pytest.fixture(scope="session")
def gradient_2d():
    return gradient_symbol(2).with_ellipticity()


@pytest.fixture(scope="session")
def second_order_1d():
    return power_symbol(2).with_ellipticity()


@pytest.fixture(scope="session")
def two_phase_g():
    return build_coefficient(TWO_PHASE, [1.0], 128, 1)


@pytest.fixture(scope="session")
def two_phase_data(two_phase_g, gradient_1d):
    data, _ = homogenize(two_phase_g, gradient_1d)
    return data


@pytest.fixture(scope="session")
def two_phase_data_p2(two_phase_g, second_order_1d):
    data, _ = homogenize(two_phase_g, second_order_1d)
    return data


@pytest.fixture(scope="session")
def smooth_g_2d():
    return build_coefficient(SMOOTH_2D, [1.0, 1.0], 32, 2)


@pytest.fixture(scope="session")
def smooth_data_2d(smooth_g_2d, gradient_2d):
    data, _ = homogenize(smooth_g_2d, gradient_2d)
    return data


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
