import numpy as np
import pytest

from stochfluid import DensityField, PhysicalParams, Radiative, make_grid

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def grid1d():
    return make_grid(1, 4.0, 256)


@pytest.fixture
def unit_params():
    return PhysicalParams(m=1.0, beta=1.0)


@pytest.fixture
def phonons():
    return Radiative(1.0)


def gaussian_field(grid, center=0.0, width=0.3, amplitude=1.0, radius=None):
    q = grid.nodes
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    values = amplitude * np.exp(-np.sum((q - c) ** 2, axis=-1) / (2 * width ** 2))
    if radius is not None:
        values = np.where(grid.norms <= radius, values, 0.0)
    return DensityField(grid, values)
