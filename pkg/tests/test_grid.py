import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as quad

from stochfluid import (DensityField, GridMismatchError, InvalidConfigurationError, integrate,
                        make_grid, mollified_delta)
from stochfluid.grid import default_sigma


def test_make_grid_1d_nodes():
    g = make_grid(1, 1.0, 4)
    np.testing.assert_array_equal(g.axis, [-0.75, -0.25, 0.25, 0.75])
    assert g.spacing == 0.5
    assert g.size == 4


def test_make_grid_3d_corners():
    g = make_grid(3, 2.0, 2)
    assert g.spacing == 2.0
    pts = {tuple(p) for p in g.flat_nodes}
    assert pts == {(sx, sy, sz) for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)}


@pytest.mark.parametrize("args", [(2, 1.0, 3), (1, 0.0, 4), (1, -1.0, 4), (4, 1.0, 4), (1, 1.0, 0)])
def test_make_grid_rejects_bad_config(args):
    with pytest.raises(InvalidConfigurationError):
        make_grid(*args)


@pytest.mark.parametrize("d,N", [(1, 6), (2, 8), (3, 4)])
def test_grid_invariants(d, N):
    g = make_grid(d, 1.5, N)
    assert g.flat_nodes.shape == (N ** d, d)
    assert np.all(np.abs(g.flat_nodes) <= g.q_max)
    # symmetric under q -> -q, exactly
    np.testing.assert_array_equal(g.axis[::-1], -g.axis)


def test_integrate_examples():
    g = make_grid(1, 1.0, 4)
    assert integrate(DensityField(g, np.ones(4))) == 2.0
    assert integrate(DensityField.zeros(g)) == 0.0
    g3 = make_grid(3, 1.0, 4)
    v = np.zeros(g3.shape)
    v[1, 2, 3] = 1.0
    assert integrate(DensityField(g3, v)) == pytest.approx(0.125, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0, 10), b=st.floats(0, 10), seed=st.integers(0, 2**32 - 1))
def test_integrate_linear_and_monotone(a, b, seed):
    g = make_grid(2, 1.0, 6)
    rng = np.random.default_rng(seed)
    f, h = rng.random(g.shape), rng.random(g.shape)
    lhs = integrate(DensityField(g, a * f + b * h))
    rhs = a * integrate(DensityField(g, f)) + b * integrate(DensityField(g, h))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)
    assert integrate(DensityField(g, f + h)) >= integrate(DensityField(g, f))


def test_density_field_rejects_invalid_values():
    g = make_grid(1, 1.0, 4)
    with pytest.raises(InvalidConfigurationError):
        DensityField(g, [0.0, -1e-3, 0.0, 0.0])
    with pytest.raises(InvalidConfigurationError):
        DensityField(g, [0.0, np.nan, 0.0, 0.0])
    with pytest.raises(GridMismatchError):
        DensityField(g, np.zeros(5))


def test_density_field_is_immutable():
    g = make_grid(1, 1.0, 4)
    n = DensityField(g, np.ones(4))
    with pytest.raises(ValueError):
        n.values[0] = 2.0


def test_mollified_delta_peak_and_symmetry():
    sigma = 0.3
    assert mollified_delta(0.0, sigma) == pytest.approx(1 / (sigma * np.sqrt(2 * np.pi)), rel=1e-15)
    x = np.linspace(-2, 2, 41)
    np.testing.assert_array_equal(mollified_delta(x, sigma), mollified_delta(-x, sigma))


def test_mollified_delta_normalised():
    sigma = 0.07
    value, _ = quad.quad(lambda x: float(mollified_delta(x, sigma)), -8 * sigma, 8 * sigma, points=[0.0],
                         epsabs=1e-14, epsrel=1e-13)
    assert abs(value - 1.0) < 1e-12


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_mollified_delta_rejects_width(sigma):
    with pytest.raises(InvalidConfigurationError):
        mollified_delta(0.0, sigma)


def test_mollified_delta_weak_convergence():
    def phi(x):
        return np.cos(x) + x ** 2 + 0.3 * x
    errors = []
    for sigma in (0.2, 0.1, 0.05, 0.025):
        dx = sigma / 20
        x = np.arange(-10 * sigma, 10 * sigma + dx / 2, dx)
        errors.append(abs(np.sum(phi(x) * mollified_delta(x, sigma)) * dx - phi(0.0)))
    assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    assert errors[-1] < 1e-3


def test_default_sigma_scales_with_cell_energy():
    g = make_grid(1, 4.0, 256)
    assert default_sigma(g, 1.0) == pytest.approx(4 * g.spacing ** 2 / 2)
    assert default_sigma(g, 2.0) == pytest.approx(default_sigma(g, 1.0) / 2)
