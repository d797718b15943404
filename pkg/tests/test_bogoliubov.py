import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochfluid import (InteractionKernel, InvalidConfigurationError, PhysicalParams,
                        QuadraticHamiltonianPoint, SingularModeError)
from stochfluid.bogoliubov import (chemical_potential, coeffs, compensation_x, diagonal_coefficient,
                                   diagonalize, ground_state_energy, offdiagonal_residual)

mpmath.mp.dps = 50


def reference_x(omega, t):
    # 2x = artanh(t / (omega + t)), in 50-digit arithmetic
    return mpmath.atanh(mpmath.mpf(t) / (mpmath.mpf(omega) + mpmath.mpf(t))) / 2


def naive_offdiagonal(omega, t, x):
    # direct form (omega + t) u v - t (u^2 + v^2)/2 with the sign convention of the library
    u, v = mpmath.cosh(x), mpmath.sinh(x)
    return -(mpmath.mpf(omega) + t) * u * v + mpmath.mpf(t) * (u * u + v * v) / 2


def test_free_point_is_untouched():
    p = QuadraticHamiltonianPoint(1.0, 0.0)
    c, diag = diagonalize(p)
    assert c.x == 0.0 and c.u == 1.0 and c.v == 0.0
    assert offdiagonal_residual(p, c) == 0.0
    assert diag == 1.0


def test_unit_point():
    p = QuadraticHamiltonianPoint(1.0, 1.0)
    x = compensation_x(p)
    assert x == pytest.approx(float(reference_x(1, 1)), rel=1e-15)
    assert x == pytest.approx(np.log(3.0) / 4.0, rel=1e-15)
    c, diag = diagonalize(p)
    assert abs(offdiagonal_residual(p, c)) < 1e-14
    assert diag == pytest.approx(np.sqrt(3.0), rel=1e-14)


def test_condensate_mode_is_singular():
    with pytest.raises(SingularModeError):
        compensation_x(QuadraticHamiltonianPoint(0.0, 1.0))


@pytest.mark.parametrize("omega,t", [(-1.0, 0.5), (1.0, -0.5)])
def test_rejects_negative_inputs(omega, t):
    with pytest.raises(InvalidConfigurationError):
        compensation_x(QuadraticHamiltonianPoint(omega, t))


@settings(max_examples=200, deadline=None)
@given(omega=st.floats(1e-6, 1e6), t=st.floats(0, 1e6))
def test_compensation_invariants(omega, t):
    p = QuadraticHamiltonianPoint(omega, t)
    c, diag = diagonalize(p)
    assert abs(c.u ** 2 - c.v ** 2 - 1.0) <= 1e-12 * max(1.0, c.u ** 2)
    assert abs(offdiagonal_residual(p, c)) <= 1e-10 * (omega + t)
    exact = np.sqrt(omega ** 2 + 2 * omega * t)
    assert abs(diag - exact) <= 1e-10 * exact
    assert c.x == pytest.approx(float(reference_x(omega, t)), rel=1e-12, abs=1e-300)


def test_high_precision_reference_on_strong_coupling():
    # t >> omega is where the naive tanh formula loses digits
    omega, t = 1e-4, 1e4
    x = compensation_x(QuadraticHamiltonianPoint(omega, t))
    ref = reference_x(omega, t)
    assert x == pytest.approx(float(ref), rel=1e-14)
    assert abs(naive_offdiagonal(omega, t, ref)) < mpmath.mpf("1e-30")


def test_vectorised_sweep():
    omega = np.geomspace(1e-3, 1e3, 50)
    t = np.linspace(0.0, 5.0, 50)
    p = QuadraticHamiltonianPoint(omega, t)
    c, diag = diagonalize(p)
    assert diag.shape == (50,)
    np.testing.assert_allclose(diag, np.sqrt(omega ** 2 + 2 * omega * t), rtol=1e-12)


def test_cosh_identity_at_quarter_coupling():
    # t / (omega + t) = 1/2 gives tanh 2x = 1/2
    x = compensation_x(QuadraticHamiltonianPoint(1.0, 1.0))
    assert x == pytest.approx(0.2746531, abs=1e-7)
    c = coeffs(x)
    assert c.u ** 2 + c.v ** 2 == pytest.approx(1 / np.sqrt(1 - 0.25), rel=1e-14)


@pytest.mark.parametrize("omega,t", [(1.0, 1.0), (0.1, 3.0), (5.0, 0.2)])
def test_compensated_diagonal_is_minimal(omega, t):
    p = QuadraticHamiltonianPoint(omega, t)
    _, best = diagonalize(p)
    rng = np.random.default_rng(int(omega * 10 + t))
    trial = diagonal_coefficient(p, coeffs(rng.uniform(-3, 3, 20)))
    assert np.all(trial >= best * (1 - 1e-14))
    scan = diagonal_coefficient(p, coeffs(np.linspace(-3, 3, 20001)))
    assert scan.min() == pytest.approx(best, rel=1e-6)


def test_coeffs_from_angle():
    c = coeffs(0.3)
    assert c.u == np.cosh(0.3) and c.v == np.sinh(0.3)
    p = QuadraticHamiltonianPoint(2.0, 0.5)
    assert diagonal_coefficient(p, coeffs(0.0)) == 2.0 + 0.5


def test_chemical_potential_and_constant():
    params = PhysicalParams(gamma=0.5, g=InteractionKernel("gaussian", 2.0, 1.0))
    assert chemical_potential(params) == pytest.approx(1.0)
    e1, const = ground_state_energy(params, N0=10.0)
    assert e1 == pytest.approx(0.5 * 0.5 * 10.0 * 2.0 - 1.0 * 10.0)
    assert const == pytest.approx(-5.0)
    # stationarity in N0 at fixed lambda/V: d/dN0 (lambda N0^2 g0 / 2V - mu N0) = 0 at mu = gamma g0
    lam_over_v = params.gamma / 10.0
    h = 1e-4
    energy = lambda n0: lam_over_v * n0 ** 2 * 2.0 / 2 - chemical_potential(params) * n0
    assert (energy(10.0 + h) - energy(10.0 - h)) / (2 * h) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(InvalidConfigurationError):
        ground_state_energy(params, 0.0)
