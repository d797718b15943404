import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from stochfluid import (DivergentOccupationError, InvalidConfigurationError, bose_occupation,
                        condensate_fraction, critical_temperature, normal_density)
from stochfluid.condensation import ZETA_3_2, conservation_residual, normal_density_closed_form


def theta_c_formula(rho, m):
    return (rho / ZETA_3_2) ** (2 / 3) / (2 * np.pi * m)


def test_bose_occupation_examples():
    assert bose_occupation(np.log(2.0), 1.0) == pytest.approx(1.0, rel=1e-15)
    assert bose_occupation(1.0, np.inf) == 0.0
    np.testing.assert_array_equal(bose_occupation(np.array([1.0, 2.0]), np.inf), [0.0, 0.0])
    with pytest.raises(DivergentOccupationError):
        bose_occupation(0.0, 1.0)
    with pytest.raises(InvalidConfigurationError):
        bose_occupation(1.0, 1.0, mu=0.1)
    assert bose_occupation(1.0, 1.0, mu=-1.0) == pytest.approx(1 / np.expm1(2.0))


def test_normal_density_known_value():
    # beta = 2 pi m gives exactly zeta(3/2)
    assert normal_density(2 * np.pi) == pytest.approx(ZETA_3_2, abs=1e-6)
    assert ZETA_3_2 == pytest.approx(2.612375, abs=1e-6)


def test_normal_density_against_direct_cartesian_quadrature():
    # independent route: spherical shells in p rather than the scaled variable
    beta, m = 0.7, 1.3
    val, _ = integrate.quad(lambda p: 4 * np.pi * p * p / np.expm1(beta * p * p / (2 * m)),
                            0, 30, epsrel=1e-12, limit=400)
    assert normal_density(beta, m) == pytest.approx(val, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(0.01, 100), m=st.floats(0.1, 10))
def test_normal_density_scaling(beta, m):
    assert normal_density(beta, m) == pytest.approx(normal_density_closed_form(beta, m), rel=1e-9)
    # rescaling beta -> beta/4 multiplies by 4^(3/2) = 8
    assert normal_density(beta / 4, m) == pytest.approx(8 * normal_density(beta, m), rel=1e-9)


def test_normal_density_limits():
    assert normal_density(np.inf) == 0.0
    assert normal_density(1e8) < 1e-10
    with pytest.raises(InvalidConfigurationError):
        normal_density(0.0)


def test_critical_temperature_closed_form():
    assert critical_temperature(1.0, 1.0) == pytest.approx(0.083933, rel=5e-3)
    for rho, m in [(1.0, 1.0), (3.0, 0.5), (0.2, 2.0)]:
        assert critical_temperature(rho, m) == pytest.approx(theta_c_formula(rho, m), rel=1e-9)
    # rho -> 8 rho multiplies theta_c by 4
    assert critical_temperature(8.0) == pytest.approx(4 * critical_temperature(1.0), rel=1e-9)
    with pytest.raises(InvalidConfigurationError):
        critical_temperature(0.0)


def test_condensate_fraction_examples():
    tc = critical_temperature(1.0)
    assert condensate_fraction(0.0, 1.0).c == 1.0
    assert condensate_fraction(tc, 1.0, theta_c=tc).c == 0.0
    assert condensate_fraction(2 * tc, 1.0, theta_c=tc).c == 0.0
    s = condensate_fraction(tc / 2, 1.0, theta_c=tc)
    assert s.c == pytest.approx(1 - 0.5 ** 1.5, rel=1e-12)
    with pytest.raises(InvalidConfigurationError):
        condensate_fraction(-1.0, 1.0)


def test_condensate_fraction_monotone_and_conserving():
    rho = 2.5
    tc = critical_temperature(rho)
    thetas = np.linspace(0, tc, 25)
    cs = [condensate_fraction(th, rho, theta_c=tc) for th in thetas]
    values = [s.c for s in cs]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert all(0 <= v <= rho for v in values)
    for s in cs:
        assert conservation_residual(s) <= 1e-6
