import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stochfluid import (BogoliubovBulk, FormFactor, Free, InteractionKernel,
                        InvalidConfigurationError, ModelInconsistencyError, NoSoundSpeedError,
                        PhysicalParams, Polaron, Radiative, Tabulated, bogoliubov_dispersion,
                        energy_difference, epsilon, sound_speed)
from stochfluid.dispersion import model_from_dict

unit = PhysicalParams(m=1.0, gamma=1.0, g=InteractionKernel("constant", 1.0))


def test_epsilon_examples():
    assert epsilon(0.0, 1.0) == 0.0
    assert epsilon((2.0, 0.0, 0.0), 1.0) == 2.0
    p = np.array([0.3, -1.2, 0.7])
    assert epsilon(p, 1.7) == epsilon(-p, 1.7)


def test_bogoliubov_dispersion_examples():
    assert bogoliubov_dispersion(0.0, unit) == 0.0
    oracle = float(mpmath.sqrt(mpmath.mpf("0.25") + mpmath.mpf(1)))
    assert bogoliubov_dispersion(1.0, unit) == pytest.approx(oracle, rel=1e-15)
    assert oracle == pytest.approx(1.118034, abs=1e-6)


def test_bogoliubov_small_p_slope():
    # sqrt(2 gamma g(0) / 2m) = 1 for the unit params
    slopes = [float(bogoliubov_dispersion(p, unit)) / p for p in (1e-2, 1e-3, 1e-4)]
    assert abs(slopes[-1] - 1.0) < 1e-8
    assert abs(slopes[0] - 1.0) > abs(slopes[-1] - 1.0)


def test_bogoliubov_attractive_regime_rejected():
    model = BogoliubovBulk(1.0, 1.0, InteractionKernel("constant", -1.0))
    with pytest.raises(ModelInconsistencyError):
        model.energy(0.5)
    with pytest.raises(ModelInconsistencyError):
        PhysicalParams(gamma=1.0, g=InteractionKernel("constant", -1.0))


@settings(max_examples=60, deadline=None)
@given(p=st.floats(0, 50), gamma=st.floats(0, 10), g0=st.floats(0.01, 5), lam=st.floats(0.1, 5))
def test_bogoliubov_dominates_free_energy(p, gamma, g0, lam):
    model = BogoliubovBulk(1.3, gamma, InteractionKernel("gaussian", g0, lam))
    E = float(model.energy(p))
    eps = float(epsilon(p, 1.3))
    assert E >= 0
    assert E >= eps * (1 - 1e-15) - 1e-300
    if gamma * eps == 0 or g0 * np.exp(-p * p / lam ** 2) == 0:
        assert E == pytest.approx(eps, rel=1e-15)


def test_energy_difference_examples():
    for model in (Radiative(1.0), Free(1.0), unit_model()):
        assert energy_difference((0.5, 0.0, 0.0), (0.0, 0.0, 0.0), model, 1.0) == 0.0
    assert energy_difference((0.5, 0, 0), (0.2, 0, 0), Radiative(1.0), 1.0) == pytest.approx(0.12, abs=1e-15)
    assert energy_difference((1, 0, 0), (1, 0, 0), Polaron(2.0), 1.0) == pytest.approx(1.5, abs=1e-15)
    # E(p, 0) = E(0), also for a gapped law
    assert energy_difference((0.3, 0.1), (0.0, 0.0), Polaron(2.0), 1.0) == pytest.approx(2.0, abs=1e-15)


def unit_model():
    return BogoliubovBulk.from_params(unit)


@settings(max_examples=60, deadline=None)
@given(p=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       k=st.lists(st.floats(-10, 10), min_size=3, max_size=3), m=st.floats(0.1, 10))
def test_free_energy_difference_identity(p, k, m):
    p, k = np.array(p), np.array(k)
    lhs = energy_difference(p, k, Free(m), m)
    rhs = epsilon(k, m) + (k @ k - 2 * p @ k) / (2 * m)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_sound_speed():
    assert sound_speed(Radiative(2.0)) == pytest.approx(2.0, abs=1e-14)
    assert sound_speed(unit_model()) == pytest.approx(1.0, abs=1e-6)
    gauss = BogoliubovBulk(2.0, 0.5, InteractionKernel("gaussian", 3.0, 1.5))
    assert sound_speed(gauss) == pytest.approx(np.sqrt(0.5 * 3.0 / 2.0), abs=1e-6)
    with pytest.raises(NoSoundSpeedError):
        sound_speed(Polaron(1.0))
    with pytest.raises(NoSoundSpeedError):
        sound_speed(Free(1.0))


def test_tabulated_from_csv(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("k,E\n0,0\n1,2\n3,4\n")
    model = Tabulated.from_csv(path)
    np.testing.assert_allclose(model.radial([0.5, 2.0, 10.0]), [1.0, 3.0, 4.0])
    assert model.energy((0.0, 0.5)) == 1.0
    assert sound_speed(model) == pytest.approx(2.0)
    assert model_from_dict({"kind": "tabulated", "path": "table.csv"}, base=tmp_path).radial(1.0) == 2.0


def test_tabulated_requires_increasing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0\n1,1\n1,2\n")
    with pytest.raises(InvalidConfigurationError):
        Tabulated.from_csv(path)


def test_kernels_and_form_factors():
    g = InteractionKernel("gaussian", 2.0, 1.0)
    p = np.array([[0.3, -0.4], [1.0, 0.0]])
    np.testing.assert_array_equal(g(p), g(-p))
    assert g(0.0) == 2.0
    f = FormFactor("gaussian", 1.0 + 1.0j, 2.0)
    assert f.weight(0.0, 0.0) == pytest.approx(2.0)
    assert f.weight(2.0, 0.0) == pytest.approx(2.0 * np.exp(-1.0))
    assert FormFactor().weight(np.zeros((3, 2)), np.zeros(2)).shape == (3,)
    with pytest.raises(InvalidConfigurationError):
        FormFactor("gaussian", 1.0, None)
    with pytest.raises(InvalidConfigurationError):
        InteractionKernel("yukawa")


@pytest.mark.parametrize("bad", [dict(m=0.0), dict(beta=-1.0), dict(gamma=-0.1), dict(rho=0.0)])
def test_params_validation(bad):
    with pytest.raises(InvalidConfigurationError):
        PhysicalParams(**bad)
