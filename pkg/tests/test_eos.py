import math

import numpy as np
import pytest

from radflow.eos import EosModel, Variant
from radflow.errors import DomainError, EosMismatchError

from conftest import EOS_ZOO, general_polytropic


def samples(count=200, seed=3):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.1, 10.0, count), rng.uniform(0.1, 10.0, count)


# -- hand-evaluated values ---------------------------------------------------------
def test_pressure_examples():
    assert EosModel.barotropic(1.0, 2.0).pressure(2.0, 1.0) == pytest.approx(4.0)
    assert EosModel.entropic(3.0, 1.0).pressure(7.0, 2.0) == pytest.approx(6.0)
    assert EosModel.polytropic(1.0, 0.0, 0.0).pressure(5.0, 1.0) == pytest.approx(5.0)


def test_entropic_pressure_ignores_density():
    eos = EosModel.entropic(3.0, 1.0)
    assert eos.pressure(0.5, 2.0) == eos.pressure(40.0, 2.0)


def test_sound_speed_examples():
    # gamma = 1 and p = 2 at rho = 1 (S = 2) gives a^2 = (1 + gamma) p / rho = 4
    eos = EosModel.polytropic(1.0, 1.0, 1.0)
    assert eos.pressure(1.0, 2.0) == pytest.approx(2.0)
    assert eos.sound_speed_sq(1.0, 2.0) == pytest.approx(4.0)
    assert EosModel.entropic(2.0, 3.0).sound_speed_sq(1.0, 1.0) == 0.0
    assert EosModel.barotropic(1.0, 2.0).sound_speed_sq(3.0, 1.0) == pytest.approx(6.0)


def test_internal_energy_examples():
    assert EosModel.entropic(2.0, 1.0).internal_energy(4.0, 3.0) == pytest.approx(-1.5)
    # gamma = 2/n with n = 2 and kappa = 1 (S = 0 in the exponential)
    assert EosModel.ideal_gas(2).internal_energy(3.0, 0.0) == pytest.approx(3.0)
    assert EosModel.barotropic(1.0, 2.0).internal_energy(1.0, 1.0) == pytest.approx(1.0)


def test_temperature_examples():
    assert EosModel.barotropic(1.0, 2.0).temperature(1.0, 1.0) == 0.0
    assert EosModel.entropic(2.0, 2.0).temperature(2.0, 3.0) == pytest.approx(-6.0)
    assert EosModel.polytropic(1.0, 1.0, 1.0).temperature(2.0, 5.0) == pytest.approx(2.0)


def test_ideal_gas_energy_closed_form():
    n = 3
    eos = EosModel.ideal_gas(n, k=0.7)
    rho, s = 2.5, 0.4
    kappa = math.exp((2 / n) * s / 0.7)
    assert eos.internal_energy(rho, s) == pytest.approx(0.5 * n * kappa * rho ** (2 / n))


# -- degenerate exponents use logarithms ------------------------------------------------
def test_log_antiderivatives():
    assert EosModel.barotropic(2.0, 1.0).internal_energy(math.e, 1.0) == pytest.approx(2.0)
    assert EosModel.polytropic(1.0, 1.0, 0.0).internal_energy(math.e**2, 3.0) == pytest.approx(6.0)
    eos = EosModel.entropic(1.0, 1.0)
    assert eos.entropy_weight_potential(1.0, -1.0, 0, math.e) == pytest.approx(1.0)


# -- thermodynamic identities at random samples ------------------------------------
@pytest.mark.parametrize("name", [k for k in sorted(EOS_ZOO) if k != "entropic"])
def test_energy_density_derivative_is_p_over_rho_squared(name):
    eos = EOS_ZOO[name]
    rho, s = samples()
    h = 1e-5 * rho
    de = (eos.internal_energy(rho + h, s) - eos.internal_energy(rho - h, s)) / (2 * h)
    target = eos.pressure(rho, s) / rho**2
    assert np.all(np.abs(de - target) < 1e-8 * (1 + np.abs(target)))


@pytest.mark.parametrize("name", sorted(EOS_ZOO))
def test_temperature_is_entropy_derivative_of_energy(name):
    eos = EOS_ZOO[name]
    rho, s = samples(seed=4)
    h = 1e-5 * s
    de = (eos.internal_energy(rho, s + h) - eos.internal_energy(rho, s - h)) / (2 * h)
    T = eos.temperature(rho, s)
    assert np.all(np.abs(T - de) < 1e-8 * (1 + np.abs(T)))


@pytest.mark.parametrize("name", [k for k in sorted(EOS_ZOO) if k != "entropic"])
def test_sound_speed_positive(name):
    rho, s = samples(seed=5)
    assert np.all(EOS_ZOO[name].sound_speed_sq(rho, s) > 0)


def test_entropic_sound_speed_identically_zero():
    rho, s = samples(seed=6)
    assert np.all(EosModel.entropic(1.3, 2.5).sound_speed_sq(rho, s) == 0.0)


@pytest.mark.parametrize("name", sorted(EOS_ZOO))
def test_pressure_not_constant(name):
    eos = EOS_ZOO[name]
    rho, s = samples(seed=7)
    p_rho = eos.partial("p", 1, 0, rho, s)
    p_s = eos.partial("p", 0, 1, rho, s)
    assert np.any(p_rho != 0) or np.any(p_s != 0)


def test_general_quadrature_matches_polytropic_closed_form():
    closed = EosModel.polytropic(1.3, 1.0, 0.4)
    general = general_polytropic(1.3, 1.0, 0.4)
    rho, s = samples(20, seed=8)
    # the closed form uses rho**gamma/gamma; the general variant integrates from rho0 = 1
    shift = closed.internal_energy(1.0, s)
    got = general.internal_energy(rho, s)
    want = closed.internal_energy(rho, s) - shift
    assert np.all(np.abs(got - want) <= 1e-10 * np.maximum(1.0, np.abs(want)))


def test_mixed_partials_match_finite_differences():
    eos = EosModel.polytropic(1.1, 1.5, 0.3)
    rho, s = 1.7, 2.2
    h = 1e-4
    fd = (eos.partial("p", 1, 0, rho, s + h) - eos.partial("p", 1, 0, rho, s - h)) / (2 * h)
    assert eos.partial("p", 1, 1, rho, s) == pytest.approx(fd, rel=1e-7)
    fd = (eos.partial("e", 0, 1, rho + h, s) - eos.partial("e", 0, 1, rho - h, s)) / (2 * h)
    assert eos.partial("e", 1, 1, rho, s) == pytest.approx(fd, rel=1e-7)


def test_entropy_weight_potential_closed_form():
    eos = EosModel.entropic(2.0, 3.0)
    s = 1.7
    # K = int F kappa' dS with F = S, kappa = 2 S**3
    assert eos.entropy_weight_potential(1.0, 1.0, 0, s) == pytest.approx(2.0 * 3.0 * s**4 / 4.0)
    # companion L = F kappa - K
    L = eos.entropy_weight_companion(1.0, 1.0, 0, s)
    assert L == pytest.approx(s * 2.0 * s**3 - 2.0 * 3.0 * s**4 / 4.0)


# -- errors ----------------------------------------------------------------------
def test_domain_errors():
    with pytest.raises(DomainError):
        EosModel.barotropic().pressure(0.0, 1.0)
    with pytest.raises(DomainError):
        EosModel.polytropic(1.0, 0.5, 0.4).pressure(1.0, -1.0)
    with pytest.raises(DomainError):
        EosModel.entropic(1.0, 0.0)
    with pytest.raises(DomainError):
        EosModel.barotropic(1.0, 0.0)


def test_non_entropic_weight_potential_rejected():
    with pytest.raises(EosMismatchError):
        EosModel.barotropic().entropy_weight_potential(1.0, 1.0, 0, 1.0)


def test_from_spec():
    eos = EosModel.from_spec({"variant": "ideal_gas", "k": 2.0}, n=3)
    assert eos.variant is Variant.IDEAL_GAS and eos.params["gamma"] == pytest.approx(2 / 3)
    assert EosModel.from_spec({"variant": "entropic", "kappa0": 2.0, "nu": 1.0}).pressure(1.0, 3.0) == 6.0
    with pytest.raises(DomainError):
        EosModel.from_spec({"variant": "vdw"})
    with pytest.raises(DomainError):
        EosModel.from_spec({"variant": "polytropic", "bogus": 1.0})
