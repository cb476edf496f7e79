from dataclasses import replace

import numpy as np
import pytest

from radflow import conslaws as cl
from radflow import jetspace as js
from radflow.eos import EosModel
from radflow.errors import ValidityError
from radflow.jetspace import make_jet

from conftest import EOS_ZOO

ENTROPIC = EOS_ZOO["entropic"]


def residual(law, eos, n_dim=3, count=200, seed=0):
    jets = cl.sample_for(law, eos, n_dim, count, seed)
    return cl.max_relative_residual(law, jets, eos)


CASES = [(name, law.label, k) for name, eos in sorted(EOS_ZOO.items())
         for k, law in enumerate(cl.catalog(eos))]


@pytest.mark.parametrize("eos_name,label,k", CASES, ids=[f"{a}-{b}" for a, b, _ in CASES])
def test_catalog_law_holds(eos_name, label, k):
    eos = EOS_ZOO[eos_name]
    assert residual(cl.catalog(eos)[k], eos) < 1e-9


@pytest.mark.parametrize("eos_name,label,k", CASES, ids=[f"{a}-{b}" for a, b, _ in CASES])
def test_mutated_flux_fails(eos_name, label, k):
    eos = EOS_ZOO[eos_name]
    law = cl.catalog(eos)[k]
    if law.name == "constant":
        pytest.skip("zero flux is unchanged by scaling")
    assert residual(cl.perturbed(law, 1.01), eos) > 1e-4


def test_catalog_validity_filter():
    baro = {law.name for law in cl.catalog(EOS_ZOO["barotropic"])}
    assert "enthalpy_flux" in baro
    assert not {"dilational_energy", "similarity_energy", "energy_like"} & baro
    ideal = {law.name for law in cl.catalog(EOS_ZOO["ideal_gas"])}
    assert {"dilational_energy", "similarity_energy"} <= ideal
    ent = {law.name for law in cl.catalog(ENTROPIC)}
    assert {"energy_like", "a_integral", "entropy_weighted_energy"} <= ent


def test_invalid_eos_raises():
    with pytest.raises(ValidityError):
        cl.make_law("enthalpy_flux").check_validity(EOS_ZOO["polytropic"])
    jets = js.sample_jets(3, 5, seed=1)
    with pytest.raises(ValidityError):
        cl.conslaw_residual(cl.make_law("dilational_energy"), jets, EOS_ZOO["barotropic"])


def test_unknown_law():
    with pytest.raises(KeyError):
        cl.make_law("momentum")


@pytest.mark.parametrize("n_dim", [2, 5])
def test_other_dimensions(n_dim):
    for law in (cl.make_law("energy"), cl.make_law("entropy_gradient", q=2)):
        assert residual(law, EOS_ZOO["polytropic"], n_dim=n_dim, count=100) < 1e-9


# -- moving fluxes ------------------------------------------------------------------------
def test_energy_moving_flux_is_pU():
    eos = EosModel.polytropic(1.0, 0.0, 0.0)  # p = rho
    jet = make_jet(3, 1.2, U_val=3.0, rho_val=2.0)
    assert cl.moving_flux(cl.make_law("energy"), jet, eos) == pytest.approx(6.0)


def test_enthalpy_moving_flux():
    eos = EosModel.barotropic(1.0, 2.0)  # e + p/rho = 2 rho
    jet = make_jet(3, 1.0, U_val=2.0, rho_val=2.5)
    assert cl.moving_flux(cl.make_law("enthalpy_flux"), jet, eos) == pytest.approx(3.0)


def test_mass_moving_flux_vanishes():
    jets = js.sample_jets(3, 20, seed=2)
    assert np.all(cl.moving_flux(cl.make_law("mass"), jets, EOS_ZOO["polytropic"]) == 0.0)


@pytest.mark.parametrize("eos_name", sorted(EOS_ZOO))
def test_nonlocal_moving_flux_is_enthalpy_minus_kinetic(eos_name):
    eos = EOS_ZOO[eos_name]
    law = cl.make_law("nonlocal_enthalpy_flux")
    jets = cl.sample_for(law, eos, 3, 100, seed=3)
    psi, scale = cl.moving_flux(law, jets, eos, return_scale=True)
    want = eos.internal_energy(jets.rho, jets.S) + eos.pressure(jets.rho, jets.S) / jets.rho - jets.U**2 / 2
    assert np.all(np.abs(psi - want) < 1e-10 * scale)


def test_nonlocal_law_needs_mu():
    law = cl.make_law("nonlocal_enthalpy_flux")
    assert law.uses_mu and law.measure_weight == 0
    jets = cl.sample_for(law, ENTROPIC, 3, 200, seed=4)
    assert cl.max_relative_residual(law, jets, ENTROPIC) < 1e-9


# -- classification ---------------------------------------------------------------------
@pytest.mark.parametrize("name,params,want", [
    ("mass", {}, cl.INTEGRAL_INVARIANT),
    ("entropy_gradient", {"q": 1}, cl.INTEGRAL_INVARIANT),
    ("energy", {}, cl.NON_ADVECTED),
    ("constant", {}, cl.TRIVIAL),
])
def test_classify_examples(name, params, want):
    assert cl.classify(cl.make_law(name, **params), EOS_ZOO["polytropic"]) == want


def test_classify_not_conserved():
    assert cl.classify(cl.perturbed(cl.make_law("energy")), EOS_ZOO["polytropic"]) == cl.NOT_CONSERVED


@pytest.mark.parametrize("f", ["product", "sum_squares"])
def test_first_order_entropic_laws_are_invariants(f):
    law = cl.make_law("entropic_first_order", form=1, f=f)
    assert cl.classify(law, ENTROPIC) == cl.INTEGRAL_INVARIANT


@pytest.mark.parametrize("a,b", [
    (("energy_like", {"q": 1}), ("energy", {})),
    (("entropy_weighted_energy", {"F0": 1.0, "mu": 0.0}), ("energy", {})),
    (("entropy_weighted_energy_alt", {}), ("entropy_weighted_energy", {})),
])
def test_differences_are_trivial(a, b):
    diff = cl.difference(cl.make_law(a[0], **a[1]), cl.make_law(b[0], **b[1]))
    assert cl.classify(diff, ENTROPIC) == cl.TRIVIAL


def test_difference_needs_matching_weights():
    with pytest.raises(ValueError):
        cl.difference(cl.make_law("energy"), cl.make_law("nonlocal_enthalpy_flux"))


def test_halved_alt_flux_is_not_conserved():
    # the correction term U (pF - L) carries no factor 1/2
    law = cl.make_law("entropy_weighted_energy_alt")
    moving = law.phi_r - js.U * law.phi_t
    halved = replace(law, phi_r=js.U * law.phi_t + js.multiply(moving, 0.5))
    assert residual(law, ENTROPIC) < 1e-9
    assert residual(halved, ENTROPIC) > 1e-4


def test_entropy_weight_potential_closed_form():
    # F = S, kappa = kappa0 S  ->  K = kappa0 S^2 / 2
    eos = EosModel.entropic(2.0, 1.0)
    law = cl.make_law("entropy_weighted_energy", F0=1.0, mu=1.0)
    jet = make_jet(3, 1.0, U_val=0.0, rho_val=1.0, S_val=3.0)
    assert law.phi_t(jet, eos) == pytest.approx(-2.0 * 9.0 / 2.0)


def test_a_integral_uses_admissible_jets():
    law = cl.make_law("a_integral")
    jets = cl.sample_for(law, ENTROPIC, 3, 50, seed=5)
    assert np.all(jets.U > 0)
