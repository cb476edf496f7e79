import numpy as np
import pytest
import sympy as sp

from radflow import jetspace as js
from radflow.conslaws import DensityFluxPair, energy, mass
from radflow.eos import EosModel
from radflow.errors import OrderOverflowError, ValidityError
from radflow.jetspace import JetFunction, make_jet, n, r, t

from conftest import EOS_ZOO

POLY = EosModel.polytropic(1.3, 1.0, 0.4)


def rel_max(value_scale):
    val, scale = value_scale
    return float(np.max(np.abs(val) / scale))


# -- total derivatives ----------------------------------------------------------------
def test_total_r_examples():
    assert js.total_r(js.S, make_jet(3, 1.0, dS=(3.0,))) == pytest.approx(3.0)
    assert js.total_r(r * js.rho, make_jet(3, 2.0, rho_val=5.0, dRho=(1.0,))) == pytest.approx(7.0)
    assert js.total_r(js.U_r, make_jet(3, 1.0, dU=(0.0, 4.0))) == pytest.approx(4.0)


def test_dt_substituted_examples():
    assert js.dt_substituted(js.S, make_jet(3, 1.0, U_val=2.0, dS=(3.0,)), POLY) == pytest.approx(-6.0)
    jet = make_jet(3, 1.0, U_val=1.0, rho_val=1.0)
    assert js.dt_substituted(js.rho, jet, POLY) == pytest.approx(-2.0)
    assert js.dt_substituted(t, jet, POLY) == pytest.approx(1.0)


def test_velocity_equation_substitution():
    jet = make_jet(3, 1.5, U_val=0.7, rho_val=2.0, S_val=1.2, dU=(0.3,), dRho=(0.4,), dS=(-0.5,))
    p_S = POLY.partial("p", 0, 1, 2.0, 1.2)
    p_rho = POLY.partial("p", 1, 0, 2.0, 1.2)
    want = -0.7 * 0.3 - (p_S * -0.5 + p_rho * 0.4) / 2.0
    assert js.dt_substituted(js.U, jet, POLY) == pytest.approx(want)


def test_mu_substitution_uses_temperature():
    eos = EosModel.entropic(2.0, 2.0)
    jet = make_jet(3, 1.0, U_val=0.5, rho_val=2.0, S_val=3.0, mu_val=0.1, dMu=(4.0,))
    assert js.dt_substituted(js.mu, jet, eos) == pytest.approx(-6.0 - 0.5 * 4.0)


def test_order_overflow():
    jet = make_jet(3, 1.0, K=3)
    with pytest.raises(OrderOverflowError):
        js.total_r(js.coord("U", 3), jet)


def test_derivatives_commute_after_substitution():
    jets = js.sample_jets(3, 50, seed=1, K=5)
    for f in (js.U * js.S_r, js.rho**2 * js.U_r, r * js.p / js.rho):
        lhs = js.dt_substituted(js.D_r(f), jets, POLY)
        rhs, scale = js.total_r(js.D_t(f), jets, POLY, return_scale=True)
        assert np.max(np.abs(lhs - rhs) / scale) < 1e-9


def test_residual_is_linear():
    jets = js.sample_jets(3, 40, seed=2)
    a, b = JetFunction(js.U * js.S), JetFunction(js.rho * js.S_r)
    lhs = js.scalar_invariant_residual(a * 2.0 + b * 3.0, jets, POLY)
    rhs = 2.0 * js.scalar_invariant_residual(a, jets, POLY) + 3.0 * js.scalar_invariant_residual(b, jets, POLY)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-11)


def test_callable_partials_match_analytic():
    jets = js.sample_jets(3, 20, seed=3)
    f = JetFunction(js.U**2 * js.S_r + r * js.rho)
    g = js.CallableJetFunction(lambda jet, eos: jet.U**2 * jet.dS[0] + jet.r * jet.rho,
                               (js.U, js.S_r, js.rho, r))
    for sym in (js.U, js.S_r, js.rho):
        np.testing.assert_allclose(g.partial(sym)(jets), f.partial(sym)(jets), rtol=1e-6, atol=1e-8)


# -- conservation laws ---------------------------------------------------------------
def test_mass_residual_vanishes(any_eos):
    jets = js.sample_jets(3, 100, seed=4)
    assert rel_max(js.conslaw_residual(mass(), jets, any_eos, return_scale=True)) < 1e-12


def test_energy_residual_vanishes():
    jets = js.sample_jets(3, 100, seed=5)
    assert rel_max(js.conslaw_residual(energy(), jets, POLY, return_scale=True)) < 1e-10


def test_energy_oracle_by_hand():
    # D_t(r^2 rho E) + D_r(r^2 (rho E + p) U) expanded independently with sympy
    jet = make_jet(3, 1.3, U_val=0.6, rho_val=1.4, S_val=0.9, dU=(0.2,), dRho=(-0.3,), dS=(0.5,))
    rr = sp.Symbol("rr")
    kappa0, gamma = 1.3, 0.4
    rho_f = sp.Function("rho")(rr)
    U_f = sp.Function("U")(rr)
    S_f = sp.Function("S")(rr)
    p_f = kappa0 * S_f * rho_f ** (1 + gamma)
    e_f = kappa0 * S_f * rho_f**gamma / gamma
    E = rho_f * (U_f**2 / 2 + e_f)
    rho_t = -sp.diff(U_f * rho_f, rr) - 2 * U_f * rho_f / rr
    U_t = -U_f * sp.diff(U_f, rr) - sp.diff(p_f, rr) / rho_f
    S_t = -U_f * sp.diff(S_f, rr)
    dens_t = rr**2 * (sp.diff(E, rho_f) * rho_t + sp.diff(E, U_f) * U_t + sp.diff(E, S_f) * S_t)
    flux_r = sp.diff(rr**2 * (E + p_f) * U_f, rr)
    expr = (dens_t + flux_r).subs({
        sp.Derivative(rho_f, rr): -0.3, sp.Derivative(U_f, rr): 0.2, sp.Derivative(S_f, rr): 0.5,
    }).subs({rho_f: 1.4, U_f: 0.6, S_f: 0.9}).subs(rr, 1.3)
    assert abs(float(expr)) < 1e-12
    assert abs(js.conslaw_residual(energy(), jet, POLY)) < 1e-12


def test_perturbed_energy_separates():
    jets = js.sample_jets(3, 100, seed=6)
    bad = DensityFluxPair("bad", energy().phi_t, js.multiply(energy().phi_r, 1.01))
    assert rel_max(js.conslaw_residual(bad, jets, POLY, return_scale=True)) > 1e-4


def test_validity_mismatch():
    from radflow.conslaws import entropy_weighted_energy

    with pytest.raises(ValidityError):
        js.conslaw_residual(entropy_weighted_energy(), make_jet(3, 1.0), EosModel.barotropic())


# -- invariants ---------------------------------------------------------------------
def test_scalar_invariants(any_eos):
    jets = js.sample_jets(3, 100, seed=7)
    assert np.all(js.scalar_invariant_residual(js.S, jets, any_eos) == 0.0)
    J1 = r ** (1 - n) * js.S_r / js.rho
    assert rel_max(js.scalar_invariant_residual(J1, jets, any_eos, return_scale=True)) < 1e-10


def test_velocity_is_not_invariant():
    jet = make_jet(3, 1.0, U_val=0.5, rho_val=2.0, S_val=1.0, dRho=(0.5,), dS=(0.3,))
    p_S = POLY.partial("p", 0, 1, 2.0, 1.0)
    p_rho = POLY.partial("p", 1, 0, 2.0, 1.0)
    want = -(p_S * 0.3 + p_rho * 0.5) / 2.0
    assert js.scalar_invariant_residual(js.U, jet, POLY) == pytest.approx(want)
    assert abs(want) > 0.1


def test_oneform_invariants(any_eos):
    jets = js.sample_jets(3, 100, seed=8)
    for J in (r ** (n - 1) * js.rho * js.S, r ** (n - 1) * js.rho):
        assert rel_max(js.oneform_invariant_residual(J, jets, any_eos, return_scale=True)) < 1e-10


def test_oneform_entropy_fails_by_hand():
    jet = make_jet(3, 1.0, U_val=0.4, S_val=2.0, dU=(1.5,))
    assert js.oneform_invariant_residual(js.S, jet, POLY) == pytest.approx(2.0 * 1.5)


def test_vector_invariants(any_eos):
    jets = js.sample_jets(3, 100, seed=9)
    for J in (r ** (1 - n) / (js.rho * js.S), r ** (1 - n) / js.rho):
        assert rel_max(js.vector_invariant_residual(J, jets, any_eos, return_scale=True)) < 1e-10


def test_vector_constant_by_hand():
    assert js.vector_invariant_residual(sp.Integer(1), make_jet(3, 1.0, dU=(2.0,)), POLY) == pytest.approx(-2.0)


# -- Euler operator and triviality ------------------------------------------------------
def test_euler_operator_examples():
    assert js.euler_operator("U", js.U**2 / 2, make_jet(3, 1.0, U_val=3.0)) == pytest.approx(3.0)
    jets = js.sample_jets(3, 50, seed=10)
    assert np.max(np.abs(js.euler_operator("U", js.U * js.U_r, jets))) < 1e-12


def random_theta(rng, degree=2):
    syms = (r, js.U, js.rho, js.S)
    expr = sp.Integer(0)
    for _ in range(4):
        powers = rng.integers(0, degree + 1, size=len(syms))
        term = sp.Float(rng.uniform(-1, 1))
        for s, k in zip(syms, powers):
            term *= s ** int(k)
        expr += term
    return expr


def test_euler_operator_annihilates_total_derivatives():
    rng = np.random.default_rng(11)
    jets = js.sample_jets(3, 50, seed=11)
    for _ in range(5):
        theta = random_theta(rng)
        dens = r ** (n - 1) * (js.total_r_expr(theta) + (n - 1) * theta / r)
        for field in ("U", "rho", "S"):
            val, scale = js.euler_operator(field, dens, jets, return_scale=True)
            assert np.max(np.abs(val) / scale) < 1e-10


def test_trivial_densities():
    jets = js.sample_jets(3, 100, seed=12)
    assert js.is_trivial_density(sp.Float(2.5), jets)
    assert js.is_trivial_density(js.S**2 * js.S_r * r ** (1 - n), jets)
    assert not js.is_trivial_density(js.rho * (r ** (1 - n) * js.S_r / js.rho) ** 2, jets)
    assert not js.is_trivial_density(js.rho, jets)


def test_variational_conditions():
    jets = js.sample_jets(3, 30, seed=13, K=6)
    for val, scale in js.variational_conditions(js.rho, jets, POLY, return_scale=True):
        assert np.max(np.abs(val) / scale) < 1e-9
    dens = js.rho * (js.U**2 / 2 + js.e)
    for val, scale in js.variational_conditions(dens, jets, POLY, return_scale=True):
        assert np.max(np.abs(val) / scale) < 1e-9
    momentum = js.variational_conditions(js.rho * js.U, jets, POLY, return_scale=True)
    assert max(np.max(np.abs(v) / s) for v, s in momentum) > 1e-4


# -- sampling -------------------------------------------------------------------------
def test_sampling_is_seeded():
    a = js.sample_jets(3, 10, seed=5)
    b = js.sample_jets(3, 10, seed=5)
    np.testing.assert_array_equal(a.U, b.U)
    np.testing.assert_array_equal(a.dS[2], b.dS[2])


def test_sampling_box_and_mask():
    jets = js.sample_jets(2, 200, seed=6, min_abs_u=0.05)
    assert jets.K == js.DEFAULT_K
    assert np.all(np.abs(jets.U) >= 0.05)
    assert np.all((jets.rho >= 0.2) & (jets.rho <= 5.0))
    assert np.all((jets.r >= 0.5) & (jets.r <= 5.0))


def test_jet_needs_mu_for_mu_expression():
    with pytest.raises(ValidityError):
        JetFunction(js.mu * js.U)(make_jet(3, 1.0))


@pytest.mark.parametrize("name", sorted(EOS_ZOO))
def test_entropy_gradient_oneform_and_vector(name):
    eos = EOS_ZOO[name]
    jets = js.sample_jets(5, 60, seed=14)
    J = r ** (1 - n) * js.S_r / js.rho
    assert rel_max(js.oneform_invariant_residual(r ** (n - 1) * js.rho * J, jets, eos, return_scale=True)) < 1e-9
    assert rel_max(js.vector_invariant_residual(r ** (1 - n) / (js.rho * J), jets, eos, return_scale=True)) < 1e-9
