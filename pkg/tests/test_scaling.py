import numpy as np
import pytest
import sympy as sp

from radflow import scaling as sc
from radflow.eos import EosModel
from radflow.errors import IncompatibleScalingError
from radflow.jetspace import r, t

STD = sc.ScalingTransform("space-time-dilation", lam=2.0)


def num(expr, rv, tv=0.3):
    return float(sp.sympify(expr).subs({r: rv, t: tv}))


def test_dilation_example():
    out = sc.apply(STD, {"U": r, "rho": sp.Integer(1), "S": r * t})
    assert num(out["U"], 1.0) == pytest.approx(0.5)
    assert num(out["S"], 2.0, 4.0) == pytest.approx(2.0)


def test_identity_at_unit_lambda():
    tr = sc.ScalingTransform("similarity", {"alpha": 0.4, "beta": 1.2, "nu": 0.7}, 1.0)
    fields = {"U": r**2 + t, "rho": sp.exp(-r), "S": r * t + 1}
    out = sc.apply(tr, fields)
    for k in fields:
        assert sp.simplify(out[k] - fields[k]) == 0


@pytest.mark.parametrize("kind,exps", [
    ("space-time-dilation", {}),
    ("entropy-scaling", {"alpha": 0.5, "nu": 1.5}),
    ("density-scaling", {"alpha": 0.3, "gamma": 0.6, "nu": 1.1}),
    ("similarity", {"alpha": -0.2, "beta": 0.8, "nu": 1.0}),
])
def test_group_property(kind, exps):
    fields = {"U": r**2 - t, "rho": 1 + r * t, "S": 2 + sp.sin(r), "mu": r - t}
    a = sc.ScalingTransform(kind, exps, 2.0)
    b = a.with_lambda(1.5)
    ab = sc.apply(b, sc.apply(a, fields))
    direct = sc.apply(a.with_lambda(3.0), fields)
    rng = np.random.default_rng(0)
    for rv, tv in rng.uniform(0.5, 2.0, (10, 2)):
        for k in fields:
            assert num(ab[k], rv, tv) == pytest.approx(num(direct[k], rv, tv), rel=1e-12, abs=1e-12)


def test_transform_validation():
    with pytest.raises(ValueError):
        sc.ScalingTransform("rotation")
    with pytest.raises(ValueError):
        sc.ScalingTransform("entropy-scaling", {"alpha": 1.0})
    with pytest.raises(ValueError):
        sc.ScalingTransform("space-time-dilation", lam=-1.0)


# -- symmetries of the radial system --------------------------------------------------------
@pytest.mark.parametrize("family", ["uniform", "linear_velocity"])
def test_dilation_maps_solutions_to_solutions(family):
    eos = EosModel.polytropic(1.0, 1.0, 0.4)
    assert sc.symmetry_residual_check(STD, family, eos, 3) < 1e-10


def test_entropic_similarity_family_is_a_solution():
    eos = EosModel.entropic(1.0, 1.0)
    fields = sc.solution_family("entropic_similarity", 3, eos)
    rng = np.random.default_rng(1)
    res = sc.pde_residuals(fields, eos, 3, rng.uniform(0.5, 2, 30), rng.uniform(0, 1, 30))
    assert max(np.max(np.abs(v)) for v in res.values()) < 1e-10


def test_similarity_preserves_entropic_family():
    eos = EosModel.entropic(1.0, 1.0)
    tr = sc.ScalingTransform("similarity", {"alpha": 0.5, "beta": 1.0, "nu": 1.0}, 2.0)
    assert sc.symmetry_residual_check(tr, "entropic_similarity", eos, 3) < 1e-10


def test_wrong_transform_breaks_the_solution():
    eos = EosModel.entropic(1.0, 1.0)
    tr = sc.ScalingTransform("density-scaling", {"alpha": 1.0, "gamma": 1.0, "nu": 0.0}, 2.0)
    with pytest.raises(IncompatibleScalingError):
        sc.symmetry_residual_check(tr, "entropic_similarity", eos, 3)
    assert sc.symmetry_residual_check(tr, "entropic_similarity", eos, 3, check=False) > 1e-3


def test_solution_family_errors():
    with pytest.raises(ValueError):
        sc.solution_family("entropic_similarity", 2)
    with pytest.raises(ValueError):
        sc.solution_family("shock", 3)


# -- EOS compatibility -----------------------------------------------------------------------
def test_check_eos():
    es = sc.ScalingTransform("entropy-scaling", {"alpha": 1.0, "nu": 2.0}, 2.0)
    sc.check_eos(es, EosModel.polytropic(1.0, 2.0, 0.4))
    with pytest.raises(IncompatibleScalingError):
        sc.check_eos(es, EosModel.polytropic(1.0, 1.0, 0.4))
    sc.check_eos(STD, EosModel.barotropic())


def test_energy_check_rejects_log_energy():
    # p = rho gives e = log(rho), which does not scale
    ds = sc.ScalingTransform("density-scaling", {"alpha": 1.0, "gamma": 0.0, "nu": 0.0}, 2.0)
    eos = EosModel.barotropic(1.0, 1.0)
    sc.check_eos(ds, eos)
    with pytest.raises(IncompatibleScalingError):
        sc.check_eos(ds, eos, require_energy=True)


# -- weight tables ----------------------------------------------------------------------------
def test_expected_weight_values():
    assert sc.expected_weight("energy", STD, 3) == 3.0
    assert sc.expected_weight("entropy_gradient", STD, 2, {"q": 1}) == -2.0
    ds = sc.ScalingTransform("density-scaling", {"alpha": 1.0, "gamma": 0.5, "nu": 0.0}, 2.0)
    assert sc.expected_weight("energy", ds, 2) == pytest.approx(2 + 2 * 0.5 + 1)


def test_incompatible_cells_raise():
    es = sc.ScalingTransform("entropy-scaling", {"alpha": 1.0, "nu": 1.0}, 2.0)
    for law in ("dilational_energy", "similarity_energy", "energy_like", "a_integral"):
        with pytest.raises(IncompatibleScalingError):
            sc.expected_weight(law, es, 3, {"q": 1})


def test_required_specialization_enforced():
    ds = sc.ScalingTransform("density-scaling", {"alpha": 1.0, "gamma": 0.5, "nu": 0.0}, 2.0)
    with pytest.raises(IncompatibleScalingError):
        sc.expected_weight("dilational_energy", ds, 3)
    ok = sc.ScalingTransform("density-scaling", {"alpha": 1.0, "gamma": 2 / 3, "nu": 0.0}, 2.0)
    assert sc.expected_weight("dilational_energy", ok, 3) == pytest.approx(4 * (1 + 2 / 3))


def test_entropy_scaling_without_nu_matches_dilation_weight():
    es = sc.ScalingTransform("entropy-scaling", {"alpha": 1.0, "nu": 0.0}, 2.0)
    for law in ("energy", "mass"):
        assert sc.expected_weight(law, es, 3) == sc.expected_weight(law, STD, 3)


def test_errata_only_change_flagged_cells():
    sim = sc.ScalingTransform("similarity", {"alpha": 0.5, "beta": 1.0, "nu": 1.0}, 2.0)
    a = sc.expected_weight("energy_like", sim, 3, {"q": 2})
    b = sc.expected_weight("energy_like", sim, 3, {"q": 2}, corrected=True)
    assert a - b == pytest.approx(2.0)
    assert sc.expected_weight("energy", sim, 3) == sc.expected_weight("energy", sim, 3, corrected=True)


def test_missing_parameter():
    with pytest.raises(ValueError):
        sc.expected_weight("entropy_gradient", STD, 3)
    with pytest.raises(KeyError):
        sc.table_cell("momentum", "similarity")
