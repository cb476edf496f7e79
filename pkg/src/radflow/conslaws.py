"""Catalog of radial conservation laws (density/flux pairs) and their classification.

A law is a pair ``(phi_t, phi_r)`` with

    D_t(r^w phi_t) + D_r(r^w phi_r) = 0       on solutions,

where ``w`` is the measure weight (``n - 1`` except for the two laws whose
integral is taken against plain ``dr``). The moving flux
``psi = phi_r - U phi_t`` is the flux through a material boundary; laws
with ``psi == 0`` are integral invariants.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
import sympy as sp

from . import invariants as inv
from . import jetspace as js
from .eos import EosModel, Variant
from .errors import ValidityError
from .jetspace import JetFunction, n, r, t

ALL_VARIANTS = frozenset(Variant)
ENTROPIC_ONLY = frozenset({Variant.ENTROPIC})

INTEGRAL_INVARIANT = "integral-invariant"
NON_ADVECTED = "non-advected"
TRIVIAL = "trivial"
NOT_CONSERVED = "not-conserved"

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityFluxPair:
    """A conserved density ``phi_t`` and radial flux ``phi_r`` with validity metadata."""

    name: str
    phi_t: JetFunction
    phi_r: JetFunction
    eos_validity: frozenset = ALL_VARIANTS
    order: int = 0
    measure_weight: object = n - 1
    params: Mapping = field(default_factory=dict)
    #: jets must satisfy this mask (e.g. U > 0 where A - t is used)
    admissible: Callable | None = None

    @property
    def label(self):
        inner = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}({inner})" if inner else self.name

    @property
    def params_str(self):
        return ";".join(f"{k}={v}" for k, v in self.params.items())

    @property
    def uses_mu(self):
        return self.phi_t.uses_mu or self.phi_r.uses_mu

    def valid_for(self, eos: EosModel):
        return eos.variant in self.eos_validity

    def check_validity(self, eos):
        if eos is None or not self.valid_for(eos):
            allowed = ", ".join(sorted(v.value for v in self.eos_validity))
            got = "none" if eos is None else eos.name
            raise ValidityError(f"{self.label} holds only for EOS in {{{allowed}}}, got {got}")

    def moving_flux_fn(self) -> JetFunction:
        return self.phi_r - js.U * self.phi_t


def _pair(name, phi_t, phi_r, validity=ALL_VARIANTS, weight=None, admissible=None, **params):
    phi_t, phi_r = JetFunction(phi_t, name=f"{name}.phi_t"), JetFunction(phi_r, name=f"{name}.phi_r")
    return DensityFluxPair(
        name=name, phi_t=phi_t, phi_r=phi_r, eos_validity=frozenset(validity),
        order=phi_t.arity, measure_weight=n - 1 if weight is None else weight,
        params=dict(params), admissible=admissible,
    )


def _advected(name, density, validity=ALL_VARIANTS, admissible=None, **params):
    return _pair(name, density, js.U * density, validity, admissible=admissible, **params)


# -- the building blocks -----------------------------------------------------------
_energy_density = js.rho * (js.U**2 / 2 + js.e)
_p_r = js.p_rho * js.rho_r + js.p_S * js.S_r


def mass():
    return _advected("mass", js.rho)


def generalized_entropy(f="power", **fparams):
    fn = inv.resolve_f(f, **fparams)
    return _advected("generalized_entropy", js.rho * fn(js.S), f=f, **fparams)


def entropy_gradient(q=1):
    J1 = inv.catalog_invariant("J1").expr.expr
    return _advected("entropy_gradient", js.rho * J1 ** (2 * q), q=q)


def invariant_integral(l=1, f="power", **fparams):
    """``rho f(J_0, ..., J_l)`` over the J hierarchy (any EOS)."""
    fn = inv.resolve_f(f, **fparams)
    args = [inv.hierarchy(None, "J", k, K=js.MAX_SYMBOL_ORDER).expr.expr for k in range(l + 1)]
    return _advected("invariant_integral", js.rho * fn(*args), l=l, f=f, **fparams)


def energy():
    return _pair("energy", _energy_density, js.U * _energy_density + js.p * js.U)


def nonlocal_enthalpy_flux():
    """Needs the nonlocal potential mu with ``d mu/dt = T``; integrated against dr."""
    phi_t = js.U - js.mu * js.S_r
    phi_r = js.U**2 / 2 + js.e + js.p / js.rho - js.mu * js.U * js.S_r
    return _pair("nonlocal_enthalpy_flux", phi_t, phi_r, weight=0)


def dilational_energy():
    phi_t = t * _energy_density - r * js.rho * js.U / 2
    return _pair("dilational_energy", phi_t, js.U * phi_t + (t * js.U - r / 2) * js.p,
                 {Variant.IDEAL_GAS})


def similarity_energy():
    phi_t = t**2 * _energy_density - t * r * js.rho * js.U + r**2 * js.rho / 2
    return _pair("similarity_energy", phi_t, js.U * phi_t + t * (t * js.U - r) * js.p,
                 {Variant.IDEAL_GAS})


def enthalpy_flux():
    return _pair("enthalpy_flux", js.U, js.U**2 / 2 + js.e + js.p / js.rho,
                 {Variant.BAROTROPIC}, weight=0)


def energy_like(q=1):
    """``rho (U^2/2 + (r/n) p_r/rho)^q``, i.e. ``rho (J_{1,1}/2)^q`` (entropic)."""
    base = js.U**2 / 2 + r / n * _p_r / js.rho
    return _advected("energy_like", js.rho * base**q, ENTROPIC_ONLY, q=q)


def _a_mask(jets, eos):
    return inv.a_admissible(jets, eos)


def a_integral():
    """``rho (A - t)``; its integral grows at the rate of the enclosed mass."""
    J21 = inv.catalog_invariant("J21").expr.expr
    return _advected("a_integral", js.rho * J21, ENTROPIC_ONLY, admissible=_a_mask)


def entropy_weighted_energy(F0=1.0, mu=1.0):
    """``rho U^2 F(S)/2 - K(S)`` with ``F = F0 S**mu`` and ``K = int F kappa' dS`` (entropic)."""
    K = js.EntropyWeightFn(F0, mu, 0, js.S)
    phi_t = js.rho * js.U**2 * F0 * js.S**mu / 2 - K
    return _pair("entropy_weighted_energy", phi_t, js.U * phi_t + js.U * K, ENTROPIC_ONLY,
                 F0=F0, mu=mu)


def entropy_weighted_energy_alt(F0=1.0, mu=1.0):
    """The same law written with ``L(S) = int F'(S) p dS``: density ``(U^2/2 + e) rho F + L``.

    Moving flux ``U (p F - L)``, which equals ``U K`` since ``L = F kappa - K``.
    """
    F = F0 * js.S**mu
    L = js.WeightCompanionFn(F0, mu, 0, js.S)
    phi_t = _energy_density * F + L
    return _pair("entropy_weighted_energy_alt", phi_t, js.U * phi_t + js.U * (js.p * F - L),
                 ENTROPIC_ONLY, F0=F0, mu=mu)


def entropic_invariant_integral(family="J1", l=1, f="power", **fparams):
    """``rho f(J_{family,1}, ..., J_{family,l})`` (entropic)."""
    fn = inv.resolve_f(f, **fparams)
    args = [inv._hierarchy(family, k).expr.expr for k in range(1, l + 1)]
    dens = js.rho * fn(*args)
    adm = _a_mask if family == "J2" else None
    return _advected("entropic_invariant_integral", dens, ENTROPIC_ONLY, admissible=adm,
                     family=family, l=l, f=f, **fparams)


def entropic_first_order(form=1, f="product", **fparams):
    """First-order entropic densities in their invariant forms.

    form 1: ``rho f(S, J'_1, J_{1,1})``; form 2: ``r^(1-n) f(S, J'_1, J_{1,1}) D_r A``.
    """
    fn = inv.resolve_f(f, **fparams)
    args = [inv.catalog_invariant(nm).expr.expr for nm in ("S", "JP1", "J11")]
    if form == 1:
        dens, adm = js.rho * fn(*args), None
    elif form == 2:
        dens = r ** (1 - n) * fn(*args) * js.total_r_expr(inv.A_expr())
        adm = _a_mask
    else:
        raise ValueError("form must be 1 or 2")
    return _advected("entropic_first_order", dens, ENTROPIC_ONLY, admissible=adm,
                     form=form, f=f, **fparams)


def constant_density(c=1.0):
    """``phi_t = c`` with zero flux: a locally trivial law."""
    return _pair("constant", sp.Float(c), sp.S.Zero, c=c)


LAWS: dict[str, Callable[..., DensityFluxPair]] = {
    "mass": mass,
    "generalized_entropy": generalized_entropy,
    "entropy_gradient": entropy_gradient,
    "invariant_integral": invariant_integral,
    "energy": energy,
    "nonlocal_enthalpy_flux": nonlocal_enthalpy_flux,
    "dilational_energy": dilational_energy,
    "similarity_energy": similarity_energy,
    "enthalpy_flux": enthalpy_flux,
    "energy_like": energy_like,
    "a_integral": a_integral,
    "entropy_weighted_energy": entropy_weighted_energy,
    "entropy_weighted_energy_alt": entropy_weighted_energy_alt,
    "entropic_invariant_integral": entropic_invariant_integral,
    "entropic_first_order": entropic_first_order,
    "constant": constant_density,
}


def make_law(name: str, **params) -> DensityFluxPair:
    """Build a catalog law by name, e.g. ``make_law("entropy_gradient", q=2)``."""
    try:
        ctor = LAWS[name]
    except KeyError:
        raise KeyError(f"unknown conservation law {name!r}") from None
    return ctor(**params)


#: default parameter choices instantiating the catalog's function families
DEFAULT_ENTRIES = (
    ("mass", {}),
    ("generalized_entropy", {"f": "power", "k": 2}),
    ("generalized_entropy", {"f": "exp_damped"}),
    ("entropy_gradient", {"q": 1}),
    ("entropy_gradient", {"q": 2}),
    ("invariant_integral", {"l": 1, "f": "power", "k": 2}),
    ("invariant_integral", {"l": 2, "f": "product"}),
    ("invariant_integral", {"l": 2, "f": "exp_damped"}),
    ("energy", {}),
    ("nonlocal_enthalpy_flux", {}),
    ("dilational_energy", {}),
    ("similarity_energy", {}),
    ("enthalpy_flux", {}),
    ("energy_like", {"q": 1}),
    ("energy_like", {"q": 2}),
    ("a_integral", {}),
    ("entropy_weighted_energy", {"F0": 1.0, "mu": 1.0}),
    ("entropy_weighted_energy_alt", {"F0": 1.0, "mu": 1.0}),
    ("entropic_invariant_integral", {"family": "J1", "l": 1, "f": "power", "k": 2}),
    ("entropic_invariant_integral", {"family": "J1", "l": 2, "f": "product"}),
    ("entropic_invariant_integral", {"family": "J2", "l": 1, "f": "power", "k": 2}),
    ("entropic_invariant_integral", {"family": "J2", "l": 2, "f": "product"}),
    ("entropic_first_order", {"form": 1, "f": "product"}),
    ("entropic_first_order", {"form": 1, "f": "sum_squares"}),
    ("entropic_first_order", {"form": 2, "f": "product"}),
)


def all_laws(entries=DEFAULT_ENTRIES):
    return [make_law(name, **params) for name, params in entries]


def catalog(eos: EosModel, entries=DEFAULT_ENTRIES):
    """The catalog entries valid for ``eos``."""
    return [law for law in all_laws(entries) if law.valid_for(eos)]


# -- operations ---------------------------------------------------------------------
def conslaw_residual(pair, jet, eos, *, return_scale=False):
    return js.conslaw_residual(pair, jet, eos, return_scale=return_scale)


def moving_flux(pair: DensityFluxPair, jet, eos=None, *, return_scale=False):
    """``phi_r - U phi_t`` at the jet (scale: 1 + |phi_r| + |U phi_t|)."""
    fr = pair.phi_r(jet, eos)
    uft = np.asarray(jet.U) * pair.phi_t(jet, eos)
    value = js._squeeze(fr - uft)
    if not return_scale:
        return value
    return value, js._squeeze(1.0 + np.abs(fr) + np.abs(uft))


def perturbed(pair: DensityFluxPair, factor=1.01) -> DensityFluxPair:
    """Mutation control: the same law with its flux multiplied by ``factor``."""
    return replace(pair, name=f"{pair.name}*flux{factor:g}",
                   phi_r=js.multiply(pair.phi_r, factor))


def difference(a: DensityFluxPair, b: DensityFluxPair, name=None) -> DensityFluxPair:
    """``a - b`` as a pair; both must share the measure weight."""
    if sp.simplify(sp.sympify(a.measure_weight) - b.measure_weight) != 0:
        raise ValueError("pairs with different measure weights cannot be subtracted")
    phi_t = a.phi_t - b.phi_t
    return DensityFluxPair(
        name=name or f"{a.label}-{b.label}", phi_t=phi_t, phi_r=a.phi_r - b.phi_r,
        eos_validity=a.eos_validity & b.eos_validity, order=phi_t.arity,
        measure_weight=a.measure_weight,
        admissible=_combine_masks(a.admissible, b.admissible),
    )


def _combine_masks(m1, m2):
    if m1 is None or m2 is None:
        return m1 or m2
    return lambda jets, eos: m1(jets, eos) & m2(jets, eos)


def jet_order_needed(pair: DensityFluxPair, for_triviality=True):
    m = max(pair.phi_t.arity, pair.phi_r.arity)
    return max(js.DEFAULT_K, m + 1, 2 * pair.phi_t.arity if for_triviality else 0)


def sample_for(pair: DensityFluxPair, eos, n_dim=3, count=200, seed=0, K=None):
    """Random jets suited to ``pair``: mu when needed, admissibility mask applied."""
    K = K or jet_order_needed(pair)
    adm = None
    if pair.admissible is not None:
        adm = lambda jets: pair.admissible(jets, eos)  # noqa: E731
    return js.sample_jets(n_dim, count, seed, K=K, with_mu=pair.uses_mu, admissible=adm)


def max_relative_residual(pair, jets, eos):
    val, scale = conslaw_residual(pair, jets, eos, return_scale=True)
    return float(np.max(np.abs(val) / scale))


def classify(pair: DensityFluxPair, eos: EosModel, *, n_dim=3, count=200, seed=0, tol=RESIDUAL_TOL):
    """One of ``integral-invariant``, ``non-advected``, ``trivial``, ``not-conserved``."""
    jets = sample_for(pair, eos, n_dim, count, seed)
    if max_relative_residual(pair, jets, eos) > tol:
        return NOT_CONSERVED
    if js.is_trivial_density(pair.phi_t, jets, eos, weight=pair.measure_weight, tol=tol):
        return TRIVIAL
    psi, scale = moving_flux(pair, jets, eos, return_scale=True)
    if np.all(np.abs(psi) <= tol * scale):
        return INTEGRAL_INVARIANT
    return NON_ADVECTED
