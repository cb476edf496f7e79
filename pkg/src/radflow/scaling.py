"""Scaling symmetries of radial Euler flow and the scaling weights of conserved integrals.

A transformation acts on the independent and dependent variables as powers
of ``lambda``; the exponents ``(a_t, a_r, a_U, a_rho, a_S)`` of the four kinds are::

    space-time dilation  (1, 1, 0, 0, 0)                          any EOS
    entropy scaling      (alpha, alpha+nu/2, nu/2, 0, 1)          p = S**nu P(rho)
    density scaling      (alpha, alpha+gamma/2, gamma/2, 1, nu)   p = kappa(S/rho**nu) rho**(1+gamma)
    similarity           (alpha, alpha+beta/2, beta/2, nu-beta, 1) p = kappa0 S**nu

On a profile the pushforward is ``U'(r, t) = lambda**a_U U(lambda**-a_r r, lambda**-a_t t)``
and likewise for rho and S.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import sympy as sp

from . import jetspace as js
from .eos import EosModel
from .errors import IncompatibleScalingError
from .jetspace import r, t

KINDS = ("space-time-dilation", "entropy-scaling", "density-scaling", "similarity")
_EXPONENTS = {
    "space-time-dilation": (),
    "entropy-scaling": ("alpha", "nu"),
    "density-scaling": ("alpha", "gamma", "nu"),
    "similarity": ("alpha", "beta", "nu"),
}


@dataclass(frozen=True)
class ScalingTransform:
    kind: str
    exponents: Mapping[str, float] = field(default_factory=dict)
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scaling kind {self.kind!r}")
        need = set(_EXPONENTS[self.kind])
        have = set(self.exponents)
        if need != have:
            raise ValueError(f"{self.kind} needs exponents {sorted(need)}, got {sorted(have)}")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        object.__setattr__(self, "exponents", {k: float(v) for k, v in self.exponents.items()})

    def with_lambda(self, lam):
        return dataclasses.replace(self, lam=lam)

    @property
    def powers(self):
        """``(a_t, a_r, a_U, a_rho, a_S)``."""
        e = self.exponents
        if self.kind == "space-time-dilation":
            return (1.0, 1.0, 0.0, 0.0, 0.0)
        if self.kind == "entropy-scaling":
            return (e["alpha"], e["alpha"] + e["nu"] / 2, e["nu"] / 2, 0.0, 1.0)
        if self.kind == "density-scaling":
            return (e["alpha"], e["alpha"] + e["gamma"] / 2, e["gamma"] / 2, 1.0, e["nu"])
        return (e["alpha"], e["alpha"] + e["beta"] / 2, e["beta"] / 2, e["nu"] - e["beta"], 1.0)

    @property
    def mu_power(self):
        """Exponent of the nonlocal potential (d mu/dt = T = e_S)."""
        a_t, _, a_U, _, a_S = self.powers
        return 2 * a_U - a_S + a_t


# -- EOS compatibility ---------------------------------------------------------------
def check_eos(transform: ScalingTransform, eos: EosModel, *,
              require_energy=False, rtol=1e-10, samples=24, seed=0):
    """Raise IncompatibleScalingError unless ``p(l^a_rho rho, l^a_S S) = l^(a_rho+2a_U) p``.

    With ``require_energy`` the internal energy must scale as ``l**(2 a_U)``
    too (it fails when e carries an additive constant, e.g. a log).
    """
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.3, 3.0, samples)
    s = rng.uniform(0.3, 3.0, samples)
    _, _, a_U, a_rho, a_S = transform.powers
    for lam in (2.0, 1.0 / 3.0):
        checks = [("p", a_rho + 2 * a_U)]
        if require_energy:
            checks.append(("e", 2 * a_U))
        for kind, power in checks:
            lhs = eos.partial(kind, 0, 0, lam**a_rho * rho, lam**a_S * s)
            rhs = lam**power * eos.partial(kind, 0, 0, rho, s)
            if not np.allclose(lhs, rhs, rtol=rtol, atol=rtol):
                what = "pressure" if kind == "p" else "internal energy"
                raise IncompatibleScalingError(
                    f"{transform.kind} {dict(transform.exponents)} does not scale the {what} of "
                    f"{eos.describe()} homogeneously"
                )


# -- pushforward --------------------------------------------------------------------
def apply(transform: ScalingTransform, target, eos: EosModel | None = None):
    """Transformed profiles (a dict of sympy expressions) or a transformed solver snapshot.

    With ``eos`` given, its compatibility with the transformation is checked first.
    """
    if eos is not None:
        check_eos(transform, eos)
    a_t, a_r, a_U, a_rho, a_S = transform.powers
    lam = transform.lam
    if isinstance(target, Mapping):
        L = sp.Float(lam)
        sub = {r: L ** (-a_r) * r, t: L ** (-a_t) * t}
        powers = {"U": a_U, "rho": a_rho, "S": a_S, "mu": transform.mu_power}
        return {k: L ** powers[k] * sp.sympify(v).xreplace(sub) for k, v in target.items()}
    return _apply_snapshot(transform, target, eos)


def _apply_snapshot(transform, snap, eos):
    """Exact change of variables on a grid: scale the grid and the field values."""
    if eos is None:
        raise ValueError("transforming a snapshot needs the EOS (to rebuild the energy row)")
    from .solver import ENERGY, RadialState  # local: solver does not depend on scaling

    a_t, a_r, a_U, a_rho, a_S = transform.powers
    lam = transform.lam
    prim = snap.primitives(eos)
    out = RadialState(
        n=snap.n, t=lam**a_t * snap.t, r_min=lam**a_r * snap.r_min, r_max=lam**a_r * snap.r_max,
        cons=np.empty_like(snap.cons), tracers=lam**a_r * snap.tracers,
        bc_left=snap.bc_left, bc_right=snap.bc_right,
    )
    rho = lam**a_rho * prim["rho"]
    U = lam**a_U * prim["U"]
    S = lam**a_S * prim["S"]
    q0 = out.weight * rho
    out.cons[0] = q0
    out.cons[1] = q0 * U
    out.cons[ENERGY] = q0 * (0.5 * U**2 + eos.partial("e", 0, 0, rho, S))
    out.cons[3] = q0 * S
    if snap.has_mu:
        out.cons[4] = q0 * lam**transform.mu_power * prim["mu"]
    return out


# -- exact solution families --------------------------------------------------------------
def solution_family(name: str, n_dim: int, eos: EosModel | None = None, **params):
    """Analytic solutions of the radial system as sympy profiles in ``(r, t)``.

    ``uniform``           U = 0, rho = rho0, S = S0 (any EOS)
    ``linear_velocity``   U = r/(t+1), rho = rho0 (t+1)**-n, S = S0 (any EOS)
    ``entropic_similarity``  U = c r/(t+1), c = -2/(n-2), S = S0 + 4 - xi**2,
                          rho = 2 kappa0/(c**2 - c) (t+1)**(-n c), xi = r (t+1)**-c;
                          needs p = kappa0 S (entropic, nu = 1) and n >= 3.
    """
    rho0 = sp.Float(params.get("rho0", 1.0))
    S0 = sp.Float(params.get("S0", 1.0))
    if name == "uniform":
        return {"U": sp.S.Zero, "rho": rho0, "S": S0}
    if name == "linear_velocity":
        return {"U": r / (t + 1), "rho": rho0 * (t + 1) ** (-n_dim), "S": S0}
    if name == "entropic_similarity":
        if n_dim < 3:
            raise ValueError("entropic_similarity needs n >= 3")
        kappa0 = 1.0 if eos is None else eos.params.get("kappa0", 1.0)
        c = sp.Rational(-2, n_dim - 2)
        xi = r * (t + 1) ** (-c)
        R = 2 * sp.Float(kappa0) / (c**2 - c)
        return {"U": c * r / (t + 1), "rho": R * (t + 1) ** (-n_dim * c), "S": S0 + 4 - xi**2}
    raise ValueError(f"unknown solution family {name!r}")


def pde_residuals(fields, eos, n_dim, rv, tv):
    """``d_t field - (field_t from the radial system)`` for U, rho, S at points ``(rv, tv)``."""
    rv = np.asarray(rv, float)
    tv = np.asarray(tv, float)
    jets = _jets(fields, n_dim, rv, tv, K=3)
    out = {}
    for name in ("U", "rho", "S"):
        dt = sp.lambdify((r, t), sp.diff(fields[name], t), modules="numpy")
        exact = np.broadcast_to(np.asarray(dt(rv, tv), float), rv.shape)
        rhs = js._time_derivative_fn(name, 0)(jets, eos)
        out[name] = exact - rhs
    return out


def _jets(fields, n_dim, rv, tv, K=3):
    def vals(expr):
        res = []
        for d in range(K + 1):
            g = sp.lambdify((r, t), sp.diff(expr, r, d), modules="numpy")
            res.append(np.broadcast_to(np.asarray(g(rv, tv), dtype=float), rv.shape) * 1.0)
        return res[0], tuple(res[1:])

    U, dU = vals(fields["U"])
    rho, dRho = vals(fields["rho"])
    S, dS = vals(fields["S"])
    return js.JetPoint(n=n_dim, t=tv, r=rv, U=U, rho=rho, S=S, dU=dU, dRho=dRho, dS=dS)


def symmetry_residual_check(transform: ScalingTransform, family: str, eos: EosModel, n_dim: int,
                            *, points=50, seed=0, check=True, **params) -> float:
    """Max PDE residual of the transformed solution family at random ``(r, t)``.

    ``check=False`` skips the EOS compatibility test (to exhibit a wrong transform).
    """
    if check:
        check_eos(transform, eos)
    fields = apply(transform, solution_family(family, n_dim, eos, **params))
    rng = np.random.default_rng(seed)
    rv = rng.uniform(0.5, 2.0, points)
    tv = rng.uniform(0.0, 1.0, points)
    res = pde_residuals(fields, eos, n_dim, rv, tv)
    return float(max(np.max(np.abs(v)) for v in res.values()))


# -- weight tables --------------------------------------------------------------------------
_n, alpha, beta, gamma, nu, q, mu = sp.symbols("n alpha beta gamma nu q mu")
_h = sp.Rational(1, 2)
STD, ES, DS, SIM = KINDS

#: ``(law, kind) -> (weight, required exponent values)``; ``None`` marks an incompatible cell.
TABLE_WEIGHTS = {
    ("energy", STD): (_n, {}),
    ("energy", ES): (_n * alpha + (1 + _h * _n) * nu, {}),
    ("energy", DS): (_n * alpha + (1 + _h * _n) * gamma + 1, {}),
    ("energy", SIM): (_n * alpha + _h * _n * beta + nu, {}),
    ("dilational_energy", STD): (_n + 1, {}),
    ("dilational_energy", ES): None,
    ("dilational_energy", DS): ((_n + 1) * (alpha + 2 / _n), {"gamma": 2 / _n, "nu": 0}),
    ("dilational_energy", SIM): None,
    ("similarity_energy", STD): (_n + 2, {}),
    ("similarity_energy", ES): None,
    ("similarity_energy", DS): ((_n + 2) * alpha + 2 * (1 + 1 / _n), {"gamma": 2 / _n, "nu": 0}),
    ("similarity_energy", SIM): None,
    ("enthalpy_flux", STD): (sp.S.One, {}),
    ("enthalpy_flux", ES): (alpha, {"nu": 0}),
    ("enthalpy_flux", DS): (alpha + gamma, {}),
    ("enthalpy_flux", SIM): None,
    ("entropy_weighted_energy", STD): (_n, {}),
    ("entropy_weighted_energy", ES): None,
    ("entropy_weighted_energy", DS): (_n * (alpha - _h) + mu, {"nu": 0, "gamma": -1}),
    ("entropy_weighted_energy", SIM): (_n * alpha + _h * _n * beta + mu + nu, {}),
    ("entropy_gradient", STD): ((1 - 2 * q) * _n, {}),
    ("entropy_gradient", ES): ((1 - 2 * q) * _n * (alpha + _h * nu) + 2 * q, {}),
    ("entropy_gradient", DS): ((1 - 2 * q) * _n * (alpha + _h * gamma) + 2 * q * (nu - 1) + 1, {}),
    ("entropy_gradient", SIM): ((1 - 2 * q) * (_n * alpha + (_h * _n - 1) * beta) + 2 * q * (1 - nu) + nu, {}),
    ("energy_like", STD): (_n, {}),
    ("energy_like", ES): None,
    ("energy_like", DS): (_n * (alpha - _h) + 1 - 2 * q, {"nu": 0, "gamma": -1}),
    ("energy_like", SIM): (_n * alpha + (_h * _n + 2 * q - 1) * beta + nu, {}),
    ("a_integral", STD): (_n + 1, {}),
    ("a_integral", ES): None,
    ("a_integral", DS): ((_n + 1) * alpha + 1 - _h * _n, {"nu": 0, "gamma": -1}),
    ("a_integral", SIM): ((_n + 1) * alpha + (_h * _n - 1) * beta + nu, {}),
}

#: cells where the tabulated weight disagrees with the change of variables applied to the
#: density itself; values here are what the substitution gives.
WEIGHT_ERRATA = {
    ("energy_like", DS): _n * (alpha - _h) + 1 - q,
    ("energy_like", SIM): _n * alpha + (_h * _n + q - 1) * beta + nu,
    ("entropy_weighted_energy", DS): _n * (alpha - _h),
}


#: weights not tabulated but fixed by the same change of variables (rho r**(n-1) dr)
DERIVED_WEIGHTS = {
    ("mass", STD): (_n, {}),
    ("mass", ES): (_n * (alpha + _h * nu), {}),
    ("mass", DS): (_n * (alpha + _h * gamma) + 1, {}),
    ("mass", SIM): (_n * (alpha + _h * beta) + nu - beta, {}),
}


def table_cell(law_name: str, kind: str):
    key = (law_name, kind)
    try:
        return TABLE_WEIGHTS[key] if key in TABLE_WEIGHTS else DERIVED_WEIGHTS[key]
    except KeyError:
        raise KeyError(f"no scaling weight tabulated for {law_name!r} under {kind}") from None


def expected_weight(law_name: str, transform: ScalingTransform, n_dim: int, params=None,
                    corrected=False) -> float:
    """Tabulated weight for the law under the transform.

    Raises IncompatibleScalingError for ``---`` cells and when the transform's
    exponents miss a cell's required specialization.
    """
    cell = table_cell(law_name, transform.kind)
    if cell is None:
        raise IncompatibleScalingError(f"{law_name} admits no {transform.kind} (incompatible EOS)")
    formula, required = cell
    if corrected and (law_name, transform.kind) in WEIGHT_ERRATA:
        formula = WEIGHT_ERRATA[(law_name, transform.kind)]
    for key, val in required.items():
        want = float(sp.sympify(val).subs(_n, n_dim))
        if not math.isclose(transform.exponents.get(key, math.nan), want, abs_tol=1e-12):
            raise IncompatibleScalingError(
                f"{law_name} under {transform.kind} needs {key}={want:g}"
            )
    params = dict(params or {})
    subs = {_n: n_dim, **{sp.Symbol(k): v for k, v in transform.exponents.items()}}
    if "q" in params:
        subs[q] = params["q"]
    if "mu" in params:
        subs[mu] = params["mu"]
    value = sp.sympify(formula).subs(subs)
    if value.free_symbols:
        raise ValueError(f"missing parameters {sorted(map(str, value.free_symbols))} for {law_name}")
    return float(value)


def representative_eos(law, transform: ScalingTransform, n_dim: int) -> EosModel:
    """A concrete EOS inside both the law's validity set and the transform's EOS class.

    Density scaling uses ``kappa(x) = x``, so ``p = S rho**(1+gamma-nu)``.
    """
    from .eos import Variant

    valid = law.eos_validity
    e = transform.exponents
    if Variant.ENTROPIC in valid and len(valid) == 1:
        if transform.kind == "similarity":
            return EosModel.entropic(1.0, e["nu"])
        return EosModel.entropic(1.0, 1.0)
    if Variant.IDEAL_GAS in valid and len(valid) == 1:
        return EosModel.ideal_gas(n_dim)
    if Variant.BAROTROPIC in valid and len(valid) == 1:
        if transform.kind == "density-scaling":
            if e["gamma"] == -1.0:
                raise IncompatibleScalingError("gamma = -1 would make the barotropic pressure constant")
            return EosModel.barotropic(1.0, 1.0 + e["gamma"])
        return EosModel.barotropic(1.0, 2.0)
    if transform.kind == "entropy-scaling":
        return EosModel.polytropic(1.0, e["nu"], 0.4)
    if transform.kind == "density-scaling":
        return EosModel.polytropic(1.0, 1.0, e["gamma"] - e["nu"])
    if transform.kind == "similarity":
        return EosModel.entropic(1.0, e["nu"])
    return EosModel.polytropic(1.0, 1.0, 0.4)


#: default analytic profiles for weight checks (U > 0 keeps the A quadrature admissible)
DEFAULT_PROFILES = {
    "U": {"kind": "gaussian", "base": 1.0, "amp": 0.2, "center": 1.5, "width": 0.3},
    "rho": {"kind": "gaussian", "base": 1.0, "amp": 0.3, "center": 1.4, "width": 0.25},
    "S": {"kind": "gaussian", "base": 1.2, "amp": 0.1, "center": 1.6, "width": 0.3},
}
DEFAULT_DOMAIN = (1.0, 2.0)
DEFAULT_T = 0.7
