"""Scalar invariants, the recursion operator and the invariant hierarchies.

Catalog names::

    S      entropy                         (any EOS)
    J1     R(S)   = r**(1-n) S_r / rho     (any EOS)
    J2     R^2(S), J3 = R^3(S)             (any EOS)
    JP1    kappa'(S) J1 = r**(1-n) p_r/rho (entropic)
    J11    U**2 + (2/n) r kappa'(S) S_r/rho (entropic)
    J21    A(r, U, p_r/rho) - t            (entropic, U > 0)
    J12    R(J11),  J22 = R(J21)           (entropic)

where ``R = (r**(1-n)/rho) D_r``. ``A - t`` is advected only where U > 0
(along a particle path ``dA/dt = sign(U)``); use :func:`a_admissible` to
sample jets for it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from . import jetspace as js
from .eos import EosModel, Variant
from .errors import DomainError, EosMismatchError, OrderOverflowError
from .jetspace import JetFunction, n, r, t, y
from .quadrature import unit_interval_quad

ANY = "any"
ENTROPIC = "entropic"


@dataclass(frozen=True)
class ScalarInvariant:
    name: str
    expr: JetFunction
    order: int
    eos_validity: str = ANY
    provenance: str = "basic"
    parents: tuple = field(default=(), compare=False)

    def __call__(self, jet, eos=None):
        return self.expr(jet, eos)

    def valid_for(self, eos: EosModel):
        return self.eos_validity == ANY or eos.variant is Variant.ENTROPIC


def _require_entropic(eos):
    if eos is None or eos.variant is not Variant.ENTROPIC:
        got = "none" if eos is None else eos.name
        raise EosMismatchError(f"this invariant exists only for an entropic EOS (got {got})")


def recursion_expr(expr):
    """``(r**(1-n)/rho) D_r`` applied to a jet expression."""
    return r ** (1 - n) / js.rho * js.total_r_expr(expr)


def recursion_apply(J: ScalarInvariant, K: int = js.DEFAULT_K) -> ScalarInvariant:
    """Apply the recursion operator; the result has one more derivative order."""
    if J.order > K - 2:
        raise OrderOverflowError(f"{J.name} has order {J.order}; K={K} cannot hold R({J.name})")
    return ScalarInvariant(
        name=f"R({J.name})",
        expr=JetFunction(recursion_expr(J.expr.expr), name=f"R({J.name})"),
        order=J.order + 1,
        eos_validity=J.eos_validity,
        provenance=f"recursion({J.name})",
        parents=(J,),
    )


# -- pointwise composition ---------------------------------------------------------
def _power(k=2):
    return lambda *xs: xs[-1] ** k


F_SPECS: dict[str, Callable] = {
    "identity": lambda x: x,
    "product": lambda *xs: reduce(lambda a, b: a * b, xs),
    "sum_squares": lambda *xs: sum(x**2 for x in xs),
    "exp_damped": lambda *xs: sp.exp(-xs[-1] ** 2 / 2) * (1 + sum(xs[:-1], sp.S.Zero)),
}


def resolve_f(spec, **params) -> Callable:
    """Turn a named f-spec (or a callable on sympy expressions) into a callable."""
    if callable(spec):
        return spec
    if spec == "power":
        return _power(params.get("k", 2))
    try:
        return F_SPECS[spec]
    except KeyError:
        raise ValueError(f"unknown f-spec {spec!r}") from None


def combine(f_spec, invariants: Sequence[ScalarInvariant], name=None, **params) -> ScalarInvariant:
    """Pointwise composition ``f(J_1, ..., J_m)`` of scalar invariants."""
    f = resolve_f(f_spec, **params)
    validity = ENTROPIC if any(J.eos_validity == ENTROPIC for J in invariants) else ANY
    expr = sp.sympify(f(*(J.expr.expr for J in invariants)))
    label = name or f"{getattr(f_spec, '__name__', f_spec)}({','.join(J.name for J in invariants)})"
    return ScalarInvariant(
        name=label, expr=JetFunction(expr, name=label),
        order=max(J.order for J in invariants), eos_validity=validity,
        provenance="user", parents=tuple(invariants),
    )


# -- the singular quadrature A --------------------------------------------------------
def radicand_bounds(n_dim, r_val, U_val, w):
    """Smallest value of ``U**2 + (2/n)(1-y**n) r w`` over y in [0, 1]."""
    U2 = np.square(U_val)
    return np.minimum(U2, U2 + 2.0 / n_dim * r_val * w)


def quadrature_A(n_dim, r_val, U_val, w, tol=1e-10):
    """``A = int_0^1 r dy / sqrt(U**2 + (2/n)(1-y**n) r w)``; scalars or equal-shape arrays.

    Raises DomainError for a non-positive radicand and QuadratureError when
    the adaptive rule cannot reach ``tol``.
    """
    if np.any(radicand_bounds(n_dim, r_val, U_val, w) <= 0):
        raise DomainError("non-positive radicand in A(r, U, p_r/rho)")
    r_val, U_val, w = (np.asarray(a, dtype=float) for a in (r_val, U_val, w))

    def integrand(yy):
        return r_val / np.sqrt(U_val**2 + 2.0 / n_dim * (1.0 - yy**n_dim) * r_val * w)

    return unit_interval_quad(integrand, tol=tol)


def w_expr():
    """``kappa'(S) S_r / rho`` (equals p_r/rho for an entropic EOS)."""
    return js.p_S * js.S_r / js.rho


def A_expr(w=None):
    w = w_expr() if w is None else w
    radicand = js.U**2 + sp.Integer(2) / n * (1 - y**n) * r * w
    return sp.Integral(r / sp.sqrt(radicand), (y, 0, 1))


def a_admissible(jet, eos, margin=0.05):
    """Mask of jets where A - t is defined with margin and advected (U > 0)."""
    w = eos.partial("p", 0, 1, jet.rho, jet.S) * jet.dS[0] / jet.rho
    return (np.asarray(jet.U) > margin) & (radicand_bounds(jet.n, jet.r, jet.U, w) > margin)


# -- catalog -----------------------------------------------------------------------
@lru_cache(maxsize=None)
def _basic(name):
    if name == "S":
        return ScalarInvariant("S", JetFunction(js.S, name="S"), 0)
    if name == "JP1":
        return ScalarInvariant(
            "JP1", JetFunction(r ** (1 - n) * js.p_S * js.S_r / js.rho, name="JP1"), 1,
            ENTROPIC, "entropic-basic",
        )
    if name == "J11":
        expr = js.U**2 + sp.Integer(2) / n * r * w_expr()
        return ScalarInvariant("J11", JetFunction(expr, name="J11"), 1, ENTROPIC, "entropic-basic")
    if name == "J21":
        return ScalarInvariant("J21", JetFunction(A_expr() - t, name="J21"), 1, ENTROPIC, "entropic-basic")
    raise KeyError(name)


def entropic_basic_invariants(eos: EosModel):
    """The two extra first-order invariants ``(J_{1,1}, J_{2,1})`` of an entropic EOS."""
    _require_entropic(eos)
    return _basic("J11"), _basic("J21")


@lru_cache(maxsize=None)
def _hierarchy(family, level):
    if family == "J":
        if level == 0:
            return _basic("S")
        prev = _hierarchy("J", level - 1)
        seed_name = f"J{level}"
    else:
        if level < 1:
            raise ValueError(f"{family} hierarchy starts at l = 1")
        if level == 1:
            return _basic("J11" if family == "J1" else "J21")
        prev = _hierarchy(family, level - 1)
        seed_name = f"{family}{level}"
    nxt = recursion_apply(prev, K=js.MAX_SYMBOL_ORDER)
    provenance = {"J": f"recursion({prev.name})", "J1": "entropic-hierarchy-1",
                  "J2": "entropic-hierarchy-2"}[family]
    return ScalarInvariant(seed_name, JetFunction(nxt.expr.expr, name=seed_name), level,
                           prev.eos_validity, provenance, (prev,))


def hierarchy(eos: EosModel | None, family: str, level: int, K: int = js.DEFAULT_K) -> ScalarInvariant:
    """The ``level``-th member of family ``J`` (any EOS) or ``J1``/``J2`` (entropic)."""
    if family not in ("J", "J1", "J2"):
        raise ValueError(f"unknown hierarchy {family!r}")
    if family != "J":
        _require_entropic(eos)
    if level > K - 1:
        raise OrderOverflowError(f"level {level} needs K >= {level + 1} (K={K})")
    return _hierarchy(family, level)


CATALOG_NAMES = ("S", "J1", "J2", "J3", "J11", "J21", "J12", "J22", "JP1")


def catalog_invariant(name: str, eos: EosModel | None = None) -> ScalarInvariant:
    """Look up a catalog invariant by name (entropic ones check the EOS when given)."""
    table = {
        "S": ("J", 0), "J1": ("J", 1), "J2": ("J", 2), "J3": ("J", 3),
        "J11": ("J1", 1), "J12": ("J1", 2), "J21": ("J2", 1), "J22": ("J2", 2),
    }
    if name == "JP1":
        inv = _basic("JP1")
    elif name in table:
        inv = _hierarchy(*table[name])
    else:
        raise KeyError(f"unknown invariant {name!r}")
    if eos is not None and not inv.valid_for(eos):
        _require_entropic(eos)
    return inv


def needs_a_admissible(inv_or_expr) -> bool:
    """True when the expression contains the A quadrature (so U > 0 jets are required)."""
    expr = inv_or_expr.expr if isinstance(inv_or_expr, ScalarInvariant) else inv_or_expr
    expr = expr.expr if isinstance(expr, JetFunction) else expr
    return bool(expr.atoms(sp.Integral))


# -- residual checks -------------------------------------------------------------------
_RESIDUALS = {
    "scalar": (lambda inv: inv.expr, js.scalar_invariant_residual),
    "oneform": (lambda inv: js.multiply(inv.expr, r ** (n - 1) * js.rho), js.oneform_invariant_residual),
    "vector": (lambda inv: js.as_jet_function(r ** (1 - n) / js.rho) / inv.expr, js.vector_invariant_residual),
}


def sample_for(inv: ScalarInvariant, eos: EosModel, n_dim=3, count=100, seed=0, K=None):
    """Random jets deep enough for ``inv`` (U > 0 and a real radicand when A appears)."""
    K = K or max(js.DEFAULT_K, inv.order + 2)
    adm = (lambda jets: a_admissible(jets, eos)) if needs_a_admissible(inv) else None
    return js.sample_jets(n_dim, count, seed, K=K, admissible=adm)


def max_relative_residual(inv: ScalarInvariant, jets, eos, kind="scalar") -> float:
    """Max ``|residual| / scale`` of the scalar, induced 1-form or induced vector form of ``inv``."""
    build, residual = _RESIDUALS[kind]
    val, scale = residual(build(inv), jets, eos, return_scale=True)
    return float(np.max(np.abs(val) / scale))
