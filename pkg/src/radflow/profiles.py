"""Analytic initial/solution profiles as sympy expressions in ``(r, t)``.

Built-in kinds (``spec = {"kind": ..., **params}``)::

    constant     value
    gaussian     base + amp * exp(-((r - center)/width)**2)
    power_law    base + coeff * r**exponent
    linear       a + b * r
"""
from __future__ import annotations

from typing import Mapping

import numpy as np
import sympy as sp

from .jetspace import r, t

PROFILE_KINDS = {
    "constant": ("value",),
    "gaussian": ("base", "amp", "center", "width"),
    "power_law": ("coeff", "exponent", "base"),
    "linear": ("a", "b"),
}
_DEFAULTS = {"base": 0.0, "amp": 1.0, "center": 1.0, "width": 0.1, "coeff": 1.0, "exponent": 1.0,
             "a": 0.0, "b": 1.0}


def make_profile(spec) -> sp.Expr:
    """Build a profile expression from a spec mapping, a number, or a sympy expression."""
    if isinstance(spec, sp.Basic):
        return spec
    if isinstance(spec, (int, float)):
        return sp.Float(spec)
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in PROFILE_KINDS:
        raise ValueError(f"unknown profile kind {kind!r}")
    allowed = PROFILE_KINDS[kind]
    extra = set(spec) - set(allowed)
    if extra:
        raise ValueError(f"profile {kind!r} got unknown parameter(s) {sorted(extra)}")
    if kind == "constant":
        return sp.Float(spec.get("value", 1.0))
    p = {k: sp.Float(spec.get(k, _DEFAULTS[k])) for k in allowed}
    if kind == "gaussian":
        if p["width"] <= 0:
            raise ValueError("gaussian width must be positive")
        return p["base"] + p["amp"] * sp.exp(-(((r - p["center"]) / p["width"]) ** 2))
    if kind == "power_law":
        return p["base"] + p["coeff"] * r ** p["exponent"]
    return p["a"] + p["b"] * r


def numeric(expr):
    """Vectorized ``f(r, t=0)`` for a profile expression."""
    f = sp.lambdify((r, t), expr, modules="numpy")

    def call(rv, tv=0.0):
        rv = np.asarray(rv, dtype=float)
        return np.broadcast_to(np.asarray(f(rv, tv), dtype=float), rv.shape) * 1.0

    return call


def profile_set(specs: Mapping) -> dict:
    """``{"U": expr, "rho": expr, "S": expr}`` from a mapping of specs (missing mu is 0)."""
    out = {k: make_profile(specs[k]) for k in ("U", "rho", "S")}
    out["mu"] = make_profile(specs.get("mu", 0.0))
    return out
