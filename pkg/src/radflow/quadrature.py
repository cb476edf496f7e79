"""Adaptive Gauss-Legendre quadrature.

The integrators here accept *batched* integrands: ``f(x)`` receives the
nodes as an array of shape ``(m, 1)`` and may return anything that
broadcasts to ``(m, B)``. All members of the batch share one subdivision
tree, refined until the worst member has converged.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

DEFAULT_ORDER = 10
MAX_DEPTH = 40
# y = 1 - s**2 is applied on [SPLIT, 1] to tame the square-root endpoint
SPLIT = 0.9


@lru_cache(maxsize=None)
def _nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel(f, a, b, order):
    x, w = _nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    vals = np.asarray(f((mid + half * x)[:, None]), dtype=float)
    if vals.ndim == 0:
        vals = np.full((order, 1), float(vals))
    elif vals.ndim == 1:
        vals = vals[:, None]
    vals = np.broadcast_to(vals, (order, vals.shape[1]))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(f"non-finite integrand on [{a}, {b}]")
    return half * (w @ vals)


def adaptive_gauss_legendre(f, a, b, tol=1e-10, max_depth=MAX_DEPTH, order=DEFAULT_ORDER):
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Each panel is accepted when its Gauss-Legendre value agrees with the sum
    over its two halves to within its share of the tolerance.

    Returns
    -------
    numpy.ndarray
        Integral values, shape ``(B,)`` (``B = 1`` for scalar integrands).

    Raises
    ------
    QuadratureError
        If a panel at ``max_depth`` still misses its tolerance or the
        integrand is not finite.
    """
    if a == b:
        return np.zeros(1)
    total = None
    stack = [(a, b, _panel(f, a, b, order), tol, 0)]
    while stack:
        lo, hi, whole, tol_here, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid, order)
        right = _panel(f, mid, hi, order)
        refined = left + right
        err = np.max(np.abs(refined - whole))
        floor = 64.0 * np.finfo(float).eps * np.max(np.abs(refined))
        if err <= max(tol_here, floor):
            total = refined if total is None else total + refined
            continue
        if depth + 1 >= max_depth:
            raise QuadratureError(
                f"tolerance {tol:g} not reached on [{lo}, {hi}] after {max_depth} refinements"
            )
        stack.append((lo, mid, left, 0.5 * tol_here, depth + 1))
        stack.append((mid, hi, right, 0.5 * tol_here, depth + 1))
    return total


def unit_interval_quad(f, tol=1e-10, max_depth=MAX_DEPTH):
    """Integrate ``f`` over [0, 1] with the endpoint substitution on [0.9, 1].

    ``f`` receives node arrays of shape ``(m, 1)``. The value is squeezed to a
    scalar when the integrand is not batched.
    """
    head = adaptive_gauss_legendre(f, 0.0, SPLIT, 0.5 * tol, max_depth)

    def tail(s):
        return 2.0 * s * f(1.0 - s * s)

    rest = adaptive_gauss_legendre(tail, 0.0, np.sqrt(1.0 - SPLIT), 0.5 * tol, max_depth)
    out = head + rest
    return out[0] if out.shape == (1,) else out


def integrate_from_one(g, x, tol=1e-12, max_depth=MAX_DEPTH):
    """Return ``int_1^x g(s) ds`` for scalar or array ``x`` via the unit map s = 1 + (x-1)u."""
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    span = x_arr - 1.0

    def mapped(u):
        return span * g(1.0 + span * u)

    out = adaptive_gauss_legendre(mapped, 0.0, 1.0, tol, max_depth)
    out = np.broadcast_to(out, x_arr.shape)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))
