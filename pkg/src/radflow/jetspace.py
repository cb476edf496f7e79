"""Truncated radial jet space, total derivatives and determining-equation residuals.

A :class:`JetPoint` holds ``(t, r, U, rho, S[, mu])`` and the radial
derivatives of the fields up to a truncation order ``K``. A
:class:`JetFunction` is a function on jet space; built-ins are sympy
expressions in the coordinate symbols returned by :func:`coord`, with the
equation of state entering only through the opaque node :class:`EosFn`.
Expressions are therefore EOS-agnostic: one compiled residual is evaluated
under any :class:`~radflow.eos.EosModel` by passing it at call time.

Time derivatives are eliminated with the radial Euler system::

    U_t   = -U U_r - (p_S S_r + p_rho rho_r)/rho
    rho_t = -(U rho)_r - (n-1) U rho / r
    S_t   = -U S_r
    mu_t  = T - U mu_r          (nonlocal potential, d mu/dt = T)

Every residual can report a *scale*: one plus the largest magnitude among the
chain-rule terms it summed. Valid identities cancel to a few ulps of it.
"""
from __future__ import annotations

import dataclasses
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
import sympy as sp
from sympy.printing.numpy import NumPyPrinter

from .errors import DomainError, OrderOverflowError, ValidityError
from .quadrature import unit_interval_quad

FIELDS = ("U", "rho", "S", "mu")
DEFAULT_K = 4
MAX_SYMBOL_ORDER = 12

t, r, n = sp.symbols("t r n")
#: integration variable of quadrature nodes (always over [0, 1])
y = sp.Symbol("y")
_EOS_ARG = sp.Symbol("eos_")


@lru_cache(maxsize=None)
def coord(field: str, order: int = 0) -> sp.Symbol:
    """The jet coordinate ``d^order field / dr^order`` as a sympy symbol."""
    if field not in FIELDS:
        raise ValueError(f"unknown field {field!r}")
    if not 0 <= order <= MAX_SYMBOL_ORDER:
        raise OrderOverflowError(f"derivative order {order} out of range")
    return sp.Symbol(f"{field}_{order}")


_COORD_INFO = {coord(f, k).name: (f, k) for f in FIELDS for k in range(MAX_SYMBOL_ORDER + 1)}


def coord_info(sym):
    """``(field, order)`` for a field coordinate symbol, ``None`` for t, r, n and others."""
    return _COORD_INFO.get(getattr(sym, "name", sym))


U, rho, S, mu = (coord(f) for f in FIELDS)
U_r, rho_r, S_r, mu_r = (coord(f, 1) for f in FIELDS)


class EosFn(sp.Function):
    """Opaque EOS partial: ``EosFn(kind, i, j, rho, S)`` is ``d_rho^i d_S^j`` of p (kind 0) or e (kind 1)."""

    nargs = 5

    def fdiff(self, argindex=1):
        kind, i, j, rho_, s_ = self.args
        if argindex == 4:
            return EosFn(kind, i + 1, j, rho_, s_)
        if argindex == 5:
            return EosFn(kind, i, j + 1, rho_, s_)
        return sp.S.Zero


class EntropyWeightFn(sp.Function):
    """``EntropyWeightFn(F0, mu_exp, j, S)``: j-th derivative of K(S) = int F0 S**mu kappa'(S) dS."""

    nargs = 4

    def fdiff(self, argindex=1):
        f0, m, j, s_ = self.args
        if argindex == 4:
            return EntropyWeightFn(f0, m, j + 1, s_)
        return sp.S.Zero


class WeightCompanionFn(sp.Function):
    """``WeightCompanionFn(F0, mu_exp, j, S)``: j-th derivative of L(S) = int F'(S) kappa(S) dS."""

    nargs = 4

    def fdiff(self, argindex=1):
        f0, m, j, s_ = self.args
        if argindex == 4:
            return WeightCompanionFn(f0, m, j + 1, s_)
        return sp.S.Zero


def eos_p(i=0, j=0):
    return EosFn(0, i, j, rho, S)


def eos_e(i=0, j=0):
    return EosFn(1, i, j, rho, S)


#: pressure, its partials, internal energy, temperature as jet expressions
p = eos_p()
p_rho = eos_p(1, 0)
p_S = eos_p(0, 1)
e = eos_e()
T = eos_e(0, 1)


class _JetPrinter(NumPyPrinter):
    def _print_EosFn(self, expr):
        kind, i, j, rho_, s_ = expr.args
        return "eos_.partial(%r, %d, %d, %s, %s)" % (
            "pe"[int(kind)], int(i), int(j), self._print(rho_), self._print(s_),
        )

    def _print_EntropyWeightFn(self, expr):
        f0, m, j, s_ = expr.args
        return "eos_.entropy_weight_potential(%s, %s, %d, %s)" % (
            self._print(sp.Float(f0)), self._print(sp.Float(m)), int(j), self._print(s_),
        )

    def _print_WeightCompanionFn(self, expr):
        f0, m, j, s_ = expr.args
        return "eos_.entropy_weight_companion(%s, %s, %d, %s)" % (
            self._print(sp.Float(f0)), self._print(sp.Float(m)), int(j), self._print(s_),
        )


def _lambdify(args, expr):
    return sp.lambdify(args, expr, modules="numpy", printer=_JetPrinter, cse=True)


class _Compiled:
    """Numeric evaluator for a jet expression; quadrature nodes go through the adaptive rule."""

    def __init__(self, expr):
        integrals = sorted(expr.atoms(sp.Integral), key=sp.default_sort_key)
        holders = [sp.Symbol(f"quad_node_{k}_") for k in range(len(integrals))]
        outer = expr.xreplace(dict(zip(integrals, holders)))
        free = sorted(expr.free_symbols, key=lambda s_: s_.name)
        self.names = [s_.name for s_ in free]
        args = [_EOS_ARG, *free]
        self._outer = _lambdify(args + holders, outer)
        self._integrands = []
        for node in integrals:
            (var, lo, hi), = node.limits
            if (lo, hi) != (0, 1):
                raise ValueError("quadrature nodes must integrate over [0, 1]")
            self._integrands.append(_lambdify([var, *args], node.function))

    def __call__(self, values, eos):
        quads = [
            unit_interval_quad(lambda nodes, g=g: g(nodes, eos, *values))
            for g in self._integrands
        ]
        return self._outer(eos, *values, *quads)


@dataclasses.dataclass(frozen=True)
class JetPoint:
    """A point (or a batch of points, when the entries are arrays) of the truncated jet space.

    ``dU[i-1]`` holds the i-th radial derivative of U, likewise for the other
    fields; all derivative tuples have the same length ``K``.
    """

    n: int
    t: object
    r: object
    U: object
    rho: object
    S: object
    dU: tuple
    dRho: tuple
    dS: tuple
    mu: object = None
    dMu: tuple | None = None

    def __post_init__(self):
        for name in ("dU", "dRho", "dS", "dMu"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, tuple(val))
        if int(self.n) != self.n or self.n < 2:
            raise DomainError("dimension n must be an integer >= 2")
        K = len(self.dU)
        if K < 3:
            raise OrderOverflowError("jet truncation order K must be >= 3")
        if len(self.dRho) != K or len(self.dS) != K or (self.dMu is not None and len(self.dMu) != K):
            raise ValueError("all derivative arrays must have the same length K")
        if (self.mu is None) != (self.dMu is None):
            raise ValueError("mu and dMu must be given together")
        if np.any(np.asarray(self.r) <= 0):
            raise DomainError("jet radius must be positive")
        if np.any(np.asarray(self.rho) <= 0):
            raise DomainError("jet density must be positive")

    @property
    def K(self):
        return len(self.dU)

    @property
    def has_mu(self):
        return self.mu is not None

    @cached_property
    def shape(self):
        arrays = [self.t, self.r, self.U, self.rho, self.S, *self.dU, *self.dRho, *self.dS]
        if self.has_mu:
            arrays += [self.mu, *self.dMu]
        return np.broadcast_shapes(*(np.shape(a) for a in arrays))

    def __len__(self):
        return self.shape[0] if self.shape else 1

    def _field(self, field):
        if field == "U":
            return self.U, self.dU
        if field == "rho":
            return self.rho, self.dRho
        if field == "S":
            return self.S, self.dS
        if not self.has_mu:
            raise ValidityError("this expression needs the nonlocal potential mu; the jet has none")
        return self.mu, self.dMu

    def get(self, name):
        """Value of the coordinate with symbol name ``name`` (``'t'``, ``'r'``, ``'n'``, ``'U_2'``...)."""
        if name in ("t", "r", "n"):
            return getattr(self, name)
        info = _COORD_INFO.get(name)
        if info is None:
            raise KeyError(f"{name!r} is not a jet coordinate")
        field, order = info
        if order > self.K:
            raise OrderOverflowError(f"{name} exceeds the jet truncation order K={self.K}")
        value, derivs = self._field(field)
        return value if order == 0 else derivs[order - 1]

    def replace(self, name, value):
        """Copy of the jet with one coordinate changed."""
        if name in ("t", "r"):
            return dataclasses.replace(self, **{name: value})
        field, order = _COORD_INFO[name]
        attr0 = {"U": "U", "rho": "rho", "S": "S", "mu": "mu"}[field]
        attrd = {"U": "dU", "rho": "dRho", "S": "dS", "mu": "dMu"}[field]
        if order == 0:
            return dataclasses.replace(self, **{attr0: value})
        derivs = list(getattr(self, attrd))
        derivs[order - 1] = value
        return dataclasses.replace(self, **{attrd: tuple(derivs)})

    def __getitem__(self, idx):
        """Select one jet (or a sub-batch) out of a batch."""
        def pick(a):
            return a[idx] if np.ndim(a) else a

        return JetPoint(
            n=self.n, t=pick(self.t), r=pick(self.r), U=pick(self.U), rho=pick(self.rho),
            S=pick(self.S), dU=tuple(map(pick, self.dU)), dRho=tuple(map(pick, self.dRho)),
            dS=tuple(map(pick, self.dS)), mu=None if self.mu is None else pick(self.mu),
            dMu=None if self.dMu is None else tuple(map(pick, self.dMu)),
        )


class JetFunction:
    """A function on jet space with exact (sympy) partial derivatives."""

    def __init__(self, expr, name=None):
        self.expr = sp.sympify(expr)
        self.name = name or str(self.expr)
        self._partials = {}

    def __repr__(self):
        return f"JetFunction({self.name})"

    @cached_property
    def coords(self):
        """Field coordinates (as symbols) the function depends on."""
        return tuple(sorted(
            (s_ for s_ in self.expr.free_symbols if s_.name in _COORD_INFO), key=lambda s_: s_.name
        ))

    @cached_property
    def arity(self):
        return max((_COORD_INFO[c.name][1] for c in self.coords), default=0)

    @cached_property
    def uses_mu(self):
        return any(_COORD_INFO[c.name][0] == "mu" for c in self.coords)

    @cached_property
    def _compiled(self):
        return _Compiled(self.expr)

    def __call__(self, jet: JetPoint, eos=None):
        if self.arity > jet.K:
            raise OrderOverflowError(f"{self.name} has order {self.arity} > K={jet.K}")
        values = [jet.get(nm) for nm in self._compiled.names]
        out = self._compiled(values, eos)
        return np.broadcast_to(np.asarray(out, dtype=float), jet.shape) * 1.0

    def partial(self, sym) -> "JetFunction":
        if sym not in self._partials:
            d = sp.diff(self.expr, sym)
            self._partials[sym] = JetFunction(d, name=f"d({self.name})/d{sym}")
        return self._partials[sym]

    def depends_on(self, sym):
        return sym in self.expr.free_symbols

    # arithmetic produces new expression-backed functions
    def _wrap(self, other):
        return other.expr if isinstance(other, JetFunction) else sp.sympify(other)

    def __add__(self, other):
        return JetFunction(self.expr + self._wrap(other))

    __radd__ = __add__

    def __sub__(self, other):
        return JetFunction(self.expr - self._wrap(other))

    def __rsub__(self, other):
        return JetFunction(self._wrap(other) - self.expr)

    def __mul__(self, other):
        return JetFunction(self.expr * self._wrap(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return JetFunction(self.expr / self._wrap(other))

    def __rtruediv__(self, other):
        return JetFunction(self._wrap(other) / self.expr)

    def __neg__(self):
        return JetFunction(-self.expr)


def _fd_step(x):
    return 1e-6 * (1.0 + np.abs(x))


def fd_partial(func, jet: JetPoint, name: str, eos=None):
    """Central-difference partial derivative, Richardson-extrapolated once."""
    x = np.asarray(jet.get(name), dtype=float)
    h = _fd_step(x)

    def central(step):
        hi = func(jet.replace(name, x + step), eos)
        lo = func(jet.replace(name, x - step), eos)
        return (hi - lo) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


class CallableJetFunction(JetFunction):
    """A user-supplied jet function with finite-difference partials.

    ``func(jet, eos)`` evaluates it; ``depends`` lists the coordinate symbols it
    reads (t and r included when relevant).
    """

    def __init__(self, func: Callable, depends: Iterable, name=None):
        self.func = func
        self.depends = tuple(depends)
        self.name = name or getattr(func, "__name__", "user")
        self._partials = {}
        self.expr = None

    @cached_property
    def coords(self):
        return tuple(s_ for s_ in self.depends if s_.name in _COORD_INFO)

    @cached_property
    def arity(self):
        return max((_COORD_INFO[c.name][1] for c in self.coords), default=0)

    @cached_property
    def uses_mu(self):
        return any(_COORD_INFO[c.name][0] == "mu" for c in self.coords)

    def __call__(self, jet, eos=None):
        if self.arity > jet.K:
            raise OrderOverflowError(f"{self.name} has order {self.arity} > K={jet.K}")
        return np.broadcast_to(np.asarray(self.func(jet, eos), dtype=float), jet.shape) * 1.0

    def partial(self, sym):
        if sym not in self._partials:
            if sym not in self.depends:
                fn = CallableJetFunction(lambda jet, eos: 0.0, (), name="0")
            else:
                fn = CallableJetFunction(
                    lambda jet, eos, s_=sym: fd_partial(self.func, jet, s_.name, eos),
                    self.depends, name=f"d({self.name})/d{sym}",
                )
            self._partials[sym] = fn
        return self._partials[sym]

    def depends_on(self, sym):
        return sym in self.depends


def as_jet_function(f) -> JetFunction:
    if isinstance(f, JetFunction):
        return f
    return JetFunction(f)


def multiply(f, factor) -> JetFunction:
    """``factor * f`` for a sympy factor in (t, r, n, field coordinates); works for callables too."""
    f = as_jet_function(f)
    factor = sp.sympify(factor)
    if not isinstance(f, CallableJetFunction):
        return JetFunction(factor * f.expr, name=f"({factor})*{f.name}")
    fac = JetFunction(factor)

    def product(jet, eos):
        return fac(jet, eos) * f(jet, eos)

    deps = set(f.depends) | set(factor.free_symbols) - {n}
    return CallableJetFunction(product, deps, name=f"({factor})*{f.name}")


# ----------------------------------------------------------------------------------
# symbolic total derivatives
# ----------------------------------------------------------------------------------
def _next(sym):
    field, order = _COORD_INFO[sym.name]
    return coord(field, order + 1)


def total_r_expr(expr):
    """D_r of a jet expression (exact chain rule)."""
    expr = sp.sympify(expr)
    out = sp.diff(expr, r)
    for c in expr.free_symbols:
        if c.name in _COORD_INFO:
            out += _next(c) * sp.diff(expr, c)
    return out


@lru_cache(maxsize=None)
def time_derivative_expr(field: str, order: int = 0):
    """``d^order/dr^order`` of the substituted time derivative of ``field``."""
    if order > 0:
        return total_r_expr(time_derivative_expr(field, order - 1))
    if field == "U":
        return -U * U_r - (p_S * S_r + p_rho * rho_r) / rho
    if field == "rho":
        return -(U_r * rho + U * rho_r) - (n - 1) * U * rho / r
    if field == "S":
        return -U * S_r
    if field == "mu":
        return T - U * mu_r
    raise ValueError(field)


def dt_expr(expr):
    """Substituted total time derivative ``(D_t f)|_E`` of a jet expression."""
    expr = sp.sympify(expr)
    out = sp.diff(expr, t)
    for c in expr.free_symbols:
        info = _COORD_INFO.get(c.name)
        if info is not None:
            out += time_derivative_expr(*info) * sp.diff(expr, c)
    return out


def D_r(f) -> JetFunction:
    """Total radial derivative as a new jet function."""
    f = as_jet_function(f)
    if isinstance(f, CallableJetFunction):
        deps = set(f.depends) | {_next(c) for c in f.coords} | {r}
        return CallableJetFunction(lambda jet, eos: total_r(f, jet, eos), deps, name=f"D_r({f.name})")
    return JetFunction(total_r_expr(f.expr), name=f"D_r({f.name})")


def D_t(f) -> JetFunction:
    """Substituted total time derivative as a new jet function."""
    f = as_jet_function(f)
    if isinstance(f, CallableJetFunction):
        deps = set(f.depends) | {t, r} | {coord(fl, k) for fl in ("U", "rho", "S") for k in range(f.arity + 2)}
        if f.uses_mu:
            deps |= {coord("mu", k) for k in range(f.arity + 2)}
        return CallableJetFunction(lambda jet, eos: dt_substituted(f, jet, eos), deps, name=f"D_t({f.name})")
    return JetFunction(dt_expr(f.expr), name=f"D_t({f.name})")


@lru_cache(maxsize=None)
def _time_derivative_fn(field, order):
    return JetFunction(time_derivative_expr(field, order), name=f"D_r^{order}({field}_t)")


# ----------------------------------------------------------------------------------
# numeric operators
# ----------------------------------------------------------------------------------
def _finish(terms, jet, return_scale):
    terms = [np.broadcast_to(np.asarray(x, dtype=float), jet.shape) for x in terms]
    value = np.sum(terms, axis=0) if terms else np.zeros(jet.shape)
    if not return_scale:
        return _squeeze(value)
    scale = 1.0 + (np.max(np.abs(terms), axis=0) if terms else np.zeros(jet.shape))
    return _squeeze(value), _squeeze(scale)


def _squeeze(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def _check_room(f, jet, extra=1):
    if f.arity + extra > jet.K:
        raise OrderOverflowError(
            f"{f.name} has order {f.arity}; K={jet.K} cannot hold {extra} more derivative(s)"
        )


def _total_r_terms(f, jet, eos):
    _check_room(f, jet)
    terms = []
    if f.depends_on(r):
        terms.append(f.partial(r)(jet, eos))
    for c in f.coords:
        terms.append(jet.get(_next(c).name) * f.partial(c)(jet, eos))
    return terms


def _dt_terms(f, jet, eos):
    _check_room(f, jet)
    terms = []
    if f.depends_on(t):
        terms.append(f.partial(t)(jet, eos))
    for c in f.coords:
        field, order = _COORD_INFO[c.name]
        terms.append(_time_derivative_fn(field, order)(jet, eos) * f.partial(c)(jet, eos))
    return terms


def total_r(f, jet: JetPoint, eos=None, *, return_scale=False):
    """``D_r f`` at the jet: ``f_r + sum_i field^(i+1) df/dfield^(i)``."""
    f = as_jet_function(f)
    return _finish(_total_r_terms(f, jet, eos), jet, return_scale)


def dt_substituted(f, jet: JetPoint, eos, *, return_scale=False):
    """``(D_t f)|_E`` at the jet, time derivatives replaced via the radial Euler system."""
    f = as_jet_function(f)
    return _finish(_dt_terms(f, jet, eos), jet, return_scale)


def _check_validity(pair, eos):
    check = getattr(pair, "check_validity", None)
    if check is not None:
        check(eos)


def conslaw_residual(pair, jet, eos, *, return_scale=False):
    """``D_t(r^w phi_t) + D_r(r^w phi_r)`` with ``w = pair.measure_weight``; zero for conservation laws."""
    _check_validity(pair, eos)
    w = getattr(pair, "measure_weight", n - 1)
    dens = multiply(pair.phi_t, r**w)
    flux = multiply(pair.phi_r, r**w)
    return _finish(_dt_terms(dens, jet, eos) + _total_r_terms(flux, jet, eos), jet, return_scale)


def scalar_invariant_residual(J, jet, eos, *, return_scale=False):
    """``D_t J + U D_r J`` (material derivative); zero for scalar invariants."""
    J = as_jet_function(J)
    terms = _dt_terms(J, jet, eos) + [jet.U * x for x in _total_r_terms(J, jet, eos)]
    return _finish(terms, jet, return_scale)


def oneform_invariant_residual(J, jet, eos, *, return_scale=False):
    """``D_t J + D_r(U J)``; zero for radial 1-form invariants ``J dr``."""
    J = as_jet_function(J)
    return _finish(_dt_terms(J, jet, eos) + _total_r_terms(multiply(J, U), jet, eos), jet, return_scale)


def vector_invariant_residual(J, jet, eos, *, return_scale=False):
    """``D_t J + U D_r J - J D_r U``; zero for radial vector invariants ``J r_hat``."""
    J = as_jet_function(J)
    terms = _dt_terms(J, jet, eos) + [jet.U * x for x in _total_r_terms(J, jet, eos)]
    terms.append(-J(jet, eos) * jet.dU[0])
    return _finish(terms, jet, return_scale)


def euler_operator_expr(field, expr):
    """``E_v f = sum_i (-D_r)^i df/d(d_r^i v)`` as a list of its i-pieces (expressions)."""
    expr = sp.sympify(expr)
    orders = [_COORD_INFO[c.name][1] for c in expr.free_symbols
              if c.name in _COORD_INFO and _COORD_INFO[c.name][0] == field]
    pieces = []
    for i in range(max(orders, default=-1) + 1):
        piece = sp.diff(expr, coord(field, i))
        for _ in range(i):
            piece = -total_r_expr(piece)
        pieces.append(piece)
    return pieces


def _euler_pieces(field, f):
    f = as_jet_function(f)
    cache = f.__dict__.setdefault("_euler_cache", {})
    if field not in cache:
        if isinstance(f, CallableJetFunction):
            orders = [o for (fl, o) in (_COORD_INFO[c.name] for c in f.coords) if fl == field]
            pieces = []
            for i in range(max(orders, default=-1) + 1):
                piece = f.partial(coord(field, i))
                for _ in range(i):
                    piece = multiply(D_r(piece), -1)
                pieces.append(piece)
            cache[field] = pieces
        else:
            cache[field] = [JetFunction(pc, name=f"E_{field}[{k}]")
                            for k, pc in enumerate(euler_operator_expr(field, f.expr))]
    return cache[field]


def euler_operator(field, f, jet: JetPoint, eos=None, *, return_scale=False):
    """Radial Euler operator (variational derivative) of ``f`` with respect to ``field``."""
    pieces = _euler_pieces(field, f)
    for k, pc in enumerate(pieces):
        if pc.arity > jet.K:
            raise OrderOverflowError(f"E_{field} needs order {pc.arity} > K={jet.K}")
    return _finish([pc(jet, eos) for pc in pieces], jet, return_scale)


TRIVIALITY_TOL = 1e-9


def is_trivial_density(phi_t, jets: JetPoint, eos=None, *, weight=None, tol=TRIVIALITY_TOL):
    """True iff ``r^w phi_t`` is a total r-derivative (all Euler operators vanish on the sample).

    ``weight`` defaults to ``n - 1``. Pass ``eos`` when the density involves
    thermodynamic quantities.
    """
    phi_t = as_jet_function(phi_t)
    w = n - 1 if weight is None else weight
    dens = multiply(phi_t, r**w)
    fields = ["U", "rho", "S"] + (["mu"] if jets.has_mu or phi_t.uses_mu else [])
    for field in fields:
        val, scale = euler_operator(field, dens, jets, eos, return_scale=True)
        if np.any(np.abs(val) > tol * scale):
            return False
    return True


def variational_conditions(phi_t, jet: JetPoint, eos, *, weight=None, return_scale=False):
    """``(E_U, E_rho, E_S)`` of ``D_t(r^w phi_t)|_E``; all vanish iff phi_t is a conserved density."""
    phi_t = as_jet_function(phi_t)
    w = n - 1 if weight is None else weight
    G = D_t(multiply(phi_t, r**w))
    out = tuple(euler_operator(f, G, jet, eos, return_scale=return_scale) for f in ("U", "rho", "S"))
    return out


# ----------------------------------------------------------------------------------
# random jets
# ----------------------------------------------------------------------------------
SAMPLE_BOX = {
    "r": (0.5, 5.0), "t": (0.0, 2.0), "U": (-3.0, 3.0), "rho": (0.2, 5.0),
    "S": (0.2, 5.0), "mu": (-2.0, 2.0), "deriv": (-2.0, 2.0),
}


def sample_jets(n_dim, count, seed=0, *, K=DEFAULT_K, with_mu=False, u_range=None,
                min_abs_u=0.0, admissible: Callable | None = None, max_rounds=200):
    """Draw a batch of ``count`` uniformly random jets from the standard sampling box.

    ``admissible(batch) -> bool mask`` rejects draws (e.g. non-positive radicands);
    rejected entries are redrawn until the batch is full.
    """
    rng = np.random.default_rng(seed)
    ulo, uhi = u_range or SAMPLE_BOX["U"]
    chunks = []
    have = 0
    for _ in range(max_rounds):
        m = max(count, 16)
        draw = lambda key, size=m: rng.uniform(*SAMPLE_BOX[key], size=size)
        Uv = rng.uniform(ulo, uhi, size=m)
        jet = JetPoint(
            n=n_dim, t=draw("t"), r=draw("r"), U=Uv, rho=draw("rho"), S=draw("S"),
            dU=tuple(draw("deriv") for _ in range(K)),
            dRho=tuple(draw("deriv") for _ in range(K)),
            dS=tuple(draw("deriv") for _ in range(K)),
            mu=draw("mu") if with_mu else None,
            dMu=tuple(draw("deriv") for _ in range(K)) if with_mu else None,
        )
        keep = np.abs(Uv) >= min_abs_u
        if admissible is not None:
            keep &= np.asarray(admissible(jet), dtype=bool)
        idx = np.nonzero(keep)[0]
        if idx.size:
            chunks.append(jet[idx])
            have += idx.size
        if have >= count:
            break
    else:
        raise DomainError("could not draw enough admissible jets")
    return concat_jets(chunks)[np.arange(count)]


def concat_jets(jets: Sequence[JetPoint]) -> JetPoint:
    first = jets[0]

    def cat(get):
        return np.concatenate([np.broadcast_to(get(j), j.shape) for j in jets])

    K = first.K
    return JetPoint(
        n=first.n, t=cat(lambda j: j.t), r=cat(lambda j: j.r), U=cat(lambda j: j.U),
        rho=cat(lambda j: j.rho), S=cat(lambda j: j.S),
        dU=tuple(cat(lambda j, k=k: j.dU[k]) for k in range(K)),
        dRho=tuple(cat(lambda j, k=k: j.dRho[k]) for k in range(K)),
        dS=tuple(cat(lambda j, k=k: j.dS[k]) for k in range(K)),
        mu=cat(lambda j: j.mu) if first.has_mu else None,
        dMu=tuple(cat(lambda j, k=k: j.dMu[k]) for k in range(K)) if first.has_mu else None,
    )


def make_jet(n_dim, r_val, *, t_val=0.0, U_val=0.0, rho_val=1.0, S_val=1.0, dU=(), dRho=(), dS=(),
             mu_val=None, dMu=None, K=DEFAULT_K):
    """Convenience constructor: unspecified derivatives are zero."""
    def pad(seq):
        seq = list(seq) + [0.0] * (K - len(seq))
        return tuple(float(x) for x in seq[:K])

    return JetPoint(
        n=n_dim, t=t_val, r=r_val, U=U_val, rho=rho_val, S=S_val, dU=pad(dU), dRho=pad(dRho),
        dS=pad(dS), mu=mu_val, dMu=None if mu_val is None else pad(dMu or ()),
    )
