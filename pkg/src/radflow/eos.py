"""Equations of state p = p(rho, S) and the thermodynamics derived from them.

Five variants are supported::

    general      p = P(rho, S) from user callbacks P, P_rho, P_S
    barotropic   p = kappa0 * rho**q
    polytropic   p = kappa0 * S**m * rho**(1 + gamma)
    ideal_gas    p = kappa0 * exp(gamma*S/k) * rho**(1 + gamma),  gamma = 2/n
    entropic     p = kappa0 * S**nu                     (sound speed zero)

Every variant exposes arbitrary mixed partials of the pressure and of the
internal energy ``e = int p/rho**2 drho`` through :meth:`EosModel.partial`;
the jet-space machinery differentiates through the EOS with nothing else.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, EosMismatchError
from .quadrature import integrate_from_one


class Variant(str, enum.Enum):
    GENERAL = "general"
    BAROTROPIC = "barotropic"
    POLYTROPIC = "polytropic"
    IDEAL_GAS = "ideal_gas"
    ENTROPIC = "entropic"


def _falling(a, k):
    out = 1.0
    for i in range(k):
        out *= a - i
    return out


def _is_int(x):
    return float(x).is_integer()


def _power(x, a):
    """x**a, tolerant of float exponents that are really integers (keeps x < 0 legal)."""
    if _is_int(a):
        return np.power(x, int(a)) if int(a) >= 0 else 1.0 / np.power(x, -int(a))
    return np.power(x, a)


def _fd4(fun, x, k):
    """k-th derivative of a scalar-argument callable by repeated 4th-order central differences."""
    if k == 0:
        return fun(x)
    h = 1e-3 * (1.0 + np.abs(x))
    return (
        _fd4(fun, x - 2 * h, k - 1)
        - 8.0 * _fd4(fun, x - h, k - 1)
        + 8.0 * _fd4(fun, x + h, k - 1)
        - _fd4(fun, x + 2 * h, k - 1)
    ) / (12.0 * h)


@dataclass(frozen=True)
class EosModel:
    """An equation of state. Build instances with the classmethod constructors."""

    variant: Variant
    params: Mapping[str, float] = field(default_factory=dict)
    callbacks: Mapping[str, Callable] = field(default_factory=dict, compare=False, repr=False)

    # -- constructors -------------------------------------------------------------
    @classmethod
    def general(cls, P, P_rho, P_S):
        """Closed-form callbacks for P(rho, S) and its first partials."""
        cbs = MappingProxyType({"P": P, "P_rho": P_rho, "P_S": P_S})
        return cls(Variant.GENERAL, MappingProxyType({}), cbs)

    @classmethod
    def barotropic(cls, kappa0=1.0, q=2.0):
        if kappa0 <= 0 or q == 0:
            raise DomainError("barotropic EOS needs kappa0 > 0 and q != 0")
        return cls(Variant.BAROTROPIC, MappingProxyType({"kappa0": float(kappa0), "q": float(q)}))

    @classmethod
    def polytropic(cls, kappa0=1.0, m=1.0, gamma=0.4):
        if kappa0 == 0:
            raise DomainError("polytropic EOS needs kappa0 != 0")
        return cls(
            Variant.POLYTROPIC,
            MappingProxyType({"kappa0": float(kappa0), "m": float(m), "gamma": float(gamma)}),
        )

    @classmethod
    def ideal_gas(cls, n, k=1.0, kappa0=1.0):
        if n < 2 or k <= 0:
            raise DomainError("ideal gas EOS needs n >= 2 and k > 0")
        params = {"n": int(n), "k": float(k), "kappa0": float(kappa0), "gamma": 2.0 / n}
        return cls(Variant.IDEAL_GAS, MappingProxyType(params))

    @classmethod
    def entropic(cls, kappa0=1.0, nu=1.0):
        if kappa0 == 0 or nu == 0:
            raise DomainError("entropic EOS needs kappa0 != 0 and nu != 0")
        return cls(Variant.ENTROPIC, MappingProxyType({"kappa0": float(kappa0), "nu": float(nu)}))

    @classmethod
    def from_spec(cls, spec: Mapping, n: int | None = None):
        """Build from a tagged record ``{"variant": name, **params}`` (config files)."""
        spec = dict(spec)
        name = spec.pop("variant", None)
        try:
            variant = Variant(name)
        except ValueError:
            raise DomainError(f"unknown EOS variant {name!r}") from None
        if variant is Variant.GENERAL:
            raise DomainError("the general EOS needs Python callbacks; it cannot come from a config file")
        if variant is Variant.IDEAL_GAS:
            spec.setdefault("n", n)
            if spec["n"] is None:
                raise DomainError("ideal gas EOS needs the dimension n")
        ctor = getattr(cls, variant.value)
        try:
            return ctor(**spec)
        except TypeError as exc:
            raise DomainError(f"bad parameters for {variant.value} EOS: {exc}") from None

    @property
    def name(self):
        return self.variant.value

    def describe(self):
        inner = ",".join(f"{k}={v:g}" for k, v in self.params.items() if k != "gamma" or self.variant is not Variant.IDEAL_GAS)
        return f"{self.name}({inner})"

    # -- domain checks ------------------------------------------------------------
    def _s_exponent(self):
        if self.variant is Variant.POLYTROPIC:
            return self.params["m"]
        if self.variant is Variant.ENTROPIC:
            return self.params["nu"]
        return None

    def check_domain(self, rho, s):
        if np.any(np.asarray(rho) <= 0):
            raise DomainError("density must be positive")
        a = self._s_exponent()
        if a is not None and (not _is_int(a) or a < 0) and np.any(np.asarray(s) <= 0):
            raise DomainError(f"entropy must be positive for S**{a:g}")

    # -- entropy factor kappa(S) of the power-law variants --------------------------
    def _kappa_deriv(self, j, s):
        v, p = self.variant, self.params
        if v is Variant.POLYTROPIC:
            return p["kappa0"] * _falling(p["m"], j) * _power(s, p["m"] - j)
        if v is Variant.IDEAL_GAS:
            c = p["gamma"] / p["k"]
            return p["kappa0"] * c**j * np.exp(c * s)
        if v is Variant.ENTROPIC:
            return p["kappa0"] * _falling(p["nu"], j) * _power(s, p["nu"] - j)
        if v is Variant.BAROTROPIC:
            return p["kappa0"] * (1.0 if j == 0 else 0.0) + 0.0 * s
        raise EosMismatchError(f"{v.value} EOS has no entropy factor kappa(S)")

    def kappa(self, s):
        return self._kappa_deriv(0, s)

    def kappa_prime(self, s):
        return self._kappa_deriv(1, s)

    # -- partial derivatives --------------------------------------------------------
    def partial(self, kind, i, j, rho, s):
        """``d^i/drho^i d^j/dS^j`` of the pressure (``kind='p'``) or internal energy (``'e'``)."""
        i, j = int(i), int(j)
        if kind == "p":
            return self._p_partial(i, j, rho, s)
        if kind == "e":
            return self._e_partial(i, j, rho, s)
        raise ValueError(f"unknown EOS quantity {kind!r}")

    def _p_partial(self, i, j, rho, s):
        v, p = self.variant, self.params
        zero = 0.0 * rho * s
        if v is Variant.GENERAL:
            return self._general_p(i, j, rho, s)
        if v is Variant.BAROTROPIC:
            if j > 0:
                return zero
            return p["kappa0"] * _falling(p["q"], i) * _power(rho, p["q"] - i) + zero
        if v is Variant.ENTROPIC:
            if i > 0:
                return zero
            return self._kappa_deriv(j, s) + zero
        expo = 1.0 + p["gamma"]
        return self._kappa_deriv(j, s) * _falling(expo, i) * _power(rho, expo - i)

    def _e_partial(self, i, j, rho, s):
        v, p = self.variant, self.params
        if v is Variant.GENERAL:
            return self._general_e(i, j, rho, s)
        if v is Variant.BAROTROPIC:
            q = p["q"]
            if j > 0:
                return 0.0 * rho * s
            return p["kappa0"] * self._rho_antiderivative(q - 1.0, i, rho) + 0.0 * s
        if v is Variant.ENTROPIC:
            # e = -kappa(S)/rho
            return -self._kappa_deriv(j, s) * _falling(-1.0, i) * _power(rho, -1.0 - i)
        # polytropic and ideal gas: e = kappa(S) * int rho**(gamma-1) drho
        return self._kappa_deriv(j, s) * self._rho_antiderivative(p["gamma"], i, rho)

    @staticmethod
    def _rho_antiderivative(g, i, rho):
        """i-th rho-derivative of rho**g/g (log rho when g == 0)."""
        if g == 0.0:
            if i == 0:
                return np.log(rho)
            return _falling(-1.0, i - 1) * _power(rho, -float(i))
        return _falling(g, i) * _power(rho, g - i) / g

    # GeneralClosedForm: callbacks for the first partials, 4th-order differences beyond
    def _general_p(self, i, j, rho, s):
        cb = self.callbacks
        if (i, j) == (0, 0):
            return cb["P"](rho, s)
        if j == 0:
            return _fd4(lambda x: cb["P_rho"](x, s), rho, i - 1)
        if i == 0:
            return _fd4(lambda x: cb["P_S"](rho, x), s, j - 1)
        # mixed: differentiate P_rho in rho then in S
        return _fd4(lambda y: _fd4(lambda x: cb["P_rho"](x, y), rho, i - 1), s, j)

    def _general_e(self, i, j, rho, s):
        if i == 0:
            # reference density rho0 = 1
            return integrate_from_one(lambda x: self._general_p(0, j, x, s) / x**2, rho)
        total = 0.0
        for k in range(i):
            total = total + math.comb(i - 1, k) * self._general_p(k, j, rho, s) * _falling(
                -2.0, i - 1 - k
            ) * _power(rho, -2.0 - (i - 1 - k))
        return total

    # -- public thermodynamics ------------------------------------------------------
    def pressure(self, rho, s):
        self.check_domain(rho, s)
        return self._p_partial(0, 0, rho, s)

    def sound_speed_sq(self, rho, s):
        self.check_domain(rho, s)
        if self.variant is Variant.ENTROPIC:
            return 0.0 * rho * s
        return self._p_partial(1, 0, rho, s)

    def internal_energy(self, rho, s):
        self.check_domain(rho, s)
        return self._e_partial(0, 0, rho, s)

    def temperature(self, rho, s):
        self.check_domain(rho, s)
        return self._e_partial(0, 1, rho, s)

    def entropy_weight_potential(self, F0, mu, j, s):
        """j-th S-derivative of K(S) = int F(S) kappa'(S) dS with F = F0 * S**mu (entropic only)."""
        if self.variant is not Variant.ENTROPIC:
            raise EosMismatchError("entropy-weighted energy needs an entropic EOS")
        kappa0, nu = self.params["kappa0"], self.params["nu"]
        return self._power_potential(F0 * kappa0 * nu, mu + nu, j, s)

    def entropy_weight_companion(self, F0, mu, j, s):
        """j-th S-derivative of L(S) = int F'(S) kappa(S) dS with F = F0 * S**mu (entropic only).

        The constant is fixed so that ``L = F kappa - K`` whenever mu + nu != 0.
        """
        if self.variant is not Variant.ENTROPIC:
            raise EosMismatchError("entropy-weighted energy needs an entropic EOS")
        kappa0, nu = self.params["kappa0"], self.params["nu"]
        return self._power_potential(F0 * kappa0 * mu, mu + nu, j, s)

    @staticmethod
    def _power_potential(c, expo, j, s):
        """j-th derivative of c * S**expo / expo (c * log S when expo == 0)."""
        if expo == 0.0:
            if j == 0:
                return c * np.log(s)
            return c * _falling(-1.0, j - 1) * _power(s, -float(j))
        return c * _falling(expo, j) * _power(s, expo - j) / expo
