"""Moving integrals over transported domains, balance/invariance/monotonicity checks,
scaling weights, convergence orders and CSV output.

Integrals of a snapshot use a cubic spline through the cell-center values
of ``r**w phi_t``, integrated exactly between the two tracers; derivatives
of the fields come from 4th-order finite differences of the primitives.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from . import invariants as inv
from . import jetspace as js
from . import profiles as prof
from . import scaling as sc
from .conslaws import DensityFluxPair
from .errors import InsufficientSamplesError, StencilUnderflowError
from .jetspace import JetPoint, JetFunction
from .quadrature import adaptive_gauss_legendre

MIN_CELLS = 6
FD_K = 3


# -- finite differences ------------------------------------------------------------
def fornberg_weights(offsets, d):
    """Weights of the ``d``-th derivative at 0 from samples at ``offsets`` (Fornberg's recursion)."""
    x = np.asarray(offsets, dtype=float)
    m = len(x)
    c = np.zeros((m, d + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    for i in range(1, m):
        c2 = 1.0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            for k in range(min(i, d), -1, -1):
                prev = c[i - 1, k - 1] if k else 0.0
                c[i, k] = c1 * (k * prev - x[i - 1] * c[i - 1, k]) / c2
            for k in range(min(i, d), -1, -1):
                prev = c[j, k - 1] if k else 0.0
                c[j, k] = (x[i] * c[j, k] - k * prev) / c3
        c1 = c2
    return c[:, d]


@lru_cache(maxsize=None)
def _stencils(N, d):
    m = d + 4
    if N < m:
        raise StencilUnderflowError(f"{N} points cannot carry a {m}-point stencil")
    starts = np.clip(np.arange(N) - m // 2, 0, N - m)
    weights = np.array([fornberg_weights(np.arange(m) - (i - s0), d) for i, s0 in enumerate(starts)])
    return starts, weights


def derivative(values, h, d):
    """``d``-th derivative of uniformly spaced samples, 4th order (one-sided near the ends)."""
    values = np.asarray(values, dtype=float)
    starts, w = _stencils(values.size, d)
    idx = starts[:, None] + np.arange(w.shape[1])
    return np.sum(w * values[idx], axis=1) / h**d


def grid_jets(snapshot, eos, lo=0, hi=None, K=FD_K) -> JetPoint:
    """Jets at the cell centers ``lo:hi`` of a snapshot."""
    prim = snapshot.primitives(eos)
    h = snapshot.dr
    sl = slice(lo, hi)

    def series(name):
        v = prim[name]
        return v[sl], tuple(derivative(v, h, d)[sl] for d in range(1, K + 1))

    U, dU = series("U")
    rho, dRho = series("rho")
    S, dS = series("S")
    mu, dMu = series("mu") if snapshot.has_mu else (None, None)
    return JetPoint(n=snapshot.n, t=snapshot.t, r=snapshot.centers[sl], U=U, rho=rho, S=S,
                    dU=dU, dRho=dRho, dS=dS, mu=mu, dMu=dMu)


def _window(snapshot, a, b, pad=4):
    if b <= a:
        raise ValueError("domain must have left < right")
    if (b - a) < MIN_CELLS * snapshot.dr:
        raise StencilUnderflowError(
            f"domain [{a:.6g}, {b:.6g}] spans fewer than {MIN_CELLS} cells (dr={snapshot.dr:.3g})"
        )
    i0 = max(int(math.floor((a - snapshot.r_min) / snapshot.dr)) - pad, 0)
    i1 = min(int(math.ceil((b - snapshot.r_min) / snapshot.dr)) + pad, snapshot.N)
    return i0, i1


def _domain(snapshot, domain):
    if isinstance(domain, tuple) and len(domain) == 2 and all(isinstance(k, (int, np.integer)) for k in domain):
        return float(snapshot.tracers[domain[0]]), float(snapshot.tracers[domain[1]])
    a, b = domain
    return float(a), float(b)


def integrate(snapshot, pair: DensityFluxPair, domain, eos, *, with_flux=False):
    """``int_a^b r**w phi_t dr`` on a snapshot.

    ``domain`` is a pair of tracer indices ``(i, j)`` or explicit radii
    ``(a, b)`` given as floats. With ``with_flux`` also returns
    ``r**w psi`` at ``a`` and ``b``.
    """
    a, b = _domain(snapshot, domain)
    i0, i1 = _window(snapshot, a, b)
    jets = grid_jets(snapshot, eos, i0, i1)
    w = float(sp.sympify(pair.measure_weight).subs(js.n, snapshot.n))
    rw = jets.r**w
    dens = CubicSpline(jets.r, rw * pair.phi_t(jets, eos))
    value = float(dens.integrate(a, b))
    if not with_flux:
        return value
    psi = CubicSpline(jets.r, rw * (pair.phi_r(jets, eos) - jets.U * pair.phi_t(jets, eos)))
    return value, float(psi(a)), float(psi(b))


# -- time series --------------------------------------------------------------------
@dataclass
class IntegralSeries:
    law: DensityFluxPair
    domain: tuple
    t: list = field(default_factory=list)
    I: list = field(default_factory=list)
    psi_left: list = field(default_factory=list)
    psi_right: list = field(default_factory=list)

    def add(self, t, I, psi_left, psi_right):
        if self.t and t <= self.t[-1]:
            raise ValueError("samples must be strictly increasing in t")
        self.t.append(float(t))
        self.I.append(float(I))
        self.psi_left.append(float(psi_left))
        self.psi_right.append(float(psi_right))

    def __len__(self):
        return len(self.t)

    def arrays(self):
        return tuple(np.asarray(x) for x in (self.t, self.I, self.psi_left, self.psi_right))


def integral_series(snapshots, pair, eos, domain=(0, 1)) -> IntegralSeries:
    out = IntegralSeries(pair, domain)
    for snap in snapshots:
        out.add(snap.t, *integrate(snap, pair, domain, eos, with_flux=True))
    return out


def _require(series, k=3):
    if len(series) < k:
        raise InsufficientSamplesError(f"need at least {k} samples, have {len(series)}")


def balance_report(series: IntegralSeries) -> float:
    """``max |dI/dt + (r^w psi)_right - (r^w psi)_left| / (1 + max |dI/dt|)`` at interior samples."""
    _require(series)
    t, I, pl, pr = series.arrays()
    dI = np.gradient(I, t)[1:-1]
    mismatch = dI + (pr - pl)[1:-1]
    return float(np.max(np.abs(mismatch)) / (1.0 + np.max(np.abs(dI))))


def invariance_report(series: IntegralSeries) -> float:
    """``max_t |I(t) - I(0)| / (1 + |I(0)|)``."""
    _require(series, 2)
    I = np.asarray(series.I)
    return float(np.max(np.abs(I - I[0])) / (1.0 + abs(I[0])))


def boundary_flux_max(series: IntegralSeries) -> float:
    _, _, pl, pr = series.arrays()
    return float(max(np.max(np.abs(pl)), np.max(np.abs(pr))))


# -- A-monotonicity -----------------------------------------------------------------
_A_DENSITY = DensityFluxPair(
    name="A_quantity", phi_t=JetFunction(js.rho * inv.A_expr(), name="rho*A"),
    phi_r=JetFunction(js.rho * js.U * inv.A_expr(), name="rho*U*A"),
)
_MASS = DensityFluxPair(name="mass", phi_t=JetFunction(js.rho), phi_r=JetFunction(js.rho * js.U))


@dataclass(frozen=True)
class MonotonicityResult:
    t: np.ndarray
    A: np.ndarray
    M: np.ndarray
    slope: float
    rel_err: float
    mass_drift: float
    min_increment: float
    nondecreasing: bool


def monotonicity_report(snapshots, eos, domain=(0, 1), tol=1e-6) -> MonotonicityResult:
    """Slope of ``int rho A r^(n-1) dr`` against the enclosed mass (entropic runs)."""
    if len(snapshots) < 3:
        raise InsufficientSamplesError("monotonicity needs at least 3 snapshots")
    t = np.array([s.t for s in snapshots])
    A = np.array([integrate(s, _A_DENSITY, domain, eos) for s in snapshots])
    M = np.array([integrate(s, _MASS, domain, eos) for s in snapshots])
    slope = float(np.polyfit(t, A, 1)[0])
    M0 = M[0]
    inc = np.diff(A) + tol * (1.0 + np.abs(A[1:]))
    return MonotonicityResult(
        t=t, A=A, M=M, slope=slope, rel_err=abs(slope - M0) / abs(M0),
        mass_drift=float(np.max(np.abs(M - M0)) / abs(M0)),
        min_increment=float(np.min(np.diff(A))), nondecreasing=bool(np.all(inc >= 0)),
    )


# -- analytic profiles ---------------------------------------------------------------
@lru_cache(maxsize=512)
def _lam(expr):
    return sp.lambdify((js.r, js.t), expr, modules="numpy")


@lru_cache(maxsize=256)
def _derivative_fns(expr, K):
    fns, e = [], expr
    for _ in range(K + 1):
        fns.append(_lam(e))
        e = sp.diff(e, js.r)
    return tuple(fns)


def profile_jets(n_dim, fields, rv, tv=0.0, K=FD_K) -> JetPoint:
    """Jets of analytic profiles ``fields = {"U": expr, "rho": expr, "S": expr[, "mu": expr]}``."""
    rv = np.asarray(rv, dtype=float)

    def vals(expr):
        out = [np.broadcast_to(np.asarray(g(rv, tv), dtype=float), rv.shape) * 1.0
               for g in _derivative_fns(expr, K)]
        return out[0], tuple(out[1:])

    U, dU = vals(fields["U"])
    rho, dRho = vals(fields["rho"])
    S, dS = vals(fields["S"])
    mu, dMu = vals(fields["mu"]) if "mu" in fields else (None, None)
    return JetPoint(n=n_dim, t=tv, r=rv, U=U, rho=rho, S=S, dU=dU, dRho=dRho, dS=dS, mu=mu, dMu=dMu)


def integrate_profiles(pair: DensityFluxPair, fields, eos, n_dim, a, b, t=0.0, rel=1e-13):
    """``int_a^b r**w phi_t dr`` for analytic profiles (adaptive Gauss-Legendre, relative ``rel``)."""
    w = float(sp.sympify(pair.measure_weight).subs(js.n, n_dim))
    fields = {k: sp.sympify(v) for k, v in fields.items()}

    def f(x):
        x = np.asarray(x, dtype=float).ravel()
        jet = profile_jets(n_dim, fields, x, t)
        return (x**w * pair.phi_t(jet, eos))[:, None]

    rough = float(adaptive_gauss_legendre(f, a, b, tol=1e-6)[0])
    return float(adaptive_gauss_legendre(f, a, b, tol=rel * max(abs(rough), 1e-300))[0])


@dataclass(frozen=True)
class WeightCheck:
    law: str
    kind: str
    expected: float
    measured: float
    I0: float
    I1: float

    @property
    def error(self):
        return abs(self.measured - self.expected)


def _uses_energy(pair):
    return any(int(f.args[0]) == 1 for f in pair.phi_t.expr.atoms(js.EosFn))


def scaling_weight_check(target, law: DensityFluxPair, transform, eos=None, *, n_dim=None,
                         domain=None, t0=None, corrected=False) -> WeightCheck:
    """Measured scaling weight ``log_lambda(I'/I)`` of ``law`` under ``transform``.

    ``target`` is a mapping of analytic profile specs/expressions (pass
    ``n_dim``) or a solver snapshot. The expected weight comes from the
    weight tables; incompatible cells raise IncompatibleScalingError before
    anything is evaluated.
    """
    if isinstance(target, Mapping):
        if n_dim is None:
            raise ValueError("n_dim is required for analytic profiles")
    else:
        n_dim = target.n
    expected = sc.expected_weight(law.name, transform, n_dim, law.params, corrected=corrected)
    eos = eos or sc.representative_eos(law, transform, n_dim)
    law.check_validity(eos)
    sc.check_eos(transform, eos, require_energy=_uses_energy(law))
    a_t, a_r, *_ = transform.powers
    lam = transform.lam
    if isinstance(target, Mapping):
        a, b = domain or sc.DEFAULT_DOMAIN
        t0 = sc.DEFAULT_T if t0 is None else t0
        fields = {k: prof.make_profile(v) for k, v in target.items()}
        I0 = integrate_profiles(law, fields, eos, n_dim, a, b, t0)
        moved = sc.apply(transform, fields)
        I1 = integrate_profiles(law, moved, eos, n_dim, lam**a_r * a, lam**a_r * b, lam**a_t * t0)
    else:
        a, b = _domain(target, domain or (0, 1))
        I0 = integrate(target, law, (a, b), eos)
        moved = sc.apply(transform, target, eos)
        I1 = integrate(moved, law, (lam**a_r * a, lam**a_r * b), eos)
    if I0 == 0 or I1 / I0 <= 0:
        raise ValueError(f"integral of {law.label} vanishes or changes sign; pick other profiles")
    return WeightCheck(law.label, transform.kind, expected, math.log(I1 / I0) / math.log(lam), I0, I1)


# -- convergence ----------------------------------------------------------------------
def observed_order(Ns: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``-log(err)`` against ``log(N)``."""
    slope = np.polyfit(np.log(np.asarray(Ns, float)), np.log(np.asarray(errors, float)), 1)[0]
    return float(-slope)


def monotone_decreasing(errors) -> bool:
    e = np.asarray(errors, float)
    return bool(np.all(np.diff(e) < 0))


# -- CSV ---------------------------------------------------------------------------------
def fmt(x) -> str:
    """Deterministic text form of a number (shortest round-trip repr for floats)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x)
    return "" if x is None else str(x)


def write_csv(path, header, rows, seed=None):
    with open(path, "w", newline="") as fh:
        if seed is not None:
            fh.write(f"# seed={seed}\n")
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])


SERIES_HEADER = ("t", "I", "psi_left", "psi_right")
REPORT_HEADER = ("law", "params", "domain", "classification", "balance_err", "drift",
                 "weight_expected", "weight_measured")


def write_series_csv(path, series: IntegralSeries, seed=None):
    write_csv(path, SERIES_HEADER, zip(series.t, series.I, series.psi_left, series.psi_right), seed)
