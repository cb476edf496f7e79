"""Finite-volume solver for radial Euler flow with transported (tracer) domains.

Conserved variables per cell are cell averages of ``r**(n-1) * (rho, rho U,
rho E, rho S[, rho mu])``. The scheme is MUSCL (minmod on the primitives
``rho, U, p, S, mu``) with a Rusanov flux and SSP-RK2 (Heun) in time.

The geometric momentum source ``(n-1) r**(n-2) p`` is integrated exactly
over each cell for the cell pressure, ``p_i (r_+**(n-1) - r_-**(n-1))/dr``.
This makes any state with uniform pressure and zero velocity an exact
discrete steady state. ``rho E`` is carried only as a diagnostic; the
pressure always comes from ``(rho, S)``.
"""
from __future__ import annotations

import dataclasses
from typing import Mapping

import numpy as np

from . import profiles as prof
from .eos import EosModel, Variant
from .errors import CFLCollapseError, ConfigError, DomainError, PositivityError

RHO, MOM, ENERGY, ENT, MU = range(5)
N_GHOST = 2
DT_FLOOR = 1e-12

_GAUSS4 = np.polynomial.legendre.leggauss(4)


@dataclasses.dataclass
class RadialState:
    """Cell-averaged conserved variables on ``[r_min, r_max]`` plus material tracers."""

    n: int
    t: float
    r_min: float
    r_max: float
    cons: np.ndarray
    tracers: np.ndarray
    bc_left: str = "outflow"
    bc_right: str = "outflow"
    #: time-integrated mass flux out of the grid (right end minus left end)
    boundary_mass: float = 0.0
    steps: int = 0

    @property
    def N(self):
        return self.cons.shape[1]

    @property
    def has_mu(self):
        return self.cons.shape[0] == 5

    @property
    def dr(self):
        return (self.r_max - self.r_min) / self.N

    @property
    def edges(self):
        return np.linspace(self.r_min, self.r_max, self.N + 1)

    @property
    def centers(self):
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def weight(self):
        """Cell average of ``r**(n-1)``."""
        e = self.edges
        return (e[1:] ** self.n - e[:-1] ** self.n) / (self.n * self.dr)

    def primitives(self, eos):
        return _primitives(self.cons, self.weight, eos)

    def total_mass(self):
        """``sum_i q0_i dr``, the discrete integral of ``r**(n-1) rho``."""
        return float(np.sum(self.cons[RHO]) * self.dr)

    def copy(self):
        return dataclasses.replace(self, cons=self.cons.copy(), tracers=self.tracers.copy())


def _primitives(cons, weight, eos):
    rho = cons[RHO] / weight
    out = {"rho": rho, "U": cons[MOM] / cons[RHO], "S": cons[ENT] / cons[RHO]}
    out["mu"] = cons[MU] / cons[RHO] if cons.shape[0] == 5 else np.zeros_like(rho)
    out["p"] = eos.partial("p", 0, 0, rho, out["S"])
    return out


# -- initialization ---------------------------------------------------------------------
def cell_average(fn, edges):
    """4-point Gauss-Legendre cell averages of ``fn(r)`` over the cells given by ``edges``."""
    x, w = _GAUSS4
    lo, hi = edges[:-1, None], edges[1:, None]
    pts = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
    return 0.5 * np.sum(w * fn(pts), axis=1)


def init(config: Mapping, eos: EosModel) -> RadialState:
    """Build a state from a config mapping.

    Keys: ``n``, ``r_min``, ``r_max``, ``N``, ``initial`` (profile specs for
    U, rho, S and optionally mu), ``tracers`` (positions), ``with_mu``
    (default True), ``bc_left`` (``outflow`` or ``reflecting``).
    """
    n = int(config["n"])
    r_min, r_max, N = float(config["r_min"]), float(config["r_max"]), int(config["N"])
    if n < 2:
        raise ConfigError("n: dimension must be an integer >= 2")
    if r_min <= 0:
        raise ConfigError("r_min: must be > 0 (the origin is excluded)")
    if r_max <= r_min:
        raise ConfigError("r_max: must exceed r_min")
    if N < 16:
        raise ConfigError("N: need at least 16 cells")
    bc_left = config.get("bc_left", "outflow")
    if bc_left not in ("outflow", "reflecting"):
        raise ConfigError(f"bc_left: unknown boundary condition {bc_left!r}")
    tracers = np.sort(np.asarray(config.get("tracers", ()), dtype=float))
    if np.any(tracers <= r_min) or np.any(tracers >= r_max):
        raise ConfigError("tracers: positions must lie strictly inside (r_min, r_max)")
    if np.any(np.diff(tracers) <= 0):
        raise ConfigError("tracers: positions must be distinct")

    try:
        profs = prof.profile_set(config["initial"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"initial: {exc}") from None
    f = {k: prof.numeric(v) for k, v in profs.items()}
    with_mu = bool(config.get("with_mu", True))

    edges = np.linspace(r_min, r_max, N + 1)

    def weighted(g):
        return cell_average(lambda x: x ** (n - 1) * g(x), edges)

    def energy(x):
        rho, U, S = f["rho"](x), f["U"](x), f["S"](x)
        return rho * (0.5 * U**2 + eos.partial("e", 0, 0, rho, S))

    xs = np.linspace(r_min, r_max, 8 * N + 1)
    if np.any(f["rho"](xs) <= 0):
        raise ConfigError("initial.rho: density must be positive on the grid")
    eos.check_domain(f["rho"](xs), f["S"](xs))

    rows = [
        weighted(f["rho"]),
        weighted(lambda x: f["rho"](x) * f["U"](x)),
        weighted(energy),
        weighted(lambda x: f["rho"](x) * f["S"](x)),
    ]
    if with_mu:
        rows.append(weighted(lambda x: f["rho"](x) * f["mu"](x)))
    return RadialState(n=n, t=0.0, r_min=r_min, r_max=r_max, cons=np.array(rows),
                       tracers=tracers, bc_left=bc_left)


# -- spatial operator ---------------------------------------------------------------------
def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _with_ghosts(W, bc_left):
    left = W[:, :1].repeat(N_GHOST, axis=1)[:, ::-1]
    if bc_left == "reflecting":
        left = W[:, N_GHOST - 1::-1].copy()
        left[1] *= -1.0
    right = W[:, -1:].repeat(N_GHOST, axis=1)
    return np.concatenate([left, W, right], axis=1)


def _face_states(W):
    """Left/right states at the N+1 faces from minmod-limited linear reconstruction."""
    d = np.diff(W, axis=1)
    slope = _minmod(d[:, :-1], d[:, 1:])  # cells 1 .. N+2 of the ghosted array
    WL = W[:, 1:-2] + 0.5 * slope[:, :-1]
    WR = W[:, 2:-1] - 0.5 * slope[:, 1:]
    return WL, WR


def _conserved_and_flux(Wf, eos, with_mu):
    rho, U, p, S, mu = Wf
    rhoE = rho * (0.5 * U**2 + eos.partial("e", 0, 0, rho, S))
    u = [rho, rho * U, rhoE, rho * S]
    F = [rho * U, rho * U**2 + p, U * (rhoE + p), rho * U * S]
    if with_mu:
        u.append(rho * mu)
        F.append(rho * U * mu)
    if eos.variant is Variant.ENTROPIC:
        a = np.zeros_like(rho)
    else:
        a = np.sqrt(np.maximum(eos.partial("p", 1, 0, rho, S), 0.0))
    return np.array(u), np.array(F), np.abs(U) + a


def _interface_flux(state, cons, eos):
    prim = _primitives(cons, state.weight, eos)
    _check_positive(prim, eos, state.t)
    W = np.array([prim["rho"], prim["U"], prim["p"], prim["S"], prim["mu"]])
    WL, WR = _face_states(_with_ghosts(W, state.bc_left))
    uL, FL, sL = _conserved_and_flux(WL, eos, state.has_mu)
    uR, FR, sR = _conserved_and_flux(WR, eos, state.has_mu)
    smax = np.maximum(sL, sR)
    flux = 0.5 * (FL + FR) - 0.5 * smax * (uR - uL)
    return flux * state.edges ** (state.n - 1), prim


def _rhs(state, cons, eos):
    """``dq/dt`` and the boundary mass flux (right minus left) for the given conserved data."""
    flux, prim = _interface_flux(state, cons, eos)
    e = state.edges
    rhs = -(flux[:, 1:] - flux[:, :-1]) / state.dr
    rhs[MOM] += prim["p"] * (e[1:] ** (state.n - 1) - e[:-1] ** (state.n - 1)) / state.dr
    if state.has_mu:
        rhs[MU] += state.weight * prim["rho"] * eos.partial("e", 0, 1, prim["rho"], prim["S"])
    return rhs, flux[RHO, -1] - flux[RHO, 0]


def _check_positive(prim, eos, t):
    rho = prim["rho"]
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        i = int(np.argmin(np.where(np.isfinite(rho), rho, -np.inf)))
        raise PositivityError(f"density non-positive in cell {i} at t={t:.6g}")
    if eos.variant is not Variant.ENTROPIC:
        p = prim["p"]
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise PositivityError(f"pressure non-positive at t={t:.6g}")


def max_wave_speed(state, eos):
    prim = state.primitives(eos)
    if eos.variant is Variant.ENTROPIC:
        a = 0.0
    else:
        a = np.sqrt(np.maximum(eos.partial("p", 1, 0, prim["rho"], prim["S"]), 0.0))
    return float(np.max(np.abs(prim["U"]) + a))


def stable_dt(state, eos, cfl=0.4):
    return cfl * state.dr / max(max_wave_speed(state, eos), 1e-12)


def _velocity_at(state, cons, x, eos):
    U = cons[MOM] / cons[RHO]
    return np.interp(x, state.centers, U)


def step(state: RadialState, eos: EosModel, cfl=0.4, dt=None) -> RadialState:
    """Advance one SSP-RK2 step (``dt`` defaults to the CFL step). Returns a new state."""
    dt_cfl = stable_dt(state, eos, cfl)
    if dt_cfl < DT_FLOOR:
        raise CFLCollapseError(f"time step {dt_cfl:.3g} below {DT_FLOOR:g} at t={state.t:.6g}")
    dt = dt_cfl if dt is None else min(dt, dt_cfl)

    q0 = state.cons
    k1, m1 = _rhs(state, q0, eos)
    q1 = q0 + dt * k1
    stage = dataclasses.replace(state, cons=q1, t=state.t + dt)
    k2, m2 = _rhs(stage, q1, eos)
    q2 = 0.5 * (q0 + q1 + dt * k2)

    x0 = state.tracers
    v1 = _velocity_at(state, q0, x0, eos)
    xs = x0 + dt * v1
    v2 = _velocity_at(state, q1, xs, eos)
    x_new = x0 + 0.5 * dt * (v1 + v2)

    new = dataclasses.replace(
        state, cons=q2, t=state.t + dt, tracers=x_new,
        boundary_mass=state.boundary_mass + 0.5 * dt * (m1 + m2), steps=state.steps + 1,
    )
    _check_positive(_primitives(q2, state.weight, eos), eos, new.t)
    if np.any(x_new <= state.r_min) or np.any(x_new >= state.r_max) or np.any(np.diff(x_new) <= 0):
        raise DomainError(f"tracers left the grid or crossed at t={new.t:.6g}")
    return new


def run(state: RadialState, eos: EosModel, t_end: float, sample_every=1, cfl=0.4,
        max_steps=10_000_000):
    """Integrate to ``t_end`` and return the list of snapshots (the initial state first).

    ``sample_every`` is a step count (int) or a time interval (float; steps
    are shortened to land on the sample times). The final state is always
    included. On failure the partial series is attached to the exception as
    ``exc.series``.
    """
    snaps = [state.copy()]
    by_time = isinstance(sample_every, float)
    if by_time and sample_every <= 0:
        raise ValueError("sample interval must be positive")
    next_sample = state.t + sample_every if by_time else None
    cur = state
    try:
        while cur.t < t_end - 1e-14 * max(1.0, abs(t_end)):
            if cur.steps - state.steps >= max_steps:
                raise CFLCollapseError(f"step budget {max_steps} exhausted at t={cur.t:.6g}")
            limit = t_end - cur.t
            if by_time:
                limit = min(limit, next_sample - cur.t)
            cur = step(cur, eos, cfl, dt=limit)
            if by_time:
                if cur.t >= next_sample - 1e-12 * max(1.0, abs(next_sample)):
                    snaps.append(cur.copy())
                    next_sample += sample_every
            elif (cur.steps - state.steps) % sample_every == 0:
                snaps.append(cur.copy())
    except (PositivityError, CFLCollapseError, DomainError) as exc:
        exc.series = snaps
        raise
    if snaps[-1].t != cur.t:
        snaps.append(cur.copy())
    return snaps
