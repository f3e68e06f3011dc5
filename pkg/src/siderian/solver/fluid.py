"""Spherically symmetric special-relativistic Euler equations, finite-volume form.

Conserved per cell: D = n u0, S = (rho + p) u0 u, tau = (rho + p) u0^2 - p - D,
and the entropy tracer D s.  ``u`` is the radial component of the spatial
4-velocity, u0 = sqrt(1 + u^2) and v = u / u0 the 3-velocity.  For the
polytropic law rho - n = p / (gamma - 1) independently of s, so recovery is the
ideal-gas one and the thermodynamic entropy follows from p = A(s) n^gamma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..eos import PolytropicEos
from ..relfluid import QuietBackground, RadialFluidData
from .grid import RadialGrid, extend, muscl_faces

D_, S_, TAU_, DS_ = range(4)


class RecoveryError(RuntimeError):
    """Conserved state with no admissible primitive (treated as breakdown)."""


@dataclass
class FluidPrimitives:
    n: np.ndarray
    u: np.ndarray
    p: np.ndarray
    s: np.ndarray
    floored: int = 0

    def rho(self, gamma: float) -> np.ndarray:
        return self.n + self.p / (gamma - 1.0)


def conserved_from_primitives(n, u, p, gamma: float):
    """(D, S, tau) from (n, u, p)."""
    n, u, p = (np.asarray(x, dtype=float) for x in (n, u, p))
    W = np.sqrt(1.0 + u * u)
    h = n + gamma / (gamma - 1.0) * p
    D = n * W
    S = h * W * u
    # tau = h W^2 - p - D with W - 1 = u^2 / (W + 1)
    tau = n * W * u * u / (W + 1.0) + gamma / (gamma - 1.0) * p * W * W - p
    return D, S, tau


def primitives_from_conserved(D, S, tau, gamma: float, p_guess=None, n_floor: float = 0.0,
                              p_floor: float = 0.0, rtol: float = 1e-13, max_iter: int = 100):
    """Invert (D, S, tau) -> (n, u, p, rho) by safeguarded Newton on p.

    Solves f(p) = (gamma - 1)(rho - n)(p) - p = 0 on [0, (gamma - 1)(tau + D)],
    where f is strictly decreasing.  Returns ``(n, u, p, rho, n_floored)``
    with ``n_floored`` the number of cells where a floor was applied.
    Raises :class:`RecoveryError` when tau + D <= |S| or D <= 0 below the floor.
    """
    D = np.array(D, dtype=float, ndmin=1)
    S = np.array(S, dtype=float, ndmin=1)
    tau = np.array(tau, dtype=float, ndmin=1)
    g1 = gamma - 1.0
    floored = 0
    low_d = D < max(n_floor, 0.0)
    if np.any(D <= 0.0) and n_floor <= 0.0:
        raise RecoveryError("non-positive conserved density")
    if np.any(low_d):
        floored += int(low_d.sum())
        D = np.where(low_d, n_floor, D)
    Et = tau + D
    if np.any(Et <= np.abs(S)) or not np.all(np.isfinite(Et)):
        raise RecoveryError("tau + D <= |S|: superluminal or negative-energy state")

    def f_and_df(p):
        X = Et + p
        v = S / X
        q = (1.0 - v) * (1.0 + v)
        w = np.sqrt(q)
        v2 = v * v
        g = tau * q - v2 * (D * w / (1.0 + w) + p)
        h = X * q  # enthalpy rho + p
        n = D * w
        return g1 * g - p, g1 * v2 * (1.0 - n / h) - 1.0

    lo = np.zeros_like(D)
    hi = g1 * Et
    # the terms of f are bounded by |tau| + |S|, which sets its round-off level
    p_atol = 4.0 * np.finfo(float).eps * (np.abs(tau) + np.abs(S))
    f0, _ = f_and_df(lo)
    nonpos = f0 <= 0.0  # root at p <= 0: pressure floor
    p = np.clip(hi * 0.5 if p_guess is None else np.array(p_guess, dtype=float, ndmin=1), lo, hi)
    p = np.where(nonpos, 0.0, p)
    active = ~nonpos
    for _ in range(max_iter):
        if not np.any(active):
            break
        f, df = f_and_df(p)
        pos = f > 0
        lo = np.where(active & pos, p, lo)
        hi = np.where(active & ~pos, p, hi)
        step = -f / df
        trial = p + step
        bad = (trial <= lo) | (trial >= hi) | ~np.isfinite(trial)
        trial = np.where(bad, 0.5 * (lo + hi), trial)
        done = np.abs(trial - p) <= rtol * np.abs(trial) + p_atol
        done |= (hi - lo) <= rtol * hi + p_atol
        p = np.where(active, trial, p)
        active &= ~done
    else:
        if np.any(active):
            raise RecoveryError("primitive recovery did not converge")
    low_p = p < p_floor
    if np.any(low_p):
        floored += int(low_p.sum())
        p = np.where(low_p, p_floor, p)
    X = Et + p
    v = S / X
    W = 1.0 / np.sqrt((1.0 - v) * (1.0 + v))
    n = D / W
    u = W * v
    rho = n + p / g1
    return n, u, p, rho, floored


def fluid_flux(n, u, p, gamma: float):
    """Radial fluxes (n u, (rho + p) u^2 + p, (rho + p) u0 u - n u) and (D, S, tau)."""
    D, S, tau = conserved_from_primitives(n, u, p, gamma)
    W = np.sqrt(1.0 + u * u)
    v = u / W
    return np.array([D * v, S * v + p, S - D * v]), np.array([D, S, tau])


def char_speeds(n, u, p, gamma: float):
    """Radial characteristic speeds (v - c)/(1 - v c), (v + c)/(1 + v c)."""
    W = np.sqrt(1.0 + u * u)
    v = u / W
    h = n + gamma / (gamma - 1.0) * p
    c = np.sqrt(gamma * p / h)
    return (v - c) / (1.0 - v * c), (v + c) / (1.0 + v * c)


def max_signal_speed(n, u, p, gamma: float) -> float:
    lm, lp = char_speeds(n, u, p, gamma)
    s = float(np.max(np.maximum(np.abs(lm), np.abs(lp))))
    if not np.isfinite(s):
        raise RecoveryError("non-finite characteristic speed")
    return s


@dataclass
class FluidState:
    t: float
    U: np.ndarray  # (4, N): D, S, tau, D s
    prim: FluidPrimitives


class RelativisticFluidSolver:
    """MUSCL (minmod) + local Lax-Friedrichs + Heun for the radial relativistic fluid."""

    def __init__(self, grid: RadialGrid, bg: QuietBackground):
        bg.eos.require_relativistic()
        self.grid = grid
        self.bg = bg
        self.gamma = bg.eos.gamma
        self.n_floor = 1e-14 * bg.nbar
        self.p_floor = 1e-14 * bg.pbar
        self._bg_prim = np.array([bg.nbar, 0.0, bg.pbar, bg.sbar])

    # -- set-up ---------------------------------------------------------
    def initial_state(self, profile) -> FluidState:
        """Cell averages from a vectorised ``profile(r) -> (n, s, u)``."""
        g = self.gamma
        eos = self.bg.eos

        def cons(r):
            n, s, u = profile(r)
            p = eos.pressure(n, s)
            D, S, tau = conserved_from_primitives(n, u, p, g)
            return np.stack([D, S, tau, D * s])

        U = self.grid.cell_average(cons)
        return FluidState(0.0, U, self.recover(U))

    def recover(self, U, guess: FluidPrimitives | None = None) -> FluidPrimitives:
        n, u, p, _, floored = primitives_from_conserved(
            U[D_], U[S_], U[TAU_], self.gamma, None if guess is None else guess.p,
            self.n_floor, self.p_floor,
        )
        s = U[DS_] / np.maximum(U[D_], self.n_floor)
        return FluidPrimitives(n, u, p, s, floored)

    # -- spatial operator --------------------------------------------------
    def rhs(self, prim: FluidPrimitives) -> np.ndarray:
        g = self.gamma
        grid = self.grid
        w = np.stack([prim.n, prim.u, prim.p, prim.s])
        left, right = muscl_faces(extend(w, self._bg_prim, odd=(1,)))
        FL, UL = fluid_flux(left[0], left[1], left[2], g)
        FR, UR = fluid_flux(right[0], right[1], right[2], g)
        lmL, lpL = char_speeds(left[0], left[1], left[2], g)
        lmR, lpR = char_speeds(right[0], right[1], right[2], g)
        a = np.max(np.abs(np.stack([lmL, lpL, lmR, lpR])), axis=0)
        F = 0.5 * (FL + FR) - 0.5 * a * (UR - UL)
        Fs = F[0] * np.where(F[0] >= 0.0, left[3], right[3])
        F = np.vstack([F, Fs[None, :]]) * grid.areas
        dU = -np.diff(F, axis=1) / grid.volumes
        dU[S_] += prim.p * grid.geometric
        return dU

    def cfl_dt(self, prim: FluidPrimitives, cfl: float) -> float:
        if not 0 < cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        return cfl * self.grid.dr / max_signal_speed(prim.n, prim.u, prim.p, self.gamma)

    def step(self, state: FluidState, dt: float) -> FluidState:
        """One Heun (SSP-RK2) step."""
        U1 = state.U + dt * self.rhs(state.prim)
        p1 = self.recover(U1, state.prim)
        U2 = 0.5 * (state.U + U1 + dt * self.rhs(p1))
        p2 = self.recover(U2, p1)
        p2.floored += p1.floored
        return FluidState(state.t + dt, U2, p2)

    # -- views -------------------------------------------------------------
    def snapshot(self, state: FluidState) -> RadialFluidData:
        pr = state.prim
        return RadialFluidData(self.grid.mesh, pr.n, pr.s, pr.u, p=pr.p, rho=pr.rho(self.gamma), t=state.t)

    def thermo_entropy(self, prim: FluidPrimitives) -> np.ndarray:
        eos: PolytropicEos = self.bg.eos
        return np.asarray(eos.entropy_from_A(prim.p / prim.n**self.gamma))
