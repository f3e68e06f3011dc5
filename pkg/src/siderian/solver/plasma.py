"""Radial Euler-Maxwell finite-volume solver.

Cell unknowns are n, n u and the tracer n s; the field E lives on cell faces.
It is advanced with the numerical mass flux, dE_f/dt = -4 pi e F_f, which is
the discrete form of dE/dt = -4 pi e n u and keeps the discrete Gauss law
(A_+ E_+ - A_- E_-) / V = 4 pi e (n - nbar) exact to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..plasma import PlasmaBackground, PlasmaState
from .grid import RadialGrid, extend, muscl_faces

N_, M_, NS_ = range(3)


@dataclass
class PlasmaCells:
    t: float
    U: np.ndarray  # (3, N): n, n u, n s
    E: np.ndarray  # (N + 1,) at faces


def plasma_flux_and_sources(n, u, p, E, bg: PlasmaBackground):
    """Pointwise radial fluxes (n u, n u^2 + p/m - E^2/(8 pi m)) and sources.

    Returns ``(flux, source)`` with ``source = (e nbar / m) E + 2 b / r``
    represented by its two parts ``(e nbar / m) E`` and
    ``b = p/m + E^2/(8 pi m)``, the hoop stress multiplying 2/r.
    """
    n, u, p, E = (np.asarray(x, dtype=float) for x in (n, u, p, E))
    m = bg.m
    flux = np.array([n * u, n * u * u + p / m - E * E / (8.0 * math.pi * m)])
    source = np.array([np.zeros_like(n), bg.e * bg.nbar / m * E])
    hoop = p / m + E * E / (8.0 * math.pi * m)
    return flux, source, hoop


class PlasmaSolver:
    """MUSCL (minmod) + local Lax-Friedrichs + Heun for the electron fluid."""

    def __init__(self, grid: RadialGrid, bg: PlasmaBackground):
        self.grid = grid
        self.bg = bg
        self.gamma = bg.eos.gamma
        self._bg_prim = np.array([bg.nbar, 0.0, bg.pbar, bg.sbar])

    # -- set-up -------------------------------------------------------------
    def initial_state(self, profile) -> PlasmaCells:
        """Cell averages of ``profile(r) -> (n, s, u)`` and the Gauss-consistent face field."""
        def cons(r):
            n, s, u = profile(r)
            return np.stack([n, n * u, n * s])

        U = self.grid.cell_average(cons)
        return PlasmaCells(0.0, U, self.gauss_field(U[N_]))

    def gauss_field(self, n_cells) -> np.ndarray:
        g = self.grid
        charge = np.concatenate([[0.0], np.cumsum((n_cells - self.bg.nbar) * g.volumes)])
        E = np.zeros(g.n_cells + 1)
        E[1:] = 4.0 * math.pi * self.bg.e * charge[1:] / g.areas[1:]
        return E

    def poisson_residual(self, cells: PlasmaCells) -> np.ndarray:
        g = self.grid
        div = np.diff(g.areas * cells.E) / g.volumes
        return div - 4.0 * math.pi * self.bg.e * (cells.U[N_] - self.bg.nbar)

    def primitives(self, U):
        n = U[N_]
        if np.any(n <= 0) or not np.all(np.isfinite(U)):
            raise FloatingPointError("non-positive or non-finite electron density")
        u = U[M_] / n
        s = U[NS_] / n
        p = np.asarray(self.bg.eos.pressure(n, np.maximum(s, 0.0)))
        return n, u, p, s

    # -- operator -----------------------------------------------------------
    def rhs(self, U, E):
        g = self.grid
        bg = self.bg
        n, u, p, s = self.primitives(U)
        w = np.stack([n, u, p, s])
        L, R = muscl_faces(extend(w, self._bg_prim, odd=(1,)))
        FL, _, _ = plasma_flux_and_sources(L[0], L[1], L[2], E, bg)
        FR, _, _ = plasma_flux_and_sources(R[0], R[1], R[2], E, bg)
        a = np.maximum(self.speed(L[0], L[1], L[2]), self.speed(R[0], R[1], R[2]))
        UL = np.array([L[0], L[0] * L[1]])
        UR = np.array([R[0], R[0] * R[1]])
        F = 0.5 * (FL + FR) - 0.5 * a * (UR - UL)
        Fs = F[0] * np.where(F[0] >= 0.0, L[3], R[3])
        mass_flux = F[0]
        F = np.vstack([F, Fs[None, :]]) * g.areas
        dU = -np.diff(F, axis=1) / g.volumes
        Ec = 0.5 * (E[1:] + E[:-1])
        E2c = 0.5 * (E[1:] ** 2 + E[:-1] ** 2)
        dU[M_] += bg.e * bg.nbar / bg.m * Ec + (p / bg.m + E2c / (8.0 * math.pi * bg.m)) * g.geometric
        dE = -4.0 * math.pi * bg.e * mass_flux
        return dU, dE

    def speed(self, n, u, p):
        return np.abs(u) + np.sqrt(self.gamma * p / (self.bg.m * n))

    def max_speed(self, cells: PlasmaCells) -> float:
        n, u, p, _ = self.primitives(cells.U)
        s = float(np.max(self.speed(n, u, p)))
        if not np.isfinite(s):
            raise FloatingPointError("non-finite characteristic speed")
        return s

    def cfl_dt(self, cells: PlasmaCells, cfl: float) -> float:
        if not 0 < cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        return cfl * self.grid.dr / self.max_speed(cells)

    def step(self, cells: PlasmaCells, dt: float) -> PlasmaCells:
        dU, dE = self.rhs(cells.U, cells.E)
        U1, E1 = cells.U + dt * dU, cells.E + dt * dE
        dU, dE = self.rhs(U1, E1)
        U2 = 0.5 * (cells.U + U1 + dt * dU)
        E2 = 0.5 * (cells.E + E1 + dt * dE)
        return PlasmaCells(cells.t + dt, U2, E2)

    # -- views --------------------------------------------------------------
    def snapshot(self, cells: PlasmaCells) -> PlasmaState:
        n, u, _, s = self.primitives(cells.U)
        return PlasmaState(cells.t, self.grid.mesh, n, s, u, self.grid.face_mesh, cells.E.copy())
