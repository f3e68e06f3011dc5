"""Time integration drivers producing :class:`DiagnosticsSeries`."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..relfluid import QuietBackground, kinetic_integral, q_prime_integrand, radial_momentum, total_energy
from .diagnostics import (BreakdownThresholds, DiagnosticsSeries, breakdown_detector, dod_check,
                          max_gradient, steepening)
from .fluid import D_, FluidState, RecoveryError, RelativisticFluidSolver, max_signal_speed


class CFLViolation(RuntimeError):
    """The fixed time step no longer satisfies the Courant limit."""


@dataclass(frozen=True)
class RunConfig:
    t_end: float = 1.0
    cfl: float = 0.4
    sample_every: int = 1
    max_courant: float = 0.9
    stop_at_breakdown: bool = True
    thresholds: BreakdownThresholds = field(default_factory=BreakdownThresholds)

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


@dataclass
class RunResult:
    series: DiagnosticsSeries
    final_state: object
    dt: float
    steps: int


def _time_grid(t_end: float, dt_cfl: float) -> tuple[float, int]:
    steps = int(np.ceil(t_end / dt_cfl - 1e-12))
    return t_end / steps, steps


# ---------------------------------------------------------------------------
# fluid


def fluid_sample(solver: RelativisticFluidSolver, state: FluidState) -> dict:
    bg: QuietBackground = solver.bg
    eos = bg.eos
    grid = solver.grid
    pr = state.prim
    data = solver.snapshot(state)
    R_t = 1.0 + bg.etabar * state.t
    return dict(
        t=state.t,
        Q=radial_momentum(data, bg, eos),
        energy=total_energy(data, bg, eos),
        mass=4.0 * np.pi * float(np.sum((state.U[D_] - bg.nbar) * grid.volumes)),
        poisson_res=0.0,
        max_grad_u=max_gradient(pr.u, grid.dr),
        max_grad_p=max_gradient(pr.p, grid.dr),
        dod_dev=dod_check(grid.centers, (pr.n, pr.u, pr.p, pr.s), (bg.nbar, 0.0, bg.pbar, bg.sbar), R_t, grid.dr),
        qprime=q_prime_integrand(data, bg, eos),
        kinetic=kinetic_integral(data, eos),
        steepening=steepening(pr.u),
        s_min=float(pr.s.min()),
        max_speed=max_signal_speed(pr.n, pr.u, pr.p, solver.gamma),
        floored=pr.floored,
    )


def run_fluid(solver: RelativisticFluidSolver, profile: Callable, config: RunConfig,
              on_sample: Optional[Callable] = None) -> RunResult:
    """Integrate from ``profile`` with a fixed step set by the initial CFL number."""
    state = solver.initial_state(profile)
    dt, steps = _time_grid(config.t_end, solver.cfl_dt(state.prim, config.cfl))
    series = DiagnosticsSeries()
    series.append(**fluid_sample(solver, state))
    for k in range(1, steps + 1):
        try:
            speed = max_signal_speed(state.prim.n, state.prim.u, state.prim.p, solver.gamma)
            if speed * dt / solver.grid.dr > config.max_courant:
                raise CFLViolation(f"Courant number {speed * dt / solver.grid.dr:.3f} at t = {state.t:.6g}")
            state = solver.step(state, dt)
            state.t = k * dt
        except RecoveryError:
            series.recovery_failed_at = (k - 1) * dt
            break
        if k % config.sample_every == 0 or k == steps:
            series.append(**fluid_sample(solver, state))
            if on_sample is not None:
                on_sample(state, series)
            if config.stop_at_breakdown and breakdown_detector(series, config.thresholds) is not None:
                break
    _finish(series, config)
    return RunResult(series, state, dt, k if steps else 0)


def _finish(series: DiagnosticsSeries, config: RunConfig) -> None:
    event = breakdown_detector(series, config.thresholds)
    if event is not None:
        series.breakdown_time = event.t
        series.breakdown_reason = event.criterion
        t = series.array("t")
        series.breakdown = [bool(x >= event.t) for x in t]


# ---------------------------------------------------------------------------
# plasma


def plasma_sample(solver, cells, moment4: float) -> dict:
    from ..plasma import energy_script, field_moment, g_function, kinetic_integral as pk, mass_M, momentum_Q

    bg = solver.bg
    grid = solver.grid
    st = solver.snapshot(cells)
    p = st.pressure(bg)
    res = solver.poisson_residual(cells)
    scale = 4.0 * math.pi * bg.e * max(float(np.max(np.abs(st.n - bg.nbar))), 1e-300)
    R_t = 1.0 + bg.etabar * cells.t
    dev = max(
        dod_check(grid.centers, (st.n, st.s, st.u), (bg.nbar, bg.sbar, 0.0), R_t, grid.dr),
        dod_check(grid.faces, (st.E,), (0.0,), R_t, grid.dr),
    )
    return dict(
        t=cells.t,
        Q=momentum_Q(st),
        energy=energy_script(st, bg),
        mass=mass_M(st, bg),
        poisson_res=float(np.max(np.abs(res))) / scale,
        max_grad_u=max_gradient(st.u, grid.dr),
        max_grad_p=max_gradient(p, grid.dr),
        dod_dev=dev,
        G=g_function(st, moment4, bg),
        field_moment=field_moment(st),
        kinetic=pk(st),
        steepening=steepening(st.u),
        s_min=float(st.s.min()),
        n_min=float(st.n.min()),
    )


def run_plasma(solver, profile: Callable, config: RunConfig, on_sample: Optional[Callable] = None) -> RunResult:
    """Integrate the electron fluid; extras carry G, the field moment and y = int Q dt."""
    cells = solver.initial_state(profile)
    grid = solver.grid
    moment4 = float(np.sum((cells.U[0] - solver.bg.nbar) * grid.centers**2 * grid.volumes))
    dt, steps = _time_grid(config.t_end, solver.cfl_dt(cells, config.cfl))
    series = DiagnosticsSeries()
    series.append(**plasma_sample(solver, cells, moment4))
    k = 0
    for k in range(1, steps + 1):
        try:
            if solver.max_speed(cells) * dt / grid.dr > config.max_courant:
                raise CFLViolation(f"Courant limit exceeded at t = {cells.t:.6g}")
            cells = solver.step(cells, dt)
            cells.t = k * dt
            solver.primitives(cells.U)
        except FloatingPointError:
            series.recovery_failed_at = (k - 1) * dt
            break
        if k % config.sample_every == 0 or k == steps:
            series.append(**plasma_sample(solver, cells, moment4))
            if on_sample is not None:
                on_sample(cells, series)
            if config.stop_at_breakdown and breakdown_detector(series, config.thresholds) is not None:
                break
    series.extra["moment4"] = [moment4] * len(series)
    _finish(series, config)
    return RunResult(series, cells, dt, k)
