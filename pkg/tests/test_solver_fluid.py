import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siderian.eos import PolytropicEos
from siderian.relfluid import DataFamilyParams, QuietBackground
from siderian.solver.fluid import (RecoveryError, RelativisticFluidSolver, char_speeds, conserved_from_primitives,
                                   fluid_flux, max_signal_speed, primitives_from_conserved)
from siderian.solver.grid import RadialGrid, extend, minmod, muscl_faces
from siderian.solver.run import CFLViolation, RunConfig, run_fluid


def test_grid_geometry():
    g = RadialGrid(16, 4.0)
    assert g.volumes.sum() == pytest.approx(64 / 3)
    assert np.allclose(g.geometric * g.volumes, np.diff(g.faces**2))
    assert g.mesh.integrate(np.ones(16)) == pytest.approx(64 / 3)
    assert g.face_mesh.r.size == 17
    assert g.fits(0.1, 10.0) and not g.fits(1.0, 10.0)
    with pytest.raises(ValueError):
        RadialGrid(4, 4.0)
    with pytest.raises(ValueError):
        RadialGrid(16, 1.0)


def test_cell_average_exact_for_polynomials():
    g = RadialGrid(10, 2.0)
    avg = g.cell_average(lambda r: r**3)
    exact = (g.faces[1:] ** 6 - g.faces[:-1] ** 6) / 6 / g.volumes
    assert np.allclose(avg, exact, rtol=1e-13)


def test_minmod_and_reconstruction():
    assert np.array_equal(minmod(np.array([1.0, -1.0, 2.0]), np.array([2.0, 1.0, 0.5])), [1.0, 0.0, 0.5])
    w = np.array([[1.0, 2.0, 3.0, 4.0]])
    ext = extend(w, [9.0], odd=())
    assert np.array_equal(ext[0, :2], [2.0, 1.0]) and np.array_equal(ext[0, -2:], [9.0, 9.0])
    assert np.array_equal(extend(w, [0.0], odd=(0,))[0, :2], [-2.0, -1.0])
    lin = np.arange(8.0)[None, :]
    L, R = muscl_faces(lin)
    assert np.allclose(L[0][1:-1], R[0][1:-1])


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 1e2), st.floats(-50.0, 50.0), st.floats(1e-10, 1e2), st.sampled_from([1.2, 4 / 3, 5 / 3, 1.9]))
def test_primitive_round_trip(n, u, p, g):
    D, S, tau = conserved_from_primitives(n, u, p, g)
    n2, u2, p2, rho2, floored = primitives_from_conserved(D, S, tau, g)
    assert floored == 0
    assert n2[0] == pytest.approx(n, rel=1e-8)
    assert u2[0] == pytest.approx(u, rel=1e-8, abs=1e-12)
    # pressure is resolved to the round-off level of tau + |S|
    assert p2[0] == pytest.approx(p, rel=1e-6, abs=1e-13 * (tau[()] + abs(S[()])))


def test_recovery_failures():
    with pytest.raises(RecoveryError):
        primitives_from_conserved([1.0], [5.0], [0.1], 5 / 3)
    with pytest.raises(RecoveryError):
        primitives_from_conserved([-1.0], [0.0], [1.0], 5 / 3)
    n, u, p, rho, floored = primitives_from_conserved([1e-20], [0.0], [1e-20], 5 / 3, n_floor=1e-14)
    assert floored >= 1


def test_characteristic_speeds_subluminal():
    n = np.array([1.0, 1e-3])
    lm, lp = char_speeds(n, np.array([0.0, 30.0]), np.array([0.2, 1e-3]), 5 / 3)
    assert np.all(np.abs(lm) < 1) and np.all(np.abs(lp) < 1)
    assert lm[0] == pytest.approx(-lp[0])
    assert max_signal_speed(n, np.zeros(2), np.array([0.2, 1e-3]), 5 / 3) < 1
    F, U = fluid_flux(1.0, 0.0, 0.3, 5 / 3)
    assert np.allclose(F, [0.0, 0.3, 0.0])


def _solver(n_cells=128, nbar=1e-2):
    bg = QuietBackground(nbar, 0.0, PolytropicEos())
    return RelativisticFluidSolver(RadialGrid(n_cells, 4.0), bg), bg


def test_background_is_a_fixed_point():
    solver, bg = _solver()
    one = lambda r: (np.full_like(r, bg.nbar), np.full_like(r, bg.sbar), np.zeros_like(r))  # noqa: E731
    state = solver.initial_state(one)
    res = run_fluid(solver, one, RunConfig(t_end=0.5, stop_at_breakdown=False))
    assert np.max(np.abs(res.final_state.U - state.U)) < 1e-15
    s = res.series
    assert np.max(np.abs(s.array("Q"))) < 1e-14 and np.max(np.abs(s.array("energy"))) < 1e-14
    assert s.breakdown_time is None


def test_smooth_run_conserves_energy_and_respects_domain_of_dependence():
    params = DataFamilyParams.default(nbar=1e-2, kappa=0.5, edge=6)
    solver = RelativisticFluidSolver(RadialGrid(256, 4.0), params.background)
    res = run_fluid(solver, params.profiles, RunConfig(t_end=0.5))
    s = res.series
    E = s.array("energy")
    assert np.max(np.abs(E / E[0] - 1)) < 1e-6
    assert np.max(s.array("dod_dev")) < 1e-8
    assert np.max(np.abs(s.array("mass"))) < 1e-6 * params.nbar * 64 * np.pi / 3
    assert np.min(s.array("s_min")) >= params.sbar - 1e-10
    assert np.all(s.array("max_speed") < 1.0)
    assert s.breakdown_time is None
    assert s.t[-1] == pytest.approx(0.5)
    assert res.dt * res.steps == pytest.approx(0.5)


def test_cfl_violation_raised():
    params = DataFamilyParams.default(nbar=1e-2, kappa=0.5, edge=6)
    solver = RelativisticFluidSolver(RadialGrid(128, 4.0), params.background)
    with pytest.raises(CFLViolation):
        run_fluid(solver, params.profiles, RunConfig(t_end=0.2, cfl=1.0, max_courant=0.5))


def test_relativistic_solver_rejects_stiff_eos():
    with pytest.raises(ValueError):
        RelativisticFluidSolver(RadialGrid(16, 4.0), QuietBackground(1.0, 0.0, PolytropicEos(2.5)))


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(t_end=0.0)
    with pytest.raises(ValueError):
        RunConfig(cfl=1.5)
    with pytest.raises(ValueError):
        RunConfig(sample_every=0)
