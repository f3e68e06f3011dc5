import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siderian import plasma as pl
from siderian.eos import PolytropicEos
from siderian.relfluid import RadialMesh


@pytest.fixture
def bg():
    return pl.PlasmaBackground()


def test_background_quantities(bg):
    assert bg.omega == pytest.approx(math.sqrt(4 * math.pi * 0.01))
    assert bg.etabar == pytest.approx(math.sqrt(5 / 3 * 0.01 ** (2 / 3)))
    heavy = pl.PlasmaBackground(m=4.0)
    assert heavy.etabar == pytest.approx(bg.etabar / 2)
    with pytest.raises(ValueError):
        pl.PlasmaBackground(nbar=0.0)


def test_alpha_beta():
    assert pl.alpha_beta(5 / 3) == (1.0, 2.0)
    a, b = pl.alpha_beta(1.2)
    assert a == pytest.approx(0.6) and b == 2.0
    assert pl.alpha_beta(2.0) == (1.0, 3.0)


@pytest.mark.parametrize("edge", [1, 2, 3, 6])
def test_default_shapes_are_neutral(edge):
    mesh = RadialMesh.nodes(2.0, 4096)
    data = pl.make_plasma_data(pl.PlasmaShapes(edge=edge), mesh)
    ok, res = pl.check_neutrality(data.nu0, mesh)
    assert ok, res


def test_validate_rejects_charged_data(bg):
    mesh = RadialMesh.nodes(2.0, 512)
    data = pl.make_plasma_data(pl.PlasmaShapes(), mesh)
    data.validate(bg)
    charged = pl.RadialPlasmaData(mesh, data.nu0 + 1e-3 * (mesh.r < 1), data.sigma0, data.u0)
    with pytest.raises(ValueError, match="neutrality"):
        charged.validate(bg)


def test_initial_field_vanishes_outside_support_and_matches_gauss(bg):
    mesh = RadialMesh.nodes(2.0, 4096)
    data = pl.make_plasma_data(pl.PlasmaShapes(), mesh)
    E = pl.initial_field(data.nu0, bg.e, mesh)
    r = mesh.r
    assert np.max(np.abs(E[r >= 1.0])) < 1e-10
    k = np.searchsorted(r, 0.5)
    exact_charge = np.trapezoid(data.nu0[: k + 1] * r[: k + 1] ** 2, r[: k + 1])
    assert E[k] == pytest.approx(4 * math.pi * exact_charge / r[k] ** 2, rel=1e-5)


def test_field_moment_identity_at_time_zero(bg):
    # nu0 = (1/2 - r)(1 - r)^2 on [0, 1): neutral with int nu0 r^4 dr = 1/210 - 1/168 = -1/840
    mesh = RadialMesh.nodes(2.0, 8192)
    r = mesh.r
    nu0 = pl.PlasmaShapes(delta=1.0, edge=2).nu0(r)
    m4 = pl.nu_moment4(nu0, mesh)
    assert m4 == pytest.approx(-1 / 840, rel=1e-9)
    E = pl.initial_field(nu0, bg.e, mesh)
    moment = mesh.integrate(r * E)
    assert moment == pytest.approx(pl.initial_field_moment(m4, bg.e), rel=1e-8)
    assert moment == pytest.approx(2 * math.pi / 840, rel=1e-8)


def test_state_functionals(bg):
    mesh = RadialMesh.nodes(2.0, 2048)
    data = pl.make_plasma_data(pl.PlasmaShapes(lam=0.0, sigma=0.0, delta=0.0), mesh)
    st = pl.PlasmaState.from_data(data, bg)
    assert pl.momentum_Q(st) == 0.0
    assert pl.energy_script(st, bg) == pytest.approx(0.0, abs=1e-15)
    assert pl.mass_M(st, bg) == pytest.approx(0.0, abs=1e-15)
    moving = pl.PlasmaState.from_data(pl.make_plasma_data(pl.PlasmaShapes(), mesh), bg)
    assert pl.momentum_Q(moving) > 0
    assert pl.kinetic_integral(moving) > 0
    assert pl.field_energy(moving, bg) > 0


def test_g_function_at_rest_background(bg):
    mesh = RadialMesh.nodes(2.0, 512)
    st = pl.PlasmaState.from_data(pl.make_plasma_data(pl.PlasmaShapes(delta=0.0, sigma=0.0, lam=0.0), mesh), bg)
    assert pl.g_function(st, 0.0, bg) == pytest.approx(0.0, abs=1e-15)
    assert pl.g_function(st, 1.0, bg) == pytest.approx(-0.5 * bg.omega**2)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(-1.0, 1.0), st.floats(0.0, 2.0))
def test_ode_response_solves_oscillator(omega, Qp0, g0):
    # y = Qp0 sin(wt)/w + g0 (1 - cos wt)/w^2  for constant G = g0
    dt = 1e-3
    t = dt * np.arange(3001)
    G = np.full_like(t, g0)
    ypp = pl.ode_response_series(Qp0, t, G, omega)
    exact = -Qp0 * omega * np.sin(omega * t) + g0 * np.cos(omega * t)
    assert np.max(np.abs(ypp - exact)) < 1e-5 * (1 + abs(g0) + abs(Qp0))


def test_ode_response_rejects_nonuniform():
    with pytest.raises(ValueError):
        pl.ode_response_series(0.0, [0.0, 0.1, 0.3], [1.0, 1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        pl.ode_response(0.0, [1.0], 1.0, 0.1)


def test_certificate_scan_and_time_bound(bg):
    data = pl.make_plasma_data(pl.PlasmaShapes(lam=1.0), RadialMesh.nodes(4.0))
    lam, tried = pl.scan_lambda(data, bg)
    assert lam is not None and tried[-1] == (lam, True)
    assert not pl.certify_blowup(data, bg, lam / 2).verdict
    cert = pl.certify_blowup(data, bg, lam)
    assert cert.verdict and all(cert.checks.values())
    assert cert.T0 == pytest.approx(cert.alpha / (16 * cert.beta * cert.omega))
    eta = cert.etabar
    at_bound = 3 * cert.alpha / (64 * bg.nbar * eta) * (1 - (1 + eta * cert.T_bound) ** -4)
    assert at_bound == pytest.approx(1 / cert.Q0, rel=1e-10)
    assert cert.T_bound < cert.T0
    assert set(cert.to_dict()) == {"Q0", "energy", "moment4", "alpha", "beta", "omega", "T0", "rhs", "verdict",
                                   "lambda"}


def test_certificate_velocity_scaling(bg):
    data = pl.make_plasma_data(pl.PlasmaShapes(lam=1.0), RadialMesh.nodes(4.0, 1024))
    c1 = pl.certify_blowup(data, bg, 10.0)
    c2 = pl.certify_blowup(data, bg, 20.0)
    assert c2.Q0 == pytest.approx(2 * c1.Q0, rel=1e-12)
    assert not pl.certify_blowup(data, bg, 0.0).verdict
    with pytest.raises(ValueError):
        pl.certify_blowup(data, bg, -1.0)


def test_certificate_requires_small_background():
    dense = pl.PlasmaBackground(nbar=10.0, eos=PolytropicEos())
    data = pl.make_plasma_data(pl.PlasmaShapes(lam=1.0), RadialMesh.nodes(4.0, 1024))
    assert not pl.certify_blowup(data, dense, 1e6).checks["background_small"]


def test_certificate_is_monotone_in_lambda(bg):
    data = pl.make_plasma_data(pl.PlasmaShapes(lam=1.0), RadialMesh.nodes(4.0, 1024))
    lam, _ = pl.scan_lambda(data, bg)
    assert all(pl.certify_blowup(data, bg, lam * k).verdict for k in (1.0, 1.5, 2.0, 10.0))
