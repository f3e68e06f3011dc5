"""Spherically symmetric Euler-Maxwell (electron fluid over a fixed ion background).

Functionals here follow the radial normalisation of the momentum argument:
integrals are int_0^inf (...) r^2 dr without the 4 pi.  A certificate replaces
the unspecified constant of the momentum argument by explicit ones:

  (i)   int n u^2 r^2 dr <= 2 En                  (En >= kinetic half, M = 0, s >= sbar)
  (ii)  Q^2 <= (2/3) nbar R^5 En,  so |Q(0)| <= sqrt(2 nbar / 3) En when En >= 1
  (iii) Q'(t) >= (alpha/2) En - omega |Q(0)| - 2 beta omega En t
  (iv)  omega sqrt(2 nbar / 3) <= alpha / 8 and T0 = alpha / (16 beta omega)
        give Q' >= (alpha/8) En >= 3 alpha Q^2 / (16 nbar R^5) on [0, T0]
  (v)   blowup is certified when 1/Q(0) < 3 alpha / (64 nbar eta) [1 - (1 + eta T0)^-4]
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .eos import PolytropicEos
from .numerics import check_uniform, convolve_sin
from .relfluid import RadialMesh


@dataclass(frozen=True)
class PlasmaBackground:
    nbar: float = 0.01
    sbar: float = 0.0
    e: float = 1.0
    m: float = 1.0
    c: float = 1.0
    eos: PolytropicEos = field(default_factory=PolytropicEos)

    def __post_init__(self) -> None:
        for name in ("nbar", "e", "m", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sbar < 0:
            raise ValueError("sbar must be non-negative")

    @property
    def pbar(self) -> float:
        return self.eos.pressure(self.nbar, self.sbar)

    @property
    def etabar(self) -> float:
        """Background sound speed sqrt(gamma A(sbar) nbar^(gamma-1) / m)."""
        g = self.eos.gamma
        return math.sqrt(g * self.eos.A(self.sbar) * self.nbar ** (g - 1.0) / self.m)

    @property
    def omega(self) -> float:
        return plasma_frequency(self)


def plasma_frequency(bg: PlasmaBackground) -> float:
    return math.sqrt(4.0 * math.pi * bg.e**2 * bg.nbar / bg.m)


def alpha_beta(gamma: float) -> tuple[float, float]:
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    return min(1.0, 3.0 * (gamma - 1.0)), max(2.0, 3.0 * (gamma - 1.0))


# ---------------------------------------------------------------------------
# data


@dataclass
class RadialPlasmaData:
    """Perturbations nu0 = n - nbar, sigma0 = s - sbar and velocity u0 on a node mesh."""

    mesh: RadialMesh
    nu0: np.ndarray
    sigma0: np.ndarray
    u0: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return self.mesh.r

    def validate(self, bg: PlasmaBackground, tol: float = 1e-10) -> None:
        out = self.r >= 1.0
        if np.any(self.nu0[out] != 0) or np.any(self.sigma0[out] != 0) or np.any(self.u0[out] != 0):
            raise ValueError("perturbations must vanish for r >= 1")
        if self.r[0] == 0.0 and self.u0[0] != 0.0:
            raise ValueError("u0(0) must vanish")
        if np.any(self.sigma0 < 0):
            raise ValueError("sigma0 must be non-negative")
        if np.any(bg.nbar + self.nu0 <= 0):
            raise ValueError("density nbar + nu0 must stay positive")
        ok, res = check_neutrality(self.nu0, self.mesh, tol)
        if not ok:
            raise ValueError(f"neutrality violated: int nu0 r^2 dr = {res:.3e}")

    def scaled_velocity(self, lam: float) -> "RadialPlasmaData":
        return replace(self, u0=lam * self.u0)


def neutral_constant(edge: int = 2) -> float:
    """a with int_0^1 (a - r)(1 - r)^edge r^2 dr = 0, namely 3 / (edge + 4)."""
    return 3.0 / (edge + 4.0)


@dataclass
class PlasmaShapes:
    """nu0 = delta (a - r)(1 - r)^k, sigma0 = sigma r^2 (1 - r)^k, u0 = lam r (1 - r)^k on [0, 1).

    ``k = edge``; ``a`` makes nu0 neutral.
    """

    delta: float = 0.004
    sigma: float = 0.5
    lam: float = 0.2
    edge: int = 2

    def __post_init__(self) -> None:
        if self.edge < 1:
            raise ValueError("edge must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def _bump(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, np.abs(1.0 - r) ** self.edge, 0.0), r

    def nu0(self, r):
        b, r = self._bump(r)
        return self.delta * (neutral_constant(self.edge) - r) * b

    def sigma0(self, r):
        b, r = self._bump(r)
        return self.sigma * r**2 * b

    def u0(self, r):
        b, r = self._bump(r)
        return self.lam * r * b

    def with_lambda(self, lam: float) -> "PlasmaShapes":
        return replace(self, lam=lam)

    def profile(self, bg: PlasmaBackground) -> Callable:
        """Pointwise (n, s, u) for solver initialisation."""
        def prof(r):
            return bg.nbar + self.nu0(r), bg.sbar + self.sigma0(r), self.u0(r)
        return prof


def make_plasma_data(shapes: PlasmaShapes, mesh: Optional[RadialMesh] = None) -> RadialPlasmaData:
    mesh = RadialMesh.nodes() if mesh is None else mesh
    r = mesh.r
    return RadialPlasmaData(mesh, shapes.nu0(r), shapes.sigma0(r), shapes.u0(r))


# ---------------------------------------------------------------------------
# state functionals


@dataclass
class PlasmaState:
    """Profiles n, s, u on ``mesh`` and the radial field E on ``field_mesh``."""

    t: float
    mesh: RadialMesh
    n: np.ndarray
    s: np.ndarray
    u: np.ndarray
    field_mesh: RadialMesh
    E: np.ndarray

    @classmethod
    def from_data(cls, data: RadialPlasmaData, bg: PlasmaBackground) -> "PlasmaState":
        E0 = initial_field(data.nu0, bg.e, data.mesh)
        return cls(0.0, data.mesh, bg.nbar + data.nu0, bg.sbar + data.sigma0, data.u0.copy(), data.mesh, E0)

    def pressure(self, bg: PlasmaBackground) -> np.ndarray:
        return np.asarray(bg.eos.pressure(self.n, self.s))


def initial_field(nu0, e: float, mesh: RadialMesh) -> np.ndarray:
    """E(0, r) = 4 pi e / r^2 int_0^r nu0 r'^2 dr' by cumulative Simpson on uniform nodes."""
    r = mesh.r
    if r[0] != 0.0:
        raise ValueError("initial_field expects nodes starting at r = 0")
    charge = cumulative_simpson(np.asarray(nu0, dtype=float) * r**2, dx=r[1] - r[0], initial=0.0)
    E = np.zeros_like(r)
    E[1:] = 4.0 * math.pi * e * charge[1:] / r[1:] ** 2
    return E


def check_neutrality(nu0, mesh: RadialMesh, tol: float = 1e-10) -> tuple[bool, float]:
    res = mesh.integrate(nu0)
    return abs(res) < tol, res


def nu_moment4(nu0, mesh: RadialMesh) -> float:
    """int nu0 r^4 dr."""
    return mesh.integrate(np.asarray(nu0) * mesh.r**2)


def momentum_Q(state: PlasmaState) -> float:
    """Q = int r n u r^2 dr."""
    return state.mesh.integrate(state.mesh.r * state.n * state.u)


def kinetic_integral(state: PlasmaState) -> float:
    """int n u^2 r^2 dr."""
    return state.mesh.integrate(state.n * state.u**2)


def field_energy(state: PlasmaState, bg: PlasmaBackground) -> float:
    return state.field_mesh.integrate(state.E**2) / (8.0 * math.pi * bg.m)


def energy_script(state: PlasmaState, bg: PlasmaBackground) -> float:
    g = bg.eos.gamma
    internal = (state.pressure(bg) - bg.pbar) / (bg.m * (g - 1.0))
    return state.mesh.integrate(0.5 * state.n * state.u**2 + internal) + field_energy(state, bg)


def mass_M(state: PlasmaState, bg: PlasmaBackground) -> float:
    return state.mesh.integrate(state.n - bg.nbar)


def initial_field_moment(moment4: float, e: float) -> float:
    """int r E(0) r^2 dr for neutral data.

    With neutrality the charge inside r vanishes for r >= 1 and
    int_r^1 r' dr' = (1 - r^2)/2 gives -2 pi e int nu0 r^4 dr.
    """
    return -2.0 * math.pi * e * moment4


def g_function(state: PlasmaState, moment4: float, bg: PlasmaBackground) -> float:
    """Forcing of y'' + omega^2 y = G with y = int_0^t Q.

    G = -(omega^2 / 2) int nu0 r^4 dr + int {n u^2 + 3 (p - pbar)/m + E^2/(8 pi m)} r^2 dr,
    the factor 1/2 coming from :func:`initial_field_moment`.
    """
    omega = plasma_frequency(bg)
    body = state.mesh.integrate(state.n * state.u**2 + 3.0 / bg.m * (state.pressure(bg) - bg.pbar))
    return -0.5 * omega**2 * moment4 + body + field_energy(state, bg)


def field_moment(state: PlasmaState) -> float:
    """int r E r^2 dr."""
    return state.field_mesh.integrate(state.field_mesh.r * state.E)


# ---------------------------------------------------------------------------
# forced oscillator


def ode_response(Qp0: float, G_series, omega: float, dt: float) -> np.ndarray:
    """y'' for y'' + omega^2 y = G, y(0) = 0, y'(0) = Qp0, from a uniform G series."""
    G = np.asarray(G_series, dtype=float)
    if G.ndim != 1 or G.size < 2:
        raise ValueError("G must be a 1-D series")
    if not dt > 0:
        raise ValueError("non-uniform or empty sampling")
    t = dt * np.arange(G.size)
    return -omega * Qp0 * np.sin(omega * t) + G - omega * convolve_sin(G, omega, dt)


def ode_response_series(Qp0: float, t, G, omega: float) -> np.ndarray:
    """As :func:`ode_response` but checks that ``t`` is uniform first."""
    return ode_response(Qp0, G, omega, check_uniform(t))


# ---------------------------------------------------------------------------
# certificate


@dataclass
class BlowupCertificate:
    Q0: float
    energy: float
    moment4: float
    alpha: float
    beta: float
    omega: float
    T0: float
    rhs: float
    verdict: bool
    lam: float
    etabar: float = float("nan")
    nbar: float = float("nan")
    checks: dict = field(default_factory=dict)
    T_bound: Optional[float] = None

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("Q0", "energy", "moment4", "alpha", "beta", "omega", "T0", "rhs", "verdict")}
        d["lambda"] = self.lam
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def certify_blowup(data: RadialPlasmaData, bg: PlasmaBackground, lam: float = 1.0) -> BlowupCertificate:
    """Explicit-constant blowup certificate for velocity amplitude ``lam`` times ``data.u0``."""
    data.validate(bg)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    scaled = data.scaled_velocity(lam)
    state = PlasmaState.from_data(scaled, bg)
    alpha, beta = alpha_beta(bg.eos.gamma)
    omega = plasma_frequency(bg)
    eta = bg.etabar
    Q0 = momentum_Q(state)
    En = energy_script(state, bg)
    m4 = nu_moment4(data.nu0, data.mesh)
    T0 = alpha / (16.0 * beta * omega)
    rhs = 3.0 * alpha / (64.0 * bg.nbar * eta) * (1.0 - (1.0 + eta * T0) ** -4)
    checks = {
        "energy_at_least_one": En >= 1.0,
        "moment_dominated": omega**2 * abs(m4) <= 0.5 * alpha * En,
        "background_small": omega * math.sqrt(2.0 * bg.nbar / 3.0) <= alpha / 8.0,
        "momentum_positive": Q0 > 0.0,
    }
    checks["momentum_large"] = checks["momentum_positive"] and 1.0 / Q0 < rhs
    verdict = all(checks.values())
    T_bound = None
    if verdict:
        # 1/Q0 = 3 alpha/(64 nbar eta) [1 - (1 + eta T)^-4]
        x = 1.0 - 64.0 * bg.nbar * eta / (3.0 * alpha * Q0)
        T_bound = (x**-0.25 - 1.0) / eta
    return BlowupCertificate(Q0, En, m4, alpha, beta, omega, T0, rhs, verdict, lam, eta, bg.nbar,
                             {k: bool(v) for k, v in checks.items()}, T_bound)


def scan_lambda(data: RadialPlasmaData, bg: PlasmaBackground, start: float = 1.0,
                max_doublings: int = 60) -> tuple[Optional[float], list]:
    """Smallest lam = start * 2^k certified; returns (lam*, [(lam, verdict), ...])."""
    lam = start
    tried = []
    for _ in range(max_doublings + 1):
        cert = certify_blowup(data, bg, lam)
        tried.append((lam, cert.verdict))
        if cert.verdict:
            return lam, tried
        lam *= 2.0
    return None, tried
