"""Averaged functionals and blowup certification for the relativistic Euler equations.

Data are radial profiles on a mesh that carries its own r**2-weighted
quadrature weights, so the same functionals serve node-tabulated initial data
(composite Simpson) and finite-volume snapshots (cell volumes).  Integrals
over R^3 carry the 4*pi of the angular integration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .eos import PolytropicEos
from .numerics import quad_finite, quad_improper, quad_profile, root_bracketed, simpson_weights

FOUR_PI = 4.0 * math.pi


# ---------------------------------------------------------------------------
# meshes and profiles


@dataclass(frozen=True)
class RadialMesh:
    """Sample radii ``r`` with weights ``w`` such that sum(w f) ~ int f r^2 dr."""

    r: np.ndarray
    w: np.ndarray

    @classmethod
    def nodes(cls, r_max: float = 4.0, n_cells: int = 2048) -> "RadialMesh":
        """Uniform nodes 0, h, ..., r_max with composite Simpson weights."""
        if n_cells % 2:
            raise ValueError("node mesh needs an even number of intervals")
        r = np.linspace(0.0, r_max, n_cells + 1)
        return cls(r, simpson_weights(r.size, r[1] - r[0]) * r**2)

    @classmethod
    def cells(cls, r_max: float, n_cells: int) -> "RadialMesh":
        """Cell centres of a uniform finite-volume grid with exact shell volumes."""
        faces = np.linspace(0.0, r_max, n_cells + 1)
        return cls(0.5 * (faces[1:] + faces[:-1]), (faces[1:] ** 3 - faces[:-1] ** 3) / 3.0)

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    def integrate(self, f) -> float:
        """``int f r^2 dr`` over the mesh."""
        return float(self.w @ np.asarray(f, dtype=float))

    def scaled(self, factor: float) -> "RadialMesh":
        return RadialMesh(self.r * factor, self.w * factor**3)


@dataclass(frozen=True)
class QuietBackground:
    nbar: float
    sbar: float
    eos: PolytropicEos

    def __post_init__(self) -> None:
        if not self.nbar > 0:
            raise ValueError("background density must be positive")
        if self.sbar < 0:
            raise ValueError("background entropy must be non-negative")

    @property
    def pbar(self) -> float:
        return self.eos.pressure(self.nbar, self.sbar)

    @property
    def rhobar(self) -> float:
        return self.eos.energy_density(self.nbar, self.sbar)

    @property
    def etabar(self) -> float:
        return self.eos.sound_speed(self.nbar, self.sbar)

    @property
    def zetabar(self) -> float:
        return (self.rhobar + self.pbar) * self.etabar


@dataclass
class RadialFluidData:
    """Radial profiles of n, s and the radial component u of the spatial 4-velocity.

    ``p`` and ``rho`` may be supplied (e.g. recovered by a solver); otherwise
    they are evaluated from (n, s).  ``R0`` is the support radius.
    """

    mesh: RadialMesh
    n: np.ndarray
    s: np.ndarray
    u: np.ndarray
    p: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None
    R0: float = 1.0
    t: float = 0.0

    @property
    def r(self) -> np.ndarray:
        return self.mesh.r

    def thermo(self, eos: PolytropicEos) -> tuple[np.ndarray, np.ndarray]:
        p = eos.pressure(self.n, self.s) if self.p is None else self.p
        rho = eos.energy_density(self.n, self.s) if self.rho is None else self.rho
        return np.asarray(p), np.asarray(rho)

    def validate(self, bg: QuietBackground, atol: float = 0.0) -> None:
        out = self.r >= self.R0
        if np.any(self.n <= 0) or np.any(self.s < 0):
            raise ValueError("profiles need n > 0 and s >= 0")
        if not (np.all(np.isfinite(self.n)) and np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.s))):
            raise ValueError("non-finite profile values")
        if (np.any(np.abs(self.n[out] - bg.nbar) > atol) or np.any(np.abs(self.s[out] - bg.sbar) > atol)
                or np.any(np.abs(self.u[out]) > atol)):
            raise ValueError("profiles must equal the background outside the support radius")
        if self.r[0] == 0.0 and self.u[0] != 0.0:
            raise ValueError("u0(0) must vanish")

    def rescaled(self, R0_new: float) -> "RadialFluidData":
        """Same data with the radial coordinate stretched to support radius ``R0_new``."""
        k = R0_new / self.R0
        return replace(self, mesh=self.mesh.scaled(k), R0=R0_new)


# ---------------------------------------------------------------------------
# functionals


def stress_energy(u_spatial, rho: float, p: float) -> np.ndarray:
    """Perfect-fluid energy tensor T^{mu nu} for metric diag(-1, 1, 1, 1)."""
    if p > rho:
        raise ValueError("positivity violated: p > rho")
    if p < 0 or rho < 0:
        raise ValueError("rho and p must be non-negative")
    uvec = np.asarray(u_spatial, dtype=float).reshape(3)
    u4 = np.concatenate([[math.sqrt(1.0 + uvec @ uvec)], uvec])
    g_inv = np.diag([-1.0, 1.0, 1.0, 1.0])
    return (rho + p) * np.outer(u4, u4) + p * g_inv


def total_energy(data: RadialFluidData, bg: QuietBackground, eos: PolytropicEos) -> float:
    """Energy of the perturbation, 4 pi int [(rho + p) u^2 + rho - rhobar] r^2 dr."""
    p, rho = data.thermo(eos)
    return FOUR_PI * data.mesh.integrate((rho + p) * data.u**2 + rho - bg.rhobar)


def radial_momentum(data: RadialFluidData, bg: QuietBackground, eos: PolytropicEos) -> float:
    """Q = 4 pi int r u u0 (rho + p) r^2 dr."""
    p, rho = data.thermo(eos)
    u = data.u
    return FOUR_PI * data.mesh.integrate(data.r * u * np.sqrt(1.0 + u * u) * (rho + p))


def kinetic_integral(data: RadialFluidData, eos: PolytropicEos) -> float:
    """4 pi int (rho + p) u^2 r^2 dr."""
    p, rho = data.thermo(eos)
    return FOUR_PI * data.mesh.integrate((rho + p) * data.u**2)


def q_prime_integrand(data: RadialFluidData, bg: QuietBackground, eos: PolytropicEos) -> float:
    """dQ/dt = 4 pi int [(rho + p) u^2 + 3 (p - pbar)] r^2 dr."""
    p, rho = data.thermo(eos)
    return FOUR_PI * data.mesh.integrate((rho + p) * data.u**2 + 3.0 * (p - bg.pbar))


def bound_integral(E: float, rhobar: float, R_upper: float = math.inf) -> float:
    """I(R) = int_1^R dr / (E r^2 + (4 pi / 3) rhobar r^5)."""
    b = FOUR_PI / 3.0 * rhobar
    if E < 0 or rhobar < 0:
        raise ValueError("E and rhobar must be non-negative")
    if E == 0 and b == 0:
        raise ValueError("E = rhobar = 0 gives a divergent integrand")
    if not R_upper > 1.0:
        if R_upper == 1.0:
            return 0.0
        raise ValueError("upper limit must be >= 1")
    if math.isinf(R_upper):
        return quad_improper(E, b)
    return quad_finite(lambda r: 1.0 / (E * r * r + b * r**5), 1.0, R_upper)


def f_bound(y: float) -> float:
    """f(y) = (int_1^inf dr / (r^2 (r^3 + y)))^{-1}."""
    if y < 0:
        raise ValueError("f is defined for y >= 0")
    return 1.0 / quad_improper(float(y), 1.0)


# ---------------------------------------------------------------------------
# conditions and certificate


@dataclass
class ConditionReport:
    E: float
    Q0: float
    etabar: float
    d1: bool
    d2: bool
    d3: bool
    d4: bool
    d4_threshold: float
    qe_threshold: float
    rhobar: float = float("nan")
    R0: float = 1.0
    T_star: Optional[float] = None

    @property
    def all_pass(self) -> bool:
        return self.d1 and self.d2 and self.d3 and self.d4

    @property
    def qe_pass(self) -> bool:
        return self.Q0 > self.qe_threshold

    def to_dict(self) -> dict:
        keys = ("E", "Q0", "etabar", "d1", "d2", "d3", "d4", "d4_threshold", "qe_threshold", "T_star")
        d = asdict(self)
        return {k: d[k] for k in keys}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _d4_threshold(E: float, bg: QuietBackground, R0: float) -> float:
    eta = bg.etabar
    denom = 1.0 - 3.0 * eta**2
    if denom <= 0 or E <= 0:
        return math.inf
    # support radius R0: I scales as R0^-4 under x -> x / R0
    I = bound_integral(E / R0**3, bg.rhobar) / R0**4
    return 2.0 * eta / denom / I


def check_conditions(data: RadialFluidData, bg: QuietBackground, eos: PolytropicEos) -> ConditionReport:
    eta = bg.etabar
    E = total_energy(data, bg, eos)
    Q0 = radial_momentum(data, bg, eos)
    inside = data.r <= data.R0
    d3 = bool(np.all(data.s[inside] >= bg.sbar))
    denom = 1.0 - 3.0 * eta**2
    d4_thr = _d4_threshold(E, bg, data.R0)
    if denom > 0:
        # sufficient threshold from f(y) <= 16y/7 + 4, scaled to R0 = 1 (E / R0^3, Q0 / R0^4)
        R0 = data.R0
        qe_thr = 32.0 * eta / (7.0 * denom) * (E / R0**3 + 7.0 * math.pi / 3.0 * bg.rhobar) * R0**4
    else:
        qe_thr = math.inf
    return ConditionReport(
        E=E, Q0=Q0, etabar=eta,
        d1=bool(eta < 1.0 / 3.0), d2=bool(E > 0), d3=d3, d4=bool(Q0 > d4_thr),
        d4_threshold=d4_thr, qe_threshold=qe_thr, rhobar=bg.rhobar, R0=data.R0,
    )


def breakdown_time_bound(report: ConditionReport, bg: QuietBackground) -> Optional[float]:
    """Smallest T with 1/Q(0) <= (1 - 3 eta^2)/(2 eta) I(R(T)),  R(T) = R0 + eta T.

    Returns ``None`` when D1-D4 do not all hold (no finite certificate).
    """
    if not report.all_pass:
        return None
    eta = report.etabar
    k = (1.0 - 3.0 * eta**2) / (2.0 * eta)
    R0 = report.R0
    E, rhobar, Q0 = report.E / R0**3, report.rhobar, report.Q0 / R0**4
    target = 1.0 / Q0

    # work in normalised units (support radius 1), then rescale time by R0
    def g(T):
        return k * bound_integral(E, rhobar, 1.0 + eta * T) - target

    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
        if hi > 1e30:
            return None
    # brentq's own relative criterion (4 eps) governs once xtol is negligible
    T = root_bracketed(g, 0.0, hi, tol=1e-300)
    return T * R0


# ---------------------------------------------------------------------------
# example family


def default_phi(kappa: float = 8.0, edge: int = 2) -> Callable:
    """phi(r) = kappa r (1 - r)^edge on [0, 1), zero outside."""
    def phi(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, kappa * r * np.abs(1.0 - r) ** edge, 0.0)
    return phi


def psi_moment_constant(edge: int = 2) -> float:
    """c making int_0^1 (1 - c r^2)(1 - r)^edge r^2 dr = 0."""
    # int r^k (1-r)^m = k! m! / (k+m+1)!
    m = edge
    b2 = math.factorial(2) * math.factorial(m) / math.factorial(m + 3)
    b4 = math.factorial(4) * math.factorial(m) / math.factorial(m + 5)
    return b2 / b4


def default_psi(mu: float = 0.5, edge: int = 2) -> Callable:
    """psi(r) = 1 + mu (1 - c r^2)(1 - r)^edge on [0, 1), 1 outside."""
    c = psi_moment_constant(edge)

    def psi(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, 1.0 + mu * (1.0 - c * r * r) * np.abs(1.0 - r) ** edge, 1.0)
    return psi


@dataclass
class DataFamilyParams:
    """n0 = nbar psi(r), u0 = phi(r), s0 = sbar + phi(r)."""

    phi: Callable
    psi: Callable
    nbar: float
    sbar: float
    gamma: float
    a0: float = 1.0
    entropy_law: str = "cosh"
    extra: dict = field(default_factory=dict)

    @classmethod
    def default(cls, nbar: float = 1e-3, sbar: float = 0.0, gamma: float = 5.0 / 3.0, kappa: float = 8.0,
                mu: float = 0.5, edge: int = 2, a0: float = 1.0, entropy_law: str = "cosh") -> "DataFamilyParams":
        return cls(default_phi(kappa, edge), default_psi(mu, edge), nbar, sbar, gamma, a0, entropy_law,
                   extra={"kappa": kappa, "mu": mu, "edge": edge})

    @property
    def eos(self) -> PolytropicEos:
        return PolytropicEos(self.gamma, self.a0, self.entropy_law)

    @property
    def background(self) -> QuietBackground:
        return QuietBackground(self.nbar, self.sbar, self.eos)

    def with_nbar(self, nbar: float) -> "DataFamilyParams":
        return replace(self, nbar=nbar)

    def profiles(self, r) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pointwise (n0, s0, u0) at radii ``r``."""
        ph = self.phi(r)
        return self.nbar * self.psi(r), self.sbar + ph, ph


def make_initial_data(params: DataFamilyParams, mesh: Optional[RadialMesh] = None) -> RadialFluidData:
    mesh = RadialMesh.nodes() if mesh is None else mesh
    r = mesh.r
    # psi moment on a fine independent Simpson grid of [0, 1]
    rr = np.linspace(0.0, 1.0, 4097)
    moment = quad_profile(params.psi(rr) - 1.0, rr[1] - rr[0], rr**2)
    if abs(moment) > 1e-8:
        raise ValueError(f"psi violates the zero-moment condition (moment = {moment:.3e})")
    if params.phi(np.array([0.0]))[0] != 0.0 or np.any(params.phi(r[r >= 1.0]) != 0.0):
        raise ValueError("phi must vanish at r = 0 and for r >= 1")
    if np.any(params.psi(r) <= 0):
        raise ValueError("psi must be positive")
    if np.any(params.phi(r) < 0):
        raise ValueError("phi must be non-negative")
    n0, s0, u0 = params.profiles(r)
    out = r >= 1.0
    n0[out], s0[out], u0[out] = params.nbar, params.sbar, 0.0
    return RadialFluidData(mesh, n0, s0, u0)


def example_energy_closed_form(params: DataFamilyParams, mesh: RadialMesh) -> float:
    """E for the example family after using the zero moment of psi - 1."""
    g = params.gamma
    eos = params.eos
    r = mesh.r
    inside = r < 1.0
    ph, ps = params.phi(r), params.psi(r)
    A = eos.A(params.sbar + ph)
    Abar = eos.A(params.sbar)
    nb = params.nbar
    f = ps * ph**2 + nb ** (g - 1) / (g - 1) * (A * ps**g * (g * ph**2 + 1.0) - Abar)
    return FOUR_PI * nb * mesh.integrate(np.where(inside, f, 0.0))


def example_momentum_closed_form(params: DataFamilyParams, mesh: RadialMesh) -> float:
    g = params.gamma
    r = mesh.r
    ph, ps = params.phi(r), params.psi(r)
    A = params.eos.A(params.sbar + ph)
    nb = params.nbar
    f = ph * np.sqrt(1 + ph**2) * (ps + A * g / (g - 1) * nb ** (g - 1) * ps**g) * r
    return FOUR_PI * nb * mesh.integrate(f)


@dataclass
class NbarScan:
    nbar: Optional[float]
    report: Optional[ConditionReport]
    tried: list = field(default_factory=list)


def find_blowup_nbar(params: DataFamilyParams, mesh: Optional[RadialMesh] = None,
                     start: float = 1.0, stop: float = 1e-12) -> NbarScan:
    """Largest nbar on the grid start * 2^-k >= stop for which D1-D4 all hold."""
    mesh = RadialMesh.nodes() if mesh is None else mesh
    nbar = start
    tried = []
    while nbar >= stop:
        trial = params.with_nbar(nbar)
        rep = check_conditions(make_initial_data(trial, mesh), trial.background, trial.eos)
        tried.append((nbar, rep.all_pass))
        if rep.all_pass:
            rep.T_star = breakdown_time_bound(rep, trial.background)
            return NbarScan(nbar, rep, tried)
        nbar *= 0.5
    return NbarScan(None, None, tried)


# ---------------------------------------------------------------------------
# linearised symmetric-hyperbolic structure at the background


@dataclass(frozen=True)
class HyperbolicMatrices:
    A0: np.ndarray
    Ai: tuple

    def pencil(self, xi) -> np.ndarray:
        """(A0)^{-1} sum_i A^i xi_i."""
        xi = np.asarray(xi, dtype=float)
        M = sum(x * a for x, a in zip(xi, self.Ai))
        return np.linalg.solve(self.A0, M)


def background_hyperbolic_matrices(bg: QuietBackground) -> HyperbolicMatrices:
    """Linearisation at the background of the (p, u^mu, s) system.

    Unknown ordering (p, u0, u1, u2, u3, s).
    """
    zeta, eta = bg.zetabar, bg.etabar
    A0 = np.diag([1.0 / zeta, zeta, zeta, zeta, zeta, 1.0])
    Ai = []
    for i in range(3):
        a = np.zeros((6, 6))
        a[0, 2 + i] = a[2 + i, 0] = eta
        Ai.append(a)
    return HyperbolicMatrices(A0, tuple(Ai))
