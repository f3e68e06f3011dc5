"""Polytropic equation of state in units with c = 1.

    rho = n + A(s) n**gamma / (gamma - 1),     p = A(s) n**gamma

All maps are closed-form and vectorised over numpy arrays.  Entropies are
restricted to s >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import central_diff4, forward_diff4

ENTROPY_LAWS = ("cosh", "exp")


def _check_nonneg(name: str, x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite and non-negative")
    return a


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class PolytropicEos:
    """Polytropic gas with entropy function A(s).

    ``entropy_law="cosh"`` gives A(s) = a0 cosh(s): positive, increasing on
    s >= 0 and flat at s = 0, so that d(rho)/ds vanishes exactly at zero
    entropy.  ``"exp"`` gives A(s) = a0 exp(s), which is increasing but has
    d(rho)/ds > 0 at s = 0.
    """

    gamma: float = 5.0 / 3.0
    a0: float = 1.0
    entropy_law: str = "cosh"

    def __post_init__(self) -> None:
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.a0 > 0.0:
            raise ValueError(f"a0 must be positive, got {self.a0}")
        if self.entropy_law not in ENTROPY_LAWS:
            raise ValueError(f"entropy_law must be one of {ENTROPY_LAWS}")

    @property
    def eta_max(self) -> float:
        """Supremum of the sound speed, sqrt(gamma - 1)."""
        return float(np.sqrt(self.gamma - 1.0))

    def require_relativistic(self) -> None:
        if not self.gamma < 2.0:
            raise ValueError("relativistic fluid requires 1 < gamma < 2")

    # -- entropy function ------------------------------------------------
    def _A(self, s):
        s = np.asarray(s, dtype=float)
        return self.a0 * (np.cosh(s) if self.entropy_law == "cosh" else np.exp(s))

    def A(self, s):
        return _out(self._A(_check_nonneg("s", s)))

    def entropy_from_A(self, a):
        """Inverse of A on s >= 0; values A < a0 (round-off) map to s = 0."""
        x = np.maximum(np.asarray(a, dtype=float) / self.a0, 1.0)
        return _out(np.arccosh(x) if self.entropy_law == "cosh" else np.log(x))

    # -- (n, s) maps -----------------------------------------------------
    def pressure(self, n, s):
        n = _check_nonneg("n", n)
        s = _check_nonneg("s", s)
        return _out(self._A(s) * n**self.gamma)

    def energy_density(self, n, s):
        n = _check_nonneg("n", n)
        s = _check_nonneg("s", s)
        return _out(n + self._A(s) * n**self.gamma / (self.gamma - 1.0))

    def sound_speed(self, n, s):
        n = _check_nonneg("n", n)
        s = _check_nonneg("s", s)
        g = self.gamma
        x = self._A(s) * n ** (g - 1.0)
        return _out(np.sqrt(g * (g - 1.0) * x / (g - 1.0 + g * x)))

    # -- (p, s) maps -----------------------------------------------------
    def density_from_pressure(self, p, s):
        p = _check_nonneg("p", p)
        s = _check_nonneg("s", s)
        return _out((p / self._A(s)) ** (1.0 / self.gamma))

    def energy_from_pressure(self, p, s):
        p = _check_nonneg("p", p)
        s = _check_nonneg("s", s)
        g = self.gamma
        return _out(p / (g - 1.0) + self._A(s) ** (-1.0 / g) * p ** (1.0 / g))

    def sound_speed_from_pressure(self, p, s):
        p = _check_nonneg("p", p)
        s = _check_nonneg("s", s)
        g = self.gamma
        y = self._A(s) ** (1.0 / g) * p ** ((g - 1.0) / g)
        return _out(np.sqrt(g * (g - 1.0) * y / (g - 1.0 + g * y)))


@dataclass
class AssumptionReport:
    drho_dn_positive: bool
    dp_dn_positive: bool
    drho_ds_nonneg: bool
    drho_ds_zero_iff_s0: bool
    a1_rho_nonincreasing_in_s: bool
    a2_eta_nondecreasing_in_p: bool
    p_le_rho: bool
    eta_bounded: bool
    eta_increasing_in_n: bool
    p_le_rho_margin: float = float("nan")
    pressure_consistency: float = float("nan")
    details: dict = field(default_factory=dict)

    CHECKS = (
        "drho_dn_positive", "dp_dn_positive", "drho_ds_nonneg", "drho_ds_zero_iff_s0",
        "a1_rho_nonincreasing_in_s", "a2_eta_nondecreasing_in_p", "p_le_rho",
        "eta_bounded", "eta_increasing_in_n",
    )

    @property
    def passed(self) -> bool:
        return all(getattr(self, k) for k in self.CHECKS)

    def failures(self) -> list[str]:
        return [k for k in self.CHECKS if not getattr(self, k)]

    def to_dict(self) -> dict:
        d = {k: bool(getattr(self, k)) for k in self.CHECKS}
        d["passed"] = self.passed
        d["p_le_rho_margin"] = float(self.p_le_rho_margin)
        d["pressure_consistency"] = float(self.pressure_consistency)
        return d


def _fd_step(x):
    return np.maximum(1e-5, 1e-5 * np.abs(x))


def verify_assumptions(eos: PolytropicEos, n_grid, s_grid) -> AssumptionReport:
    """Check the structural assumptions on a tensor grid of (n, s).

    Derivatives with respect to n and s are taken of ``eos.energy_density`` by
    4th-order differences; the pressure used in the d(p)/dn check is the one
    implied by rho through p = n d(rho)/dn - rho, so a corrupted energy map is
    caught even if the closed-form pressure is left untouched.  The (p, s)
    assumptions are sampled on the pressures of the grid.
    """
    n_grid = np.asarray(n_grid, dtype=float)
    s_grid = np.asarray(s_grid, dtype=float)
    if n_grid.ndim != 1 or s_grid.ndim != 1 or n_grid.size < 3 or s_grid.size < 3:
        raise ValueError("degenerate grid: need at least 3 points per axis")
    if np.any(n_grid <= 0) or np.any(s_grid < 0) or not (np.all(np.isfinite(n_grid)) and np.all(np.isfinite(s_grid))):
        raise ValueError("grids must be finite with n > 0 and s >= 0")
    n_grid = np.sort(n_grid)
    s_grid = np.sort(s_grid)
    N, S = np.meshgrid(n_grid, s_grid, indexing="ij")
    rho = eos.energy_density

    hn = _fd_step(N)
    drho_dn = central_diff4(lambda x: rho(x, S), N, hn)

    def p_implied(x):
        return x * central_diff4(lambda y: rho(y, S), x, _fd_step(x)) - rho(x, S)

    dp_dn = central_diff4(p_implied, N, hn)

    hs = _fd_step(S)
    drho_ds = np.where(
        S >= 2 * hs,
        central_diff4(lambda y: rho(N, np.maximum(y, 0.0)), S, hs),
        forward_diff4(lambda y: rho(N, y), S, hs),
    )
    rho_val = np.asarray(rho(N, S))
    # FD noise level for "d(rho)/ds = 0"
    zero_tol = 1e-7 * np.maximum(rho_val, 1.0)
    is_zero = np.abs(drho_ds) <= zero_tol
    at_s0 = S == 0.0

    p_val = np.asarray(eos.pressure(N, S))
    p_fd = np.asarray(p_implied(N))
    consistency = float(np.max(np.abs(p_fd - p_val)))

    # (A1), (A2) on the pressure levels reached by the grid
    p_levels = np.unique(p_val[p_val > 0])
    P, S2 = np.meshgrid(p_levels, s_grid, indexing="ij")
    rho_ps = np.asarray(eos.energy_from_pressure(P, S2))
    eta_ps = np.asarray(eos.sound_speed_from_pressure(P, S2))
    a1 = bool(np.all(np.diff(rho_ps, axis=1) <= 1e-13 * np.abs(rho_ps[:, 1:])))
    a2 = bool(np.all(np.diff(eta_ps, axis=0) >= 0.0))

    eta = np.asarray(eos.sound_speed(N, S))
    margin = rho_val - p_val

    return AssumptionReport(
        drho_dn_positive=bool(np.all(drho_dn > 0)),
        dp_dn_positive=bool(np.all(dp_dn > 0)),
        drho_ds_nonneg=bool(np.all(drho_ds >= -zero_tol)),
        drho_ds_zero_iff_s0=bool(np.all(is_zero == at_s0)),
        a1_rho_nonincreasing_in_s=a1,
        a2_eta_nondecreasing_in_p=a2,
        p_le_rho=bool(np.all(margin >= 0)),
        eta_bounded=bool(np.all((eta > 0) & (eta < eos.eta_max))),
        eta_increasing_in_n=bool(np.all(np.diff(eta, axis=0) > 0)),
        p_le_rho_margin=float(margin.min()),
        pressure_consistency=consistency,
        details={"min_dp_dn": float(dp_dn.min()), "min_drho_dn": float(drho_dn.min())},
    )
