"""Shared numerical kernels.

Radial quadrature on uniform grids, the improper integral that appears in the
momentum threshold, bracketed root finding, the sine convolution used by the
forced-oscillator representation, finite differences and a small Jacobi
eigenvalue solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "simpson"
    atol: float = 1e-10
    tail: str = "series"

    def __post_init__(self) -> None:
        if self.atol <= 0:
            raise ValueError("quadrature tolerance must be positive")
        if self.rule not in ("simpson", "trapezoid"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")


def simpson_weights(n_points: int, dx: float) -> np.ndarray:
    """Composite Simpson weights for ``n_points`` equispaced samples.

    ``n_points`` must be odd (an even number of panels).
    """
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError("composite Simpson needs an odd number (>= 3) of samples")
    w = np.empty(n_points)
    w[0] = w[-1] = 1.0
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (dx / 3.0)


def quad_profile(samples, dr: float, weight=None) -> float:
    """Integrate uniformly sampled ``samples * weight`` with composite Simpson.

    ``weight`` is either an array of the same length or ``None``.  Exact for
    cubics on every panel pair.
    """
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or f.size < 3:
        raise ValueError("need a 1-D profile with at least 3 samples")
    if weight is not None:
        f = f * np.asarray(weight, dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite profile values")
    return float(simpson_weights(f.size, dr) @ f)


# ---------------------------------------------------------------------------
# improper integral  int_1^inf dr / (E r^2 + b r^5)


def _tail_series(E: float, b: float, M: float) -> float:
    """Exact tail  int_M^inf dr / (E r^2 + b r^5)  for  b > 0, E/(b M^3) < 1.

    Expands 1/(b r^5 (1 + q)), q = E/(b r^3), into a geometric series and
    integrates term by term.
    """
    x = E / (b * M**3)
    total, term, k = 0.0, 1.0, 0
    while True:
        contrib = term / ((4 + 3 * k) * b * M**4)
        total += contrib
        if abs(contrib) < 1e-18 * max(abs(total), 1e-300) or k > 400:
            break
        term *= -x
        k += 1
    return total


def quad_improper(E: float, b: float, atol: float = 1e-10) -> float:
    """``int_1^inf dr / (E r^2 + b r^5)`` with adaptive quadrature plus a tail.

    The finite part [1, M] uses adaptive Gauss-Kronrod; the tail beyond M is
    summed in closed form, so only the finite part carries quadrature error.
    """
    if E < 0 or b < 0:
        raise ValueError("coefficients must be non-negative")
    if E == 0 and b == 0:
        raise ValueError("integrand 1/0 diverges: E and b cannot both vanish")
    if b == 0:
        return 1.0 / E
    if E == 0:
        return 1.0 / (4.0 * b)
    # tail ratio E/(b M^3) <= 1/8
    M = max(2.0, 2.0 * (E / b) ** (1.0 / 3.0))
    head, _ = integrate.quad(
        lambda r: 1.0 / (E * r * r + b * r**5), 1.0, M,
        epsabs=min(atol, 1e-13), epsrel=1e-13, limit=200,
    )
    return head + _tail_series(E, b, M)


def quad_finite(func: Callable[[float], float], lo: float, hi: float, atol: float = 1e-12) -> float:
    val, _ = integrate.quad(func, lo, hi, epsabs=atol, epsrel=1e-13, limit=200)
    return float(val)


# ---------------------------------------------------------------------------


def root_bracketed(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of ``f`` on ``[lo, hi]`` by Brent's bisection-safeguarded secant.

    Endpoint roots are returned exactly.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("root is not bracketed")
    return float(optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


def convolve_sin(G, omega: float, dt: float) -> np.ndarray:
    """Trapezoidal ``int_0^t sin(omega (t - tau)) G(tau) dtau`` on a uniform series.

    Uses sin(w(t - tau)) = sin(wt)cos(w tau) - cos(wt)sin(w tau), so the
    cumulative trapezoid sums cost O(N) and reproduce the direct rule exactly.
    """
    G = np.asarray(G, dtype=float)
    t = dt * np.arange(G.size)
    c = integrate.cumulative_trapezoid(np.cos(omega * t) * G, dx=dt, initial=0.0)
    s = integrate.cumulative_trapezoid(np.sin(omega * t) * G, dx=dt, initial=0.0)
    return np.sin(omega * t) * c - np.cos(omega * t) * s


def check_uniform(t, rtol: float = 1e-9) -> float:
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two samples")
    d = np.diff(t)
    dt = float(d.mean())
    if dt <= 0 or np.max(np.abs(d - dt)) > rtol * max(abs(t[-1]), dt):
        raise ValueError("series is not uniformly sampled")
    return dt


def central_diff4(f: Callable, x, h):
    """Fourth-order central difference of a vectorised ``f``."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def forward_diff4(f: Callable, x, h):
    return (-25 * f(x) + 48 * f(x + h) - 36 * f(x + 2 * h) + 16 * f(x + 3 * h) - 3 * f(x + 4 * h)) / (12 * h)


def sym_eigen(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations.

    Returned in ascending order.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or n > 8:
        raise ValueError("expected a square matrix of size <= 8")
    if not np.allclose(a, a.T, rtol=0, atol=1e-14 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix is not symmetric")
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * 1e-3 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))
