"""Uniform spherical finite-volume grid and MUSCL reconstruction helpers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..relfluid import RadialMesh

NGHOST = 2
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class RadialGrid:
    """``n_cells`` cells of width dr on [0, r_max]; centres r_j = (j + 1/2) dr."""

    n_cells: int = 2048
    r_max: float = 4.0

    def __post_init__(self) -> None:
        if self.n_cells < 8:
            raise ValueError("need at least 8 cells")
        if not self.r_max > 1.0:
            raise ValueError("r_max must exceed the unit support radius")

    @property
    def dr(self) -> float:
        return self.r_max / self.n_cells

    @cached_property
    def faces(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.n_cells + 1)

    @cached_property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    @cached_property
    def areas(self) -> np.ndarray:
        return self.faces**2

    @cached_property
    def volumes(self) -> np.ndarray:
        f = self.faces
        return (f[1:] ** 3 - f[:-1] ** 3) / 3.0

    @cached_property
    def geometric(self) -> np.ndarray:
        """(A_{j+1/2} - A_{j-1/2}) / V_j, the discrete 2/r of the well-balanced source."""
        return np.diff(self.areas) / self.volumes

    @cached_property
    def mesh(self) -> RadialMesh:
        return RadialMesh(self.centers, self.volumes)

    @cached_property
    def face_mesh(self) -> RadialMesh:
        """Faces with trapezoidal r^2 weights (for staggered fields)."""
        w = np.full(self.faces.size, self.dr)
        w[0] = w[-1] = 0.5 * self.dr
        return RadialMesh(self.faces, w * self.faces**2)

    def fits(self, eta: float, t_end: float, margin: float = 0.25) -> bool:
        return self.r_max >= 1.0 + eta * t_end + margin

    def cell_average(self, func) -> np.ndarray:
        """r^2-weighted cell averages of a vectorised ``func(r) -> array(..., m)``.

        5-point Gauss-Legendre per cell; exact for polynomials of degree <= 7 in r.
        """
        lo, hi = self.faces[:-1], self.faces[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        r = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = np.asarray(func(r))
        wts = half[:, None] * _GL_W[None, :] * r**2
        return np.sum(vals * wts, axis=-1) / self.volumes


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def extend(w: np.ndarray, background, odd: tuple[int, ...]) -> np.ndarray:
    """Pad primitive rows with two ghosts per side.

    Inner ghosts mirror across r = 0 (rows in ``odd`` change sign); outer ghosts
    hold the background values.
    """
    m, n = w.shape
    ext = np.empty((m, n + 2 * NGHOST))
    ext[:, NGHOST:-NGHOST] = w
    ext[:, 1] = w[:, 0]
    ext[:, 0] = w[:, 1]
    for k in odd:
        ext[k, :NGHOST] *= -1.0
    ext[:, -NGHOST:] = np.asarray(background, dtype=float)[:, None]
    return ext


def muscl_faces(ext: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minmod-limited left/right states at the n + 1 faces of the interior cells."""
    d = np.diff(ext, axis=1)
    slope = minmod(d[:, :-1], d[:, 1:])  # ext cells 1 .. n + 2
    left = ext[:, 1:-2] + 0.5 * slope[:, :-1]
    right = ext[:, 2:-1] - 0.5 * slope[:, 1:]
    return left, right
