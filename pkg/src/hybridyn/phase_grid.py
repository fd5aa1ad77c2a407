"""Uniform phase-space grid and scalar-field calculus.

The grid is cell-centered: ``x_i = -L + (i + 1/2) h`` with ``h = 2L/N``, the
same convention on both axes.  No node sits on the periodic seam at ``+-L``
and the coordinate arrays are exactly antisymmetric about zero.

Fields are plain ``numpy`` arrays whose *last two* axes are ``(x, p)``;
leading axes (matrix indices, stacked components) are carried along, so the
same routines differentiate scalar fields and operator-valued fields.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "PhaseGrid",
    "make_grid",
    "differentiate",
    "gradient",
    "poisson_bracket",
    "integrate",
    "METHODS",
]

METHODS = ("spectral", "fd4")

_FFT_WORKERS = 4


@dataclass(frozen=True)
class PhaseGrid:
    """Square ``N x N`` grid on ``[-L, L]^2`` with a global derivative method."""

    L: float
    N: int
    method: str = "spectral"

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError(f"half width L must be positive, got {self.L}")
        if int(self.N) != self.N or self.N % 2 or self.N < 16:
            raise ValueError(f"points_per_axis N must be an even integer >= 16, got {self.N}")
        if self.method not in METHODS:
            raise ValueError(f"unknown derivative method {self.method!r}; choose from {METHODS}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def axis(self) -> np.ndarray:
        """Cell-centered coordinates shared by the x and p axes."""
        a = -self.L + (np.arange(self.N) + 0.5) * self.h
        a.setflags(write=False)
        return a

    @property
    def x(self) -> np.ndarray:
        return self.axis

    @property
    def p(self) -> np.ndarray:
        return self.axis

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X, P)`` coordinate fields, indexing ``[i, j] -> (x_i, p_j)``."""
        X, P = np.meshgrid(self.axis, self.axis, indexing="ij")
        X.setflags(write=False)
        P.setflags(write=False)
        return X, P

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)
        k.setflags(write=False)
        return k

    @cached_property
    def ik(self) -> np.ndarray:
        """Spectral derivative multipliers ``i k`` with the Nyquist mode zeroed."""
        ik = 1j * self.wavenumbers
        ik[self.N // 2] = 0.0
        ik.setflags(write=False)
        return ik

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    def with_method(self, method: str) -> "PhaseGrid":
        return PhaseGrid(self.L, self.N, method)

    def padded(self, pad: float) -> "PhaseGrid":
        """Larger grid with identical spacing whose centre block is this grid.

        ``pad`` is rounded up to a whole number of cells.
        """
        extra = int(np.ceil(pad / self.h - 1e-9))
        return PhaseGrid(self.L + extra * self.h, self.N + 2 * extra, self.method)

    def pad_cells(self, outer: "PhaseGrid") -> int:
        off = (outer.N - self.N) // 2
        if outer.N < self.N or not np.isclose(outer.h, self.h) or not np.allclose(
            outer.axis[off:off + self.N], self.axis
        ):
            raise ValueError("grid is not a centred sub-grid of the padded grid")
        return off

    def nearest_index(self, x: float, p: float) -> tuple[int, int]:
        i = int(np.clip(np.round((x + self.L) / self.h - 0.5), 0, self.N - 1))
        j = int(np.clip(np.round((p + self.L) / self.h - 0.5), 0, self.N - 1))
        return i, j

    def check(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        if f.shape[-2:] != self.shape:
            raise ValueError(f"field shape {f.shape} does not match grid {self.shape}")
        return f


def make_grid(L: float, N: int, method: str = "spectral") -> PhaseGrid:
    return PhaseGrid(L, N, method)


def _fd4(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (
        -np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis) - 8 * np.roll(f, 1, axis) + np.roll(f, 2, axis)
    ) / (12 * h)


def differentiate(grid: PhaseGrid, f: np.ndarray, axis: str) -> np.ndarray:
    """Partial derivative of ``f`` along ``'x'`` or ``'p'`` with periodic wrap.

    Real input gives real output.
    """
    f = grid.check(f)
    if axis not in ("x", "p"):
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    ax = f.ndim - 2 if axis == "x" else f.ndim - 1
    if grid.method == "fd4":
        return _fd4(f, ax, grid.h)
    shape = [1] * f.ndim
    if np.isrealobj(f):
        kr = 2 * np.pi * np.fft.rfftfreq(grid.N, d=grid.h)
        kr[-1] = 0.0  # unpaired Nyquist mode carries no derivative
        shape[ax] = kr.size
        F = sfft.rfft(f, axis=ax, workers=_FFT_WORKERS)
        return sfft.irfft(1j * kr.reshape(shape) * F, n=grid.N, axis=ax, workers=_FFT_WORKERS)
    shape[ax] = grid.N
    F = sfft.fft(f, axis=ax, workers=_FFT_WORKERS)
    return sfft.ifft(grid.ik.reshape(shape) * F, axis=ax, workers=_FFT_WORKERS)


def gradient(grid: PhaseGrid, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return differentiate(grid, f, "x"), differentiate(grid, f, "p")


def poisson_bracket(grid: PhaseGrid, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``{f, g} = df/dx dg/dp - df/dp dg/dx`` for scalar fields."""
    f = grid.check(f)
    g = grid.check(g)
    if f.shape != g.shape:
        raise ValueError(f"field shapes differ: {f.shape} vs {g.shape}")
    fx, fp = gradient(grid, f)
    gx, gp = gradient(grid, g)
    return fx * gp - fp * gx


def integrate(grid: PhaseGrid, f: np.ndarray):
    """Midpoint-rule integral over the last two axes (fixed summation order)."""
    f = grid.check(f)
    return f.sum(axis=(-2, -1)) * grid.h**2
