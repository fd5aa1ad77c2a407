"""Impulsive sigma_3 measurement of a spin by an oscillator pointer.

Replacing the coupling ``kappa sigma_3 p`` by ``g delta(t) sigma_3 p`` gives a
closed-form kick: the ``|+><+|`` block of the hybrid density moves to
``x -> x + g``, the ``|-><-|`` block to ``x -> x - g`` and the coherence
``|+><-|`` is multiplied by ``exp(-g^2/2 - i g p)``.  The coherence factor
is exact for coherences of the form ``f(x) exp(-p^2/2)``, which covers every
uncorrelated start with the standard Gaussian pointer.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import erfc

from .hybrid_state import (
    BargmannDyad,
    HybridDensity,
    classical_marginal,
    conditional_state,
    gaussian_weight,
)
from .oracle import FullQuantumState, dyad_preimage, husimi_project
from .phase_grid import PhaseGrid
from .quantum_core import SIGMA, FockBasis

__all__ = [
    "EDGE_MARGIN",
    "CollapseConfig",
    "PointerStatistics",
    "CollapseReport",
    "kicked_grid",
    "impulsive_kick",
    "oracle_kick",
    "pointer_statistics",
    "collapse_fidelity",
    "pointer_maxima",
]

EDGE_MARGIN = 5.0
MIN_HALF_WIDTH = 12.0
DEFAULT_SPACING = 0.125


@dataclass(frozen=True)
class CollapseConfig:
    """Spin amplitudes and kick strength; the pointer starts in the standard Gaussian."""

    c_plus: complex
    c_minus: complex
    g: float = 5.0
    n_fock: int = 64

    def __post_init__(self):
        n = abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2
        if abs(n - 1) > 1e-12:
            raise ValueError(f"|c+|^2 + |c-|^2 = {n!r}, expected 1")
        if abs(self.g) < 3:
            warnings.warn(
                f"g = {self.g:g} is outside the strong-kick regime (g >= 3); "
                "pointer branches overlap",
                RuntimeWarning,
                stacklevel=2,
            )

    @classmethod
    def from_probability(cls, c_plus_sq: float, g: float = 5.0, n_fock: int = 64):
        if not 0 <= c_plus_sq <= 1:
            raise ValueError("|c+|^2 must lie in [0, 1]")
        return cls(np.sqrt(c_plus_sq), np.sqrt(1 - c_plus_sq), g, n_fock)

    @property
    def spinor(self) -> np.ndarray:
        return np.array([self.c_plus, self.c_minus], dtype=complex)

    def grid(self, spacing: float = DEFAULT_SPACING) -> PhaseGrid:
        return kicked_grid(self.g, spacing)

    def initial_state(self, grid: PhaseGrid) -> HybridDensity:
        psi = self.spinor
        return HybridDensity.product(grid, gaussian_weight(grid), np.outer(psi, psi.conj()))

    def preimage(self) -> FullQuantumState:
        return dyad_preimage(BargmannDyad.constant(self.spinor), self.n_fock)


def kicked_grid(g: float, spacing: float = DEFAULT_SPACING) -> PhaseGrid:
    """Smallest grid of the given spacing with ``L >= max(12, |g| + 5)``."""
    L = max(MIN_HALF_WIDTH, abs(g) + EDGE_MARGIN)
    N = 2 * int(np.ceil(L / spacing - 1e-9))
    return PhaseGrid(N * spacing / 2, N)


def _shift_x(grid: PhaseGrid, f: np.ndarray, shift: float) -> np.ndarray:
    """``f(x - shift, p)`` with zeros shifted in from outside the grid.

    Whole-cell shifts are exact slices; otherwise a Fourier shift on a
    zero-padded copy, so nothing wraps around the periodic box.
    """
    cells = shift / grid.h
    n = grid.N
    if np.isclose(cells, round(cells), atol=1e-9):
        k = int(round(cells))
        out = np.zeros_like(f)
        if abs(k) < n:
            if k >= 0:
                out[..., k:, :] = f[..., : n - k, :]
            else:
                out[..., :k, :] = f[..., -k:, :]
        return out
    pad = int(np.ceil(abs(cells))) + 1
    width = [(0, 0)] * (f.ndim - 2) + [(pad, pad), (0, 0)]
    fp = np.pad(f, width)
    m = fp.shape[-2]
    k = 2 * np.pi * np.fft.fftfreq(m, grid.h)
    phase = np.exp(-1j * k * shift)
    if m % 2 == 0:
        phase[m // 2] = np.cos(k[m // 2] * shift)
    out = np.fft.ifft(np.fft.fft(fp, axis=-2) * phase[:, None], axis=-2)[..., pad : pad + n, :]
    return out.real if np.isrealobj(f) else out


def impulsive_kick(rho0: HybridDensity, g: float, coherence_tol: float = 1e-12) -> HybridDensity:
    """Closed-form delta kick of strength ``g`` for the ``sigma_3 p`` coupling.

    Raises ``ValueError`` when the grid is narrower than ``|g| + 5`` or the
    coherence is not of the form ``f(x) exp(-p^2/2)``.
    """
    if rho0.dim != 2:
        raise ValueError("the sigma_3 kick acts on a two-level system")
    grid = rho0.grid
    if grid.L < abs(g) + EDGE_MARGIN:
        raise ValueError(
            f"grid half width {grid.L:g} is below |g| + {EDGE_MARGIN:g} = {abs(g) + EDGE_MARGIN:g}"
        )
    v = rho0.values
    coh = v[0, 1]
    X, P = grid.mesh
    gauss_p = np.exp(-0.5 * P**2)
    j0 = int(np.argmax(gauss_p[0]))
    f = coh[:, j0] / gauss_p[0, j0]
    if np.max(np.abs(coh - f[:, None] * gauss_p)) > coherence_tol * max(1.0, np.abs(coh).max()):
        raise ValueError(
            "closed-form kick needs a coherence of the form f(x) exp(-p^2/2); "
            "use oracle_kick for correlated states"
        )
    out = np.empty_like(v)
    out[0, 0] = _shift_x(grid, v[0, 0], g)
    out[1, 1] = _shift_x(grid, v[1, 1], -g)
    out[0, 1] = coh * np.exp(-0.5 * g**2 - 1j * g * P)
    out[1, 0] = out[0, 1].conj()
    return rho0.with_values(out)


def oracle_kick(state: FullQuantumState, g: float, grid: PhaseGrid) -> HybridDensity:
    """Apply ``exp(-i g p (x) sigma_3)`` in the truncated Fock space, then project."""
    if state.dim != 2:
        raise ValueError("the sigma_3 kick acts on a two-level system")
    fock = FockBasis(state.n_fock)
    H = np.kron(fock.p, SIGMA[2])
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(-1j * g * w)) @ V.conj().T
    m = U @ state.matrix @ U.conj().T
    return husimi_project(FullQuantumState(0.5 * (m + m.conj().T), state.n_fock, 2), grid)


@dataclass(frozen=True)
class PointerStatistics:
    p_plus: float
    p_minus: float
    overlap_bound: float


def pointer_statistics(rho: HybridDensity, g: float | None = None) -> PointerStatistics:
    """Pointer probabilities on either side of ``x = 0``.

    ``overlap_bound`` is the unit-Gaussian tail mass beyond distance ``|g|``,
    the most either branch can leak across the origin (NaN without ``g``).
    """
    rc = classical_marginal(rho)
    h2 = rho.grid.h ** 2
    right = rho.grid.axis > 0
    p_plus = float(rc[right].sum() * h2)
    p_minus = float(rc[~right].sum() * h2)
    bound = float("nan") if g is None else float(0.5 * erfc(abs(g) / np.sqrt(2)))
    return PointerStatistics(p_plus, p_minus, bound)


@dataclass(frozen=True)
class CollapseReport:
    fidelity_plus: float
    fidelity_minus: float
    probe_plus: tuple[float, float]
    probe_minus: tuple[float, float]
    damping_ratio: float
    analytic_damping: float


def collapse_fidelity(
    rho: HybridDensity, g: float, reference: HybridDensity | None = None
) -> CollapseReport:
    """Conditional populations at the grid nodes nearest ``(+g, 0)`` and ``(-g, 0)``.

    With the pre-kick ``reference`` the coherence damping ``max|rho_+-|`` ratio
    is also measured; otherwise it is NaN.
    """
    cp = conditional_state(rho, g, 0.0)
    cm = conditional_state(rho, -g, 0.0)
    ratio = float("nan")
    if reference is not None:
        ratio = float(np.abs(rho.values[0, 1]).max() / np.abs(reference.values[0, 1]).max())
    return CollapseReport(
        float(cp.matrix[0, 0].real),
        float(cm.matrix[1, 1].real),
        (cp.x, cp.p),
        (cm.x, cm.p),
        ratio,
        float(np.exp(-0.5 * g**2)),
    )


def pointer_maxima(rho: HybridDensity, rel_height: float = 1e-3) -> list[tuple[float, float]]:
    """Local maxima of the classical marginal above ``rel_height * max``.

    Adjacent nodes of equal height (a peak centred between nodes) count once,
    at their centroid.
    """
    rc = classical_marginal(rho)
    top = np.isclose(ndimage.maximum_filter(rc, size=3, mode="wrap"), rc, rtol=1e-12, atol=0)
    top &= rc > rel_height * rc.max()
    labels, n = ndimage.label(top, structure=np.ones((3, 3)))
    a, h = rho.grid.axis, rho.grid.h
    centres = ndimage.center_of_mass(top, labels, range(1, n + 1))
    return [(float(a[0] + i * h), float(a[0] + j * h)) for i, j in centres]
