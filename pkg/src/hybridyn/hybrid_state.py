"""Operator-valued phase-space densities and their marginals.

A :class:`HybridDensity` stores the full density ``rho(x, p)`` (Gaussian
weight included) as an array of shape ``(d, d, N, N)``: every matrix entry is
a complex scalar field on the grid.  For ``d = 2`` the Pauli fields
``a_mu = tr(sigma_mu rho)`` give ``rho = (a0 I + a . sigma)/2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .phase_grid import PhaseGrid, integrate
from .quantum_core import SIGMA

__all__ = [
    "WEIGHT_FLOOR",
    "POSITIVITY_EPS",
    "UndefinedConditionalError",
    "HybridDensity",
    "ConditionalState",
    "PolarizationReport",
    "BargmannDyad",
    "gaussian_weight",
    "classical_marginal",
    "quantum_marginal",
    "conditional_state",
    "polarization_field",
    "from_bargmann_dyad",
    "dyad_factor_fields",
]

WEIGHT_FLOOR = 1e-12
POSITIVITY_EPS = 1e-9


class UndefinedConditionalError(ValueError):
    """The classical weight at the requested point is below the floor."""


def gaussian_weight(grid: PhaseGrid) -> np.ndarray:
    """Standard pointer density ``exp(-(x^2 + p^2)/2) / (2 pi)``."""
    X, P = grid.mesh
    return np.exp(-0.5 * (X**2 + P**2)) / (2 * np.pi)


@dataclass(frozen=True, eq=False)
class HybridDensity:
    grid: PhaseGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 4 or v.shape[0] != v.shape[1] or v.shape[2:] != self.grid.shape:
            raise ValueError(
                f"values must have shape (d, d, {self.grid.N}, {self.grid.N}), got {v.shape}"
            )
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def with_values(self, values, time: float | None = None) -> "HybridDensity":
        return HybridDensity(self.grid, values, self.time if time is None else time)

    @classmethod
    def product(cls, grid: PhaseGrid, rho_c, rho_q, time: float = 0.0) -> "HybridDensity":
        """Uncorrelated state ``rho_c(x, p) rho_q``."""
        rho_c = grid.check(rho_c)
        rho_q = np.asarray(rho_q, dtype=complex)
        return cls(grid, np.multiply.outer(rho_q, rho_c), time)

    @classmethod
    def from_pauli_fields(cls, grid: PhaseGrid, a, time: float = 0.0) -> "HybridDensity":
        a = np.asarray(a, dtype=float)
        if a.shape != (4,) + grid.shape:
            raise ValueError(f"Pauli fields must have shape (4, N, N), got {a.shape}")
        values = 0.5 * (
            np.multiply.outer(np.eye(2), a[0]) + np.einsum("kij,kxy->ijxy", SIGMA, a[1:])
        )
        return cls(grid, values, time)

    def pauli_fields(self) -> np.ndarray:
        """``(a0, a1, a2, a3)`` real fields; only for ``d = 2``."""
        if self.dim != 2:
            raise ValueError("Pauli fields exist only for a two-level quantum system")
        r = self.values
        return np.stack(
            [
                (r[0, 0] + r[1, 1]).real,
                2 * r[0, 1].real,
                -2 * r[0, 1].imag,
                (r[0, 0] - r[1, 1]).real,
            ]
        )

    def matrix_at(self, i: int, j: int) -> np.ndarray:
        return self.values[:, :, i, j].copy()

    def trace_field(self) -> np.ndarray:
        return np.einsum("iixy->xy", self.values).real

    def total_norm(self) -> float:
        return float(integrate(self.grid, self.trace_field()))

    def hermitian_defect(self) -> float:
        v = self.values
        return float(np.max(np.abs(v - v.conj().transpose(1, 0, 2, 3))))

    def eigenvalue_fields(self) -> np.ndarray:
        """Pointwise eigenvalues, ascending, shape ``(d, N, N)``."""
        if self.dim == 2:
            a = self.pauli_fields()
            r = np.sqrt(a[1] ** 2 + a[2] ** 2 + a[3] ** 2)
            return 0.5 * np.stack([a[0] - r, a[0] + r])
        m = self.values.transpose(2, 3, 0, 1)
        m = 0.5 * (m + m.conj().swapaxes(-1, -2))
        return np.moveaxis(np.linalg.eigvalsh(m), -1, 0)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalue_fields()[0].min())

    def is_positive(self, eps: float = POSITIVITY_EPS) -> bool:
        return self.min_eigenvalue() >= -eps


@dataclass(frozen=True)
class ConditionalState:
    x: float
    p: float
    matrix: np.ndarray
    weight: float


@dataclass(frozen=True)
class PolarizationReport:
    s: np.ndarray  # (3, N, N), NaN where masked
    mask: np.ndarray
    max_norm: float
    argmax: tuple[float, float]


def classical_marginal(rho: HybridDensity) -> np.ndarray:
    return rho.trace_field()


def quantum_marginal(rho: HybridDensity) -> np.ndarray:
    """Unconditional quantum state, the phase-space integral of ``rho``."""
    return integrate(rho.grid, rho.values)


def conditional_state(
    rho: HybridDensity, x: float, p: float, floor: float = WEIGHT_FLOOR
) -> ConditionalState:
    """Normalized quantum state at the grid node nearest to ``(x, p)``."""
    i, j = rho.grid.nearest_index(x, p)
    m = rho.matrix_at(i, j)
    w = float(np.trace(m).real)
    xi, pj = rho.grid.axis[i], rho.grid.axis[j]
    if w <= floor:
        raise UndefinedConditionalError(
            f"classical weight {w:.3e} at ({xi:.4g}, {pj:.4g}) is below the floor {floor:g}"
        )
    return ConditionalState(float(xi), float(pj), m / w, w)


def polarization_field(rho: HybridDensity, floor: float = WEIGHT_FLOOR) -> PolarizationReport:
    """Bloch vector of the conditional spin state where ``a0 > floor``."""
    a = rho.pauli_fields()
    mask = a[0] > floor
    s = np.full((3,) + rho.grid.shape, np.nan)
    s[:, mask] = a[1:, mask] / a[0, mask]
    norm = np.sqrt(np.sum(s**2, axis=0))
    if not mask.any():
        return PolarizationReport(s, mask, float("nan"), (float("nan"), float("nan")))
    k = np.nanargmax(norm)
    i, j = np.unravel_index(k, norm.shape)
    return PolarizationReport(
        s, mask, float(norm[i, j]), (float(rho.grid.axis[i]), float(rho.grid.axis[j]))
    )


@dataclass(frozen=True, eq=False)
class BargmannDyad:
    """Polynomial vectors ``phi_n(w) = sum_k coeffs[n, k] w**k`` with ``w = x - i p``.

    The density they describe is
    ``exp(-(x^2 + p^2)/2) / (2 pi) * sum_n phi_n(w) phi_n(w)^dagger``.
    """

    coeffs: np.ndarray  # (n_terms, degree + 1, d)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[0] == 0 or c.shape[1] == 0:
            raise ValueError("a dyad needs at least one polynomial term with coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_terms(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[2]

    @classmethod
    def constant(cls, *vectors) -> "BargmannDyad":
        """One degree-0 term per vector (an uncorrelated vacuum pointer)."""
        return cls(np.array([[np.asarray(v, dtype=complex)] for v in vectors]))

    def evaluate(self, w) -> np.ndarray:
        """``phi_n(w)`` with shape ``(n_terms, d) + shape(w)``, by Horner's rule."""
        w = np.asarray(w)
        out = np.zeros((self.n_terms, self.dim) + w.shape, dtype=complex)
        for k in range(self.degree, -1, -1):
            out = out * w + self.coeffs[:, k, :].reshape(self.n_terms, self.dim, *([1] * w.ndim))
        return out

    def norm(self) -> float:
        """Total trace of the described density, ``sum |c_nk|^2 2^k k!``."""
        k = np.arange(self.degree + 1)
        weights = np.array([2.0**j * factorial(j) for j in k])
        return float(np.sum(np.abs(self.coeffs) ** 2 * weights[None, :, None]))

    def normalized(self) -> "BargmannDyad":
        return BargmannDyad(self.coeffs / np.sqrt(self.norm()))


def dyad_factor_fields(dyad: BargmannDyad, grid: PhaseGrid) -> np.ndarray:
    """Half-weighted factors ``sqrt(G) phi_n(w)``, shape ``(n_terms, d, N, N)``.

    ``rho = sum_n psi_n psi_n^dagger`` for these factors.
    """
    X, P = grid.mesh
    half = np.exp(-0.25 * (X**2 + P**2)) / np.sqrt(2 * np.pi)
    return dyad.evaluate(X - 1j * P) * half


def density_from_factors(grid: PhaseGrid, psi: np.ndarray, time: float = 0.0) -> HybridDensity:
    return HybridDensity(grid, np.einsum("nixy,njxy->ijxy", psi, psi.conj()), time)


def from_bargmann_dyad(
    dyad: BargmannDyad, grid: PhaseGrid, normalize: bool = True
) -> HybridDensity:
    """Positive hybrid density built from a dyad; normalized analytically if asked."""
    if normalize:
        dyad = dyad.normalized()
    return density_from_factors(grid, dyad_factor_fields(dyad, grid))
