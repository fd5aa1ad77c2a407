"""Fully quantized reference dynamics on ``Fock(n_fock) (x) Q``.

The oscillator index is the slow one in every tensor product: the composite
basis vector ``|n> (x) |i>`` sits at position ``n * d + i``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import ceil, factorial

import numpy as np

from .evolvers import Trajectory, evolve_dyad, rk4_evolve
from .hybrid_state import BargmannDyad, HybridDensity, from_bargmann_dyad, gaussian_weight
from .model import HybridModel
from .phase_grid import PhaseGrid, integrate
from .quantum_core import coherent_amplitude_grid, is_hermitian, lift_hamiltonian

__all__ = [
    "TAIL_TOL",
    "TruncationWarning",
    "FullQuantumState",
    "von_neumann_evolve",
    "husimi_project",
    "dyad_preimage",
    "OracleReport",
    "oracle_compare",
    "convergence_study",
]

TAIL_TOL = 1e-8


class TruncationWarning(RuntimeWarning):
    """Fock-space population close to the truncation edge."""


@dataclass(frozen=True, eq=False)
class FullQuantumState:
    matrix: np.ndarray
    n_fock: int
    dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.n_fock * self.dim
        if m.shape != (n, n):
            raise ValueError(f"expected a ({n}, {n}) matrix for n_fock={self.n_fock}, d={self.dim}")
        if not is_hermitian(m, 1e-10):
            raise ValueError("full quantum state is not Hermitian")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, psi, n_fock: int, dim: int) -> "FullQuantumState":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), n_fock, dim)

    @property
    def blocks(self) -> np.ndarray:
        """View with indices ``[m, i, n, j]``."""
        return self.matrix.reshape(self.n_fock, self.dim, self.n_fock, self.dim)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def fock_populations(self) -> np.ndarray:
        return np.einsum("nini->n", self.blocks).real

    def tail_mass(self) -> float:
        """Population on levels ``>= 0.9 n_fock``."""
        return float(self.fock_populations()[ceil(0.9 * self.n_fock):].sum())

    def healthy(self, tol: float = TAIL_TOL) -> bool:
        return self.tail_mass() < tol

    def check(self, trace_tol: float = 1e-12, eig_tol: float = 1e-10):
        """Raise if the state is not a unit-trace positive operator."""
        if abs(self.trace() - 1) > trace_tol:
            raise ValueError(f"trace {self.trace()!r} differs from 1")
        if np.linalg.eigvalsh(self.matrix).min() < -eig_tol:
            raise ValueError("state has negative eigenvalues")
        return self


def von_neumann_evolve(rho0: FullQuantumState, H, t: float) -> FullQuantumState:
    """``exp(-iHt) rho0 exp(iHt)`` through the eigendecomposition of ``H``."""
    H = np.asarray(H, dtype=complex)
    if H.shape != rho0.matrix.shape:
        raise ValueError(f"Hamiltonian shape {H.shape} does not match state {rho0.matrix.shape}")
    if not is_hermitian(H):
        raise ValueError("Hamiltonian is not Hermitian")
    w, V = np.linalg.eigh(H)
    U = (V * np.exp(-1j * w * t)) @ V.conj().T
    m = U @ rho0.matrix @ U.conj().T
    return FullQuantumState(0.5 * (m + m.conj().T), rho0.n_fock, rho0.dim)


def husimi_project(rho: FullQuantumState, grid: PhaseGrid, time: float = 0.0) -> HybridDensity:
    """Coherent-state diagonal in the oscillator factor, times the Gaussian weight.

    Warns with :class:`TruncationWarning` when the Fock tail is not negligible.
    """
    tail = rho.tail_mass()
    if tail >= TAIL_TOL:
        warnings.warn(
            f"Fock tail mass {tail:.3e} above level {ceil(0.9 * rho.n_fock)} "
            f"(n_fock={rho.n_fock}) exceeds {TAIL_TOL:g}",
            TruncationWarning,
            stacklevel=2,
        )
    X, P = grid.mesh
    v = coherent_amplitude_grid(X, P, rho.n_fock)
    half = np.einsum("mxy,minj->injxy", v.conj(), rho.blocks)
    out = np.einsum("injxy,nxy->ijxy", half, v) * gaussian_weight(grid)
    return HybridDensity(grid, out, time)


def dyad_preimage(dyad: BargmannDyad, n_fock: int, normalize: bool = True) -> FullQuantumState:
    """Full quantum state whose projection is the dyad density.

    The monomial ``w**k`` of each polynomial term carries the level-``k``
    amplitude ``c_k 2**(k/2) sqrt(k!)``; the terms are mixed incoherently.
    """
    if dyad.degree >= n_fock:
        raise ValueError(f"dyad degree {dyad.degree} needs n_fock > {dyad.degree}")
    if normalize:
        dyad = dyad.normalized()
    k = np.arange(dyad.degree + 1)
    scale = np.array([np.sqrt(2.0**j * factorial(j)) for j in k])
    d = dyad.dim
    m = np.zeros((n_fock * d, n_fock * d), dtype=complex)
    for c in dyad.coeffs:
        psi = np.zeros((n_fock, d), dtype=complex)
        psi[: k.size] = c * scale[:, None]
        psi = psi.ravel()
        m += np.outer(psi, psi.conj())
    return FullQuantumState(m, n_fock, d)


@dataclass
class OracleReport:
    times: np.ndarray
    linf: np.ndarray  # (T, d, d)
    l2: np.ndarray  # (T, d, d)
    tail_mass: np.ndarray
    method: str
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def max_linf(self) -> float:
        return float(self.linf.max())

    @property
    def final_linf(self) -> float:
        return float(self.linf[-1].max())

    def rows(self) -> list[list[float]]:
        """``[time, linf_00, linf_01, ..., l2_00, l2_01, ...]`` per sample."""
        T = len(self.times)
        return np.column_stack(
            [self.times, self.linf.reshape(T, -1), self.l2.reshape(T, -1)]
        ).tolist()

    def header(self) -> list[str]:
        d = self.linf.shape[1]
        comps = [f"{i}{j}" for i in range(d) for j in range(d)]
        return ["time"] + [f"linf_{c}" for c in comps] + [f"l2_{c}" for c in comps]


def oracle_compare(
    model: HybridModel,
    dyad: BargmannDyad,
    grid: PhaseGrid,
    t: float,
    n_fock: int = 40,
    dt: float = 1e-3,
    sample_times=None,
    method: str = "direct",
    pad: float = 4.0,
) -> OracleReport:
    """Distance between the hybrid evolution and the projected quantum one.

    ``method='direct'`` steps ``rho`` itself with the first-order hybrid
    right-hand side; ``method='factored'`` uses :func:`evolve_dyad`.
    """
    if not model.exact:
        raise ValueError("oracle comparison needs a harmonic H_C with linear coupling")
    if dyad.dim != model.dim:
        raise ValueError("dyad and model dimensions differ")
    times = [t] if sample_times is None else sorted({*sample_times, t})
    if method == "direct":
        traj = rk4_evolve(
            from_bargmann_dyad(dyad, grid), model, t, dt, rhs="hybrid",
            sample_times=times, diag_every=max(1, int(round(0.1 / dt))),
        )
    elif method == "factored":
        traj = evolve_dyad(
            dyad, grid, model, t, dt, sample_times=times, pad=pad,
            diag_every=max(1, int(round(0.1 / dt))),
        )
    else:
        raise ValueError(f"unknown method {method!r}")

    rho0 = dyad_preimage(dyad, n_fock)
    H = lift_hamiltonian(model, n_fock)
    linf, l2, tails = [], [], []
    for ts, state in zip(traj.times, traj.states):
        ref_q = von_neumann_evolve(rho0, H, ts)
        tails.append(ref_q.tail_mass())
        diff = state.values - husimi_project(ref_q, grid, ts).values
        linf.append(np.abs(diff).max(axis=(-2, -1)))
        l2.append(np.sqrt(integrate(grid, np.abs(diff) ** 2)))
    return OracleReport(
        np.asarray(traj.times), np.asarray(linf), np.asarray(l2), np.asarray(tails), method, traj
    )


def convergence_study(
    model: HybridModel,
    dyad: BargmannDyad,
    t: float,
    L: float,
    points: list[int],
    dts: list[float],
    n_fock: int = 40,
) -> list[tuple[int, float, float]]:
    """Final-time L-infinity error for every ``(N, dt)`` pair, in input order."""
    out = []
    for N in points:
        for dt in dts:
            r = oracle_compare(model, dyad, PhaseGrid(L, N), t, n_fock, dt)
            out.append((N, dt, r.final_linf))
    return out
