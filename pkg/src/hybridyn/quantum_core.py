"""Dense matrix algebra for the quantum subsystem and the truncated oscillator.

Coherent states follow the Bargmann convention: unnormalized amplitudes
``v_n = z**n / sqrt(n!)`` with ``z = (x + i p)/sqrt(2)``, so ``v_0 = 1``,
``a v = z v`` and

    integral |v><v| exp(-(x**2 + p**2)/2) / (2 pi) dx dp = identity.

With these amplitudes the ket is entire in ``x + i p`` and
``(d/dx - i d/dp) v = sqrt(2) a^dagger v``.  Any global phase convention
gives identical phase-space densities.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "SIGMA",
    "IDENTITY2",
    "commutator",
    "anticommutator",
    "is_hermitian",
    "check_density_matrix",
    "pauli_decompose",
    "pauli_compose",
    "FockBasis",
    "coherent_amplitudes",
    "coherent_amplitude_grid",
    "lift_hamiltonian",
]

HERMITIAN_TOL = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
SIGMA.setflags(write=False)


def _pair(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[-2:] != B.shape[-2:] or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"incompatible matrix shapes {A.shape} and {B.shape}")
    return A, B


def commutator(A, B) -> np.ndarray:
    A, B = _pair(A, B)
    return A @ B - B @ A


def anticommutator(A, B) -> np.ndarray:
    A, B = _pair(A, B)
    return A @ B + B @ A


def is_hermitian(A, tol: float = HERMITIAN_TOL) -> bool:
    A = np.asarray(A)
    return bool(np.max(np.abs(A - A.conj().swapaxes(-1, -2)), initial=0.0) <= tol)


def check_density_matrix(rho, trace_tol: float = 1e-12, eig_tol: float = 1e-10) -> np.ndarray:
    """Return ``rho`` as a complex array or raise if it is not a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise ValueError("density matrix has negative eigenvalues")
    return rho


def pauli_decompose(A) -> tuple[float, np.ndarray]:
    """Split a Hermitian 2x2 matrix as ``A = (a0 I + a . sigma)/2``."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {A.shape}")
    if not is_hermitian(A):
        raise ValueError("pauli_decompose needs a Hermitian matrix")
    a0 = np.trace(A).real
    a = np.einsum("kij,ji->k", SIGMA, A).real
    return float(a0), a


def pauli_compose(a0: float, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a0 * IDENTITY2 + np.einsum("k,kij->ij", a, SIGMA))


@dataclass(frozen=True)
class FockBasis:
    """Number states ``0 .. dim-1`` of one oscillator mode."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock truncation must be an integer >= 2, got {self.dim}")

    @cached_property
    def a(self) -> np.ndarray:
        """Annihilation operator, ``a[n-1, n] = sqrt(n)``."""
        return np.diag(np.sqrt(np.arange(1, self.dim)), 1).astype(complex)

    @cached_property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @cached_property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dim)).astype(complex)

    @cached_property
    def x(self) -> np.ndarray:
        return (self.a + self.adag) / np.sqrt(2)

    @cached_property
    def p(self) -> np.ndarray:
        return (self.a - self.adag) / (1j * np.sqrt(2))

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


def coherent_amplitudes(x: float, p: float, n_fock: int, warn: bool = True) -> np.ndarray:
    """Bargmann amplitudes ``z**n / sqrt(n!)`` of the coherent state at ``(x, p)``.

    Built by the recurrence ``v_n = v_{n-1} z / sqrt(n)`` so large ``n`` never
    forms a factorial.  The eigen-relation residual of the truncated vector is
    ``|z| |v_{n_fock-1}|``; a warning is issued once ``|z|**2 > n_fock/4``.
    """
    FockBasis(n_fock)
    z = (x + 1j * p) / np.sqrt(2)
    if warn and abs(z) ** 2 > n_fock / 4:
        warnings.warn(
            f"|z|^2 = {abs(z)**2:.3g} exceeds n_fock/4 = {n_fock/4:.3g}; "
            "coherent amplitudes are truncated",
            RuntimeWarning,
            stacklevel=2,
        )
    v = np.empty(n_fock, dtype=complex)
    v[0] = 1.0
    for n in range(1, n_fock):
        v[n] = v[n - 1] * z / np.sqrt(n)
    return v


def coherent_amplitude_grid(X: np.ndarray, P: np.ndarray, n_fock: int) -> np.ndarray:
    """Amplitudes for every grid point, shape ``(n_fock,) + X.shape``.

    No truncation warning: projections of states supported on the first
    ``n_fock`` levels are exact whatever ``|z|`` is.
    """
    z = (np.asarray(X) + 1j * np.asarray(P)) / np.sqrt(2)
    v = np.empty((n_fock,) + z.shape, dtype=complex)
    v[0] = 1.0
    for n in range(1, n_fock):
        v[n] = v[n - 1] * z / np.sqrt(n)
    return v


def lift_hamiltonian(model, n_fock: int) -> np.ndarray:
    """Normal-ordered total Hamiltonian on ``Fock(n_fock) (x) Q``.

    ``:(x^2 + p^2)/2:`` is ``a^dagger a`` (the vacuum half drops); the linear
    couplings are already normal ordered.  The oscillator index is the slow
    index of the tensor product.
    """
    if not model.exact:
        raise ValueError(
            "only a harmonic classical Hamiltonian with linear coupling can be lifted"
        )
    fock = FockBasis(n_fock)
    d = model.dim
    H = (
        np.kron(fock.number, np.eye(d))
        + np.kron(fock.identity, model.h_q)
        + np.kron(fock.x, model.a)
        + np.kron(fock.p, model.b)
    )
    return 0.5 * (H + H.conj().T)
