"""Hybrid Hamiltonians ``H(x, p) = H_Q + H_C(x, p) + A x + B p``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quantum_core import SIGMA, is_hermitian

__all__ = ["ClassicalHamiltonian", "HARMONIC", "quartic", "HybridModel"]


@dataclass(frozen=True)
class ClassicalHamiltonian:
    """Scalar Hamilton function with its analytic gradient."""

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    harmonic: bool = False
    name: str = "custom"


HARMONIC = ClassicalHamiltonian(
    value=lambda x, p: 0.5 * (np.asarray(x) ** 2 + np.asarray(p) ** 2),
    gradient=lambda x, p: (np.asarray(x, dtype=float), np.asarray(p, dtype=float)),
    harmonic=True,
    name="harmonic",
)


def quartic(lam: float) -> ClassicalHamiltonian:
    """``(x^2 + p^2)/2 + lam x^4``; outside the regime the first-order equation is exact."""
    return ClassicalHamiltonian(
        value=lambda x, p: 0.5 * (x**2 + p**2) + lam * x**4,
        gradient=lambda x, p: (x + 4 * lam * x**3, np.asarray(p, dtype=float)),
        harmonic=lam == 0,
        name=f"quartic({lam:g})",
    )


def _hermitian(M, name: str, d: int | None = None) -> np.ndarray:
    M = np.array(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {M.shape}")
    if d is not None and M.shape[0] != d:
        raise ValueError(f"{name} has dimension {M.shape[0]}, expected {d}")
    if not is_hermitian(M):
        raise ValueError(f"{name} must be Hermitian")
    M.setflags(write=False)
    return M


@dataclass(frozen=True, eq=False)
class HybridModel:
    """Quantum part ``h_q``, coupling matrices ``a`` (to x) and ``b`` (to p)."""

    h_q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    classical: ClassicalHamiltonian = HARMONIC

    def __post_init__(self):
        h_q = _hermitian(self.h_q, "h_q")
        d = h_q.shape[0]
        object.__setattr__(self, "h_q", h_q)
        object.__setattr__(self, "a", _hermitian(self.a, "a", d))
        object.__setattr__(self, "b", _hermitian(self.b, "b", d))

    @property
    def dim(self) -> int:
        return self.h_q.shape[0]

    @property
    def exact(self) -> bool:
        """True when the first-order hybrid equation is the exact one."""
        return self.classical.harmonic

    @property
    def coupled(self) -> bool:
        return bool(np.any(self.a) or np.any(self.b))

    @property
    def coupling_speed(self) -> float:
        """Largest phase-space drift contributed by the coupling matrices."""
        return float(np.linalg.norm(self.a, 2) + np.linalg.norm(self.b, 2))

    def hamiltonian(self, x, p) -> np.ndarray:
        """Operator field ``H(x, p)`` with shape ``(d, d) + shape(x)``."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        hc = self.classical.value(x, p)
        eye = np.eye(self.dim)
        return (
            np.multiply.outer(eye, hc)
            + np.multiply.outer(self.h_q, np.ones_like(x))
            + np.multiply.outer(self.a, x)
            + np.multiply.outer(self.b, p)
        )

    def gradients(self, x, p) -> tuple[np.ndarray, np.ndarray]:
        """``(dH/dx, dH/dp)`` as operator fields."""
        gx, gp = self.classical.gradient(np.asarray(x, float), np.asarray(p, float))
        eye = np.eye(self.dim)
        ones = np.ones(np.shape(x))
        return (
            np.multiply.outer(eye, gx) + np.multiply.outer(self.a, ones),
            np.multiply.outer(eye, gp) + np.multiply.outer(self.b, ones),
        )

    def with_h_q(self, h_q) -> "HybridModel":
        return HybridModel(h_q, self.a, self.b, self.classical)

    @classmethod
    def spin_oscillator(cls, kappa: float, h_q=None, classical=HARMONIC) -> "HybridModel":
        """Spin coupled to the oscillator momentum, ``H_I = kappa sigma_3 p``."""
        h_q = np.zeros((2, 2)) if h_q is None else h_q
        return cls(h_q, np.zeros((2, 2)), kappa * SIGMA[2], classical)

    @classmethod
    def decoupled(cls, h_q, classical=HARMONIC) -> "HybridModel":
        h_q = np.asarray(h_q, dtype=complex)
        z = np.zeros_like(h_q)
        return cls(h_q, z, z, classical)
