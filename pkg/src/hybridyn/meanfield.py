"""Mean-field (Ehrenfest) dynamics with sharp classical coordinates.

The classical point moves in the effective Hamilton function
``H_MF(x, p) = tr[H(x, p) rho_Q]`` while ``rho_Q`` follows the von Neumann
equation with ``H(x_t, p_t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolvers import NumericalInstabilityError, _step_plan
from .model import HybridModel
from .quantum_core import check_density_matrix

__all__ = ["MeanFieldState", "MeanFieldTrajectory", "meanfield_evolve", "meanfield_kick"]


@dataclass(frozen=True, eq=False)
class MeanFieldState:
    x: float
    p: float
    rho_q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho_q", check_density_matrix(self.rho_q, 1e-12, 1e-9))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def pure(cls, x: float, p: float, psi) -> "MeanFieldState":
        psi = np.asarray(psi, dtype=complex)
        return cls(x, p, np.outer(psi, psi.conj()))


@dataclass
class MeanFieldTrajectory:
    """Every RK4 step is kept; the system is tiny."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    rho_q: np.ndarray  # (steps, d, d)

    def state(self, k: int = -1) -> MeanFieldState:
        return MeanFieldState(self.x[k], self.p[k], self.rho_q[k])

    def positions_at(self, times) -> tuple[np.ndarray, np.ndarray]:
        times = np.asarray(times, dtype=float)
        return np.interp(times, self.t, self.x), np.interp(times, self.t, self.p)


def _rhs(model: HybridModel, x: float, p: float, r: np.ndarray):
    gx, gp = model.classical.gradient(np.float64(x), np.float64(p))
    h = model.h_q + model.a * x + model.b * p
    dr = -1j * (h @ r - r @ h)
    dx = float(gp) + np.trace(model.b @ r).real
    dp = -float(gx) - np.trace(model.a @ r).real
    return dx, dp, dr


def meanfield_evolve(
    s0: MeanFieldState, model: HybridModel, t_final: float, dt: float = 1e-3, trace_tol: float = 1e-3
) -> MeanFieldTrajectory:
    """Classic RK4 for ``(x, p, rho_Q)``; ``H_MF`` is re-evaluated at every stage.

    An unstable step inflates the purity ``tr rho_Q^2`` past 1 (the trace itself
    is conserved by any RK step), so both are watched.
    """
    if s0.rho_q.shape[0] != model.dim:
        raise ValueError("quantum dimension does not match the model")
    _, segments = _step_plan(t_final, dt, None)
    (n, h), = segments
    x, p, r = s0.x, s0.p, s0.rho_q.copy()
    ts, xs, ps, rs = [0.0], [x], [p], [r]
    for k in range(n):
        k1 = _rhs(model, x, p, r)
        k2 = _rhs(model, x + 0.5 * h * k1[0], p + 0.5 * h * k1[1], r + 0.5 * h * k1[2])
        k3 = _rhs(model, x + 0.5 * h * k2[0], p + 0.5 * h * k2[1], r + 0.5 * h * k2[2])
        k4 = _rhs(model, x + h * k3[0], p + h * k3[1], r + h * k3[2])
        x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        r = r + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        tr = np.trace(r).real
        purity = np.vdot(r, r).real
        if not (np.isfinite(x) and np.isfinite(p)) or abs(tr - 1) > trace_tol or purity > 1 + trace_tol:
            raise NumericalInstabilityError(f"mean-field state diverged at step {k + 1}")
        ts.append((k + 1) * h)
        xs.append(x)
        ps.append(p)
        rs.append(r)
    return MeanFieldTrajectory(np.asarray(ts), np.asarray(xs), np.asarray(ps), np.asarray(rs))


def meanfield_kick(s: MeanFieldState, g_b) -> MeanFieldState:
    """Delta-pulse limit of a momentum coupling ``g_b p`` (``g_b`` a Hermitian matrix).

    The pulse moves ``x`` by ``tr(g_b rho_Q)`` and rotates ``rho_Q`` by
    ``exp(-i g_b p)``; ``p`` is unchanged.  Exact when ``g_b`` commutes with
    itself at all times, which it does.
    """
    g_b = np.asarray(g_b, dtype=complex)
    x = s.x + np.trace(g_b @ s.rho_q).real
    w, V = np.linalg.eigh(g_b)
    U = (V * np.exp(-1j * w * s.p)) @ V.conj().T
    return MeanFieldState(x, s.p, U @ s.rho_q @ U.conj().T)
