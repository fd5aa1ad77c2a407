"""Right-hand sides and time stepping for hybrid densities.

Two generators act on ``rho(x, p)``:

* ``aleksandrov`` --  ``-i[H, rho] + {H, rho}/2 - {rho, H}/2``
* ``hybrid`` -- the same plus ``-(i/2)[dH/dx, drho/dx] - (i/2)[dH/dp, drho/dp]``,
  the first-order expansion of the coherent-state projected dynamics, exact
  for a harmonic classical part with coupling linear in ``x`` and ``p``.

Both are integrated by classic RK4 on the grid (:func:`rk4_evolve`).

On its off-diagonal blocks the hybrid generator contains an imaginary
translation (for ``H_I = kappa sigma_3 p`` the term ``i kappa d/dp``), which
amplifies a Fourier mode of wavenumber ``k`` like ``exp(kappa |k| t)``.
Exact solutions never excite those modes, but round-off does, so long runs at
strong coupling lose precision on the grid.  :func:`evolve_dyad` integrates
the same equation in factored form ``rho = sum_n psi_n psi_n^dagger`` with
``psi_n = sqrt(G) phi_n(x - i p)``.  There the generator becomes

    dpsi/dt = (x d/dp - p d/dx) psi + A dpsi/dp - B dpsi/dx
              - i H_Q psi - (i/2)(A x + B p) psi,

a symmetric hyperbolic system that conserves ``sum |psi|^2`` and keeps
``rho`` positive by construction.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hybrid_state import (
    WEIGHT_FLOOR,
    BargmannDyad,
    HybridDensity,
    classical_marginal,
    density_from_factors,
    dyad_factor_fields,
    polarization_field,
)
from .model import HybridModel
from .phase_grid import PhaseGrid, differentiate, integrate

__all__ = [
    "NumericalInstabilityError",
    "InexactModelWarning",
    "RHS_KINDS",
    "aleksandrov_rhs",
    "hybrid_first_order_rhs",
    "max_stable_dt",
    "Trajectory",
    "rk4_evolve",
    "evolve_dyad",
    "factor_rhs",
    "FlowField",
    "flow_field",
    "continuity_residuals",
]

RHS_KINDS = ("aleksandrov", "hybrid")
STABILITY_C = 0.5


class NumericalInstabilityError(RuntimeError):
    """Raised when the monitored norm leaves its tolerance band."""


class InexactModelWarning(UserWarning):
    pass


def _lmul(M, f):
    return np.einsum("ij,jk...->ik...", M, f)


def _rmul(f, M):
    return np.einsum("ij...,jk->ik...", f, M)


def _comm(M, f):
    return _lmul(M, f) - _rmul(f, M)


def _acomm(M, f):
    return _lmul(M, f) + _rmul(f, M)


class _Generator:
    """Grid-bound evaluation of one of the two right-hand sides."""

    def __init__(self, grid: PhaseGrid, model: HybridModel, kind: str):
        if kind not in RHS_KINDS:
            raise ValueError(f"rhs must be one of {RHS_KINDS}, got {kind!r}")
        self.grid = grid
        self.model = model
        self.kind = kind
        X, P = grid.mesh
        self.X, self.P = X, P
        self.hcx, self.hcp = model.classical.gradient(X, P)
        m = model
        self._has_q = bool(np.any(m.h_q))
        self._has_a = bool(np.any(m.a))
        self._has_b = bool(np.any(m.b))

    def __call__(self, r: np.ndarray) -> np.ndarray:
        m, g = self.model, self.grid
        rx = differentiate(g, r, "x")
        rp = differentiate(g, r, "p")
        # {H_C, rho}: the scalar part of the symmetrized brackets
        out = self.hcx * rp - self.hcp * rx
        if self._has_q:
            out -= 1j * _comm(m.h_q, r)
        if self._has_a:
            out -= 1j * self.X * _comm(m.a, r)
            out += 0.5 * _acomm(m.a, rp)
            if self.kind == "hybrid":
                out -= 0.5j * _comm(m.a, rx)
        if self._has_b:
            out -= 1j * self.P * _comm(m.b, r)
            out -= 0.5 * _acomm(m.b, rx)
            if self.kind == "hybrid":
                out -= 0.5j * _comm(m.b, rp)
        return out


def _check_model(rho: HybridDensity, model: HybridModel):
    if rho.dim != model.dim:
        raise ValueError(f"state dimension {rho.dim} does not match model dimension {model.dim}")


def aleksandrov_rhs(rho: HybridDensity, model: HybridModel) -> HybridDensity:
    """Time derivative under the commutator-plus-symmetrized-bracket equation."""
    _check_model(rho, model)
    return rho.with_values(_Generator(rho.grid, model, "aleksandrov")(rho.values))


def hybrid_first_order_rhs(rho: HybridDensity, model: HybridModel) -> HybridDensity:
    """Time derivative under the first-order hybrid equation.

    Warns with :class:`InexactModelWarning` when the classical Hamiltonian is
    not harmonic, since the expansion is then truncated.
    """
    _check_model(rho, model)
    if not model.exact:
        warnings.warn(
            "first-order hybrid equation is only exact for harmonic H_C with linear coupling",
            InexactModelWarning,
            stacklevel=2,
        )
    return rho.with_values(_Generator(rho.grid, model, "hybrid")(rho.values))


def max_stable_dt(grid: PhaseGrid, model: HybridModel) -> float:
    """RK4 step bound ``c h / v_max`` for spectral advection, ``c = 0.5``.

    ``v_max`` is the largest classical phase-space speed on the grid plus the
    spectral norms of the coupling matrices.
    """
    X, P = grid.mesh
    gx, gp = model.classical.gradient(X, P)
    v = float(np.sqrt(gx**2 + gp**2).max()) + model.coupling_speed
    return STABILITY_C * grid.h / v


@dataclass
class Trajectory:
    """Sampled states plus per-step diagnostics."""

    times: np.ndarray
    states: list
    diagnostics: dict = field(default_factory=dict)
    method: str = "rk4"

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k) -> HybridDensity:
        return self.states[k]

    @property
    def final(self) -> HybridDensity:
        return self.states[-1]

    def at(self, t: float) -> HybridDensity:
        k = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[k], t, atol=1e-9):
            raise KeyError(f"no snapshot at t={t}")
        return self.states[k]

    def norm_drift(self) -> float:
        n = self.diagnostics["norm"]
        return float(np.max(np.abs(n - n[0])))

    def max_nonhermiticity(self) -> float:
        return float(np.max(self.diagnostics["non_hermiticity"]))

    def min_eigenvalue(self) -> float:
        return float(np.min(self.diagnostics["min_eigenvalue"]))

    def max_polarization(self) -> float:
        return float(np.nanmax(self.diagnostics["max_s"]))

    def diagnostics_table(self) -> np.ndarray:
        keys = ("time", "norm", "min_eigenvalue", "max_s", "non_hermiticity")
        return np.column_stack([self.diagnostics[k] for k in keys])


def _step_plan(t_final: float, dt: float, sample_times) -> tuple[list, list]:
    """Sub-step sizes per segment so every sample time is hit exactly.

    ``0`` and ``t_final`` are always sample times.
    """
    if t_final < 0 or dt <= 0:
        raise ValueError("need t_final >= 0 and dt > 0")
    ts = sorted({0.0, float(t_final), *map(float, sample_times or ())})
    if ts[-1] > t_final + 1e-12 or ts[0] < 0:
        raise ValueError("sample times must lie in [0, t_final]")
    segments = []
    for a, b in zip(ts[:-1], ts[1:]):
        n = max(1, math.ceil((b - a) / dt - 1e-9))
        segments.append((n, (b - a) / n))
    return ts, segments


class _Recorder:
    def __init__(self, diag_every: int, norm_tol: float, norm_ref: float | None = None):
        self.every = diag_every
        self.norm_tol = norm_tol
        self.norm_ref = norm_ref
        self.rows: dict[str, list] = {
            k: [] for k in ("time", "norm", "min_eigenvalue", "max_s", "non_hermiticity")
        }

    def record(self, t: float, rho: HybridDensity, guard_norm: float | None = None):
        norm = rho.total_norm()
        guard = norm if guard_norm is None else guard_norm
        if self.norm_ref is None:
            self.norm_ref = guard
        if not np.isfinite(guard) or abs(guard - self.norm_ref) > self.norm_tol:
            raise NumericalInstabilityError(
                f"total norm {guard!r} drifted from {self.norm_ref!r} at t={t:.6g}"
            )
        self.rows["time"].append(t)
        self.rows["norm"].append(norm)
        self.rows["min_eigenvalue"].append(rho.min_eigenvalue())
        self.rows["max_s"].append(polarization_field(rho).max_norm if rho.dim == 2 else np.nan)
        self.rows["non_hermiticity"].append(rho.hermitian_defect())

    def result(self) -> dict:
        return {k: np.asarray(v) for k, v in self.rows.items()}


def _rk4(f: Callable, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_evolve(
    rho0: HybridDensity,
    model: HybridModel,
    t_final: float,
    dt: float = 1e-3,
    rhs: str = "hybrid",
    sample_times: Sequence[float] | None = None,
    callback: Callable[[float, HybridDensity], None] | None = None,
    diag_every: int = 1,
    norm_tol: float = 1e-3,
    check_stability: bool = True,
) -> Trajectory:
    """Method-of-lines RK4 for ``rho(x, p)`` directly on the grid.

    Snapshots are kept only at ``sample_times`` (default: start and end);
    diagnostics are recorded every ``diag_every`` steps and ``callback`` is
    invoked after every step.  Raises :class:`NumericalInstabilityError` if the
    total norm moves by more than ``norm_tol``.
    """
    _check_model(rho0, model)
    if rhs == "hybrid" and not model.exact:
        warnings.warn(
            "first-order hybrid equation is only exact for harmonic H_C with linear coupling",
            InexactModelWarning,
            stacklevel=2,
        )
    grid = rho0.grid
    if check_stability and dt > max_stable_dt(grid, model):
        raise ValueError(
            f"dt={dt:g} exceeds the RK4 stability bound {max_stable_dt(grid, model):.3g} "
            f"for h={grid.h:g}"
        )
    ts, segments = _step_plan(t_final, dt, sample_times)
    gen = _Generator(grid, model, rhs)
    rec = _Recorder(diag_every, norm_tol)

    y = rho0.values.copy()
    t = 0.0
    states = [rho0.with_values(y.copy(), 0.0)]
    rec.record(0.0, states[0])
    if callback is not None:
        callback(0.0, states[0])
    step = 0
    for (n, h), t_end in zip(segments, ts[1:]):
        for k in range(n):
            y = _rk4(gen, y, h)
            t = t_end if k == n - 1 else t + h
            step += 1
            if callback is not None or step % diag_every == 0 or k == n - 1:
                cur = rho0.with_values(y, t)
                if step % diag_every == 0 or k == n - 1:
                    rec.record(t, cur)
                if callback is not None:
                    callback(t, cur)
        states.append(rho0.with_values(y.copy(), t_end))
    return Trajectory(np.asarray(ts), states, rec.result(), method=f"rk4/{rhs}")


def factor_rhs(grid: PhaseGrid, model: HybridModel) -> Callable[[np.ndarray], np.ndarray]:
    """Generator for half-weighted factors ``psi`` of shape ``(n, d, N, N)``."""
    if not model.exact:
        raise ValueError("factored evolution requires a harmonic H_C with linear coupling")
    X, P = grid.mesh
    m = model
    zeroth = -1j * m.h_q[:, :, None, None] - 0.5j * (
        np.multiply.outer(m.a, X) + np.multiply.outer(m.b, P)
    )
    has_a, has_b = bool(np.any(m.a)), bool(np.any(m.b))

    def f(psi: np.ndarray) -> np.ndarray:
        px = differentiate(grid, psi, "x")
        pp = differentiate(grid, psi, "p")
        out = X * pp - P * px
        out += np.einsum("ijxy,njxy->nixy", zeroth, psi)
        if has_a:
            out += np.einsum("ij,njxy->nixy", m.a, pp)
        if has_b:
            out -= np.einsum("ij,njxy->nixy", m.b, px)
        return out

    return f


def evolve_dyad(
    dyad: BargmannDyad,
    grid: PhaseGrid,
    model: HybridModel,
    t_final: float,
    dt: float = 1e-3,
    sample_times: Sequence[float] | None = None,
    pad: float = 4.0,
    normalize: bool = True,
    callback: Callable[[float, HybridDensity], None] | None = None,
    diag_every: int = 1,
    norm_tol: float = 1e-3,
    check_stability: bool = True,
) -> Trajectory:
    """Hybrid evolution of a dyad state in factored form.

    The factors decay only like ``exp(-r^2/4)``, so they are propagated on a
    grid padded by ``pad`` on each side (same spacing) and cropped to ``grid``
    for every reported state.  Diagnostics use the cropped density; the
    instability guard uses the factor norm on the padded grid.
    """
    if dyad.dim != model.dim:
        raise ValueError(f"dyad dimension {dyad.dim} does not match model dimension {model.dim}")
    if normalize:
        dyad = dyad.normalized()
    big = grid.padded(pad) if pad > 0 else grid
    off = grid.pad_cells(big)
    if check_stability and dt > max_stable_dt(big, model):
        raise ValueError(
            f"dt={dt:g} exceeds the RK4 stability bound {max_stable_dt(big, model):.3g}"
        )
    crop = (Ellipsis, slice(off, off + grid.N), slice(off, off + grid.N))
    f = factor_rhs(big, model)
    ts, segments = _step_plan(t_final, dt, sample_times)

    def snapshot(psi, t):
        return density_from_factors(grid, psi[crop], t)

    def factor_norm(psi):
        return float(integrate(big, np.sum(np.abs(psi) ** 2, axis=(0, 1))))

    psi = dyad_factor_fields(dyad, big)
    rec = _Recorder(diag_every, norm_tol)
    rho = snapshot(psi, 0.0)
    states = [rho]
    rec.record(0.0, rho, factor_norm(psi))
    if callback is not None:
        callback(0.0, rho)
    t, step = 0.0, 0
    for (n, h), t_end in zip(segments, ts[1:]):
        for k in range(n):
            psi = _rk4(f, psi, h)
            t = t_end if k == n - 1 else t + h
            step += 1
            due = step % diag_every == 0 or k == n - 1
            if callback is not None or due:
                rho = snapshot(psi, t)
                if due:
                    rec.record(t, rho, factor_norm(psi))
                if callback is not None:
                    callback(t, rho)
        states.append(snapshot(psi, t_end))
    return Trajectory(np.asarray(ts), states, rec.result(), method="factored/hybrid")


@dataclass(frozen=True)
class FlowField:
    vx: np.ndarray
    vp: np.ndarray
    mask: np.ndarray


def flow_field(rho: HybridDensity, model: HybridModel, floor: float = WEIGHT_FLOOR) -> FlowField:
    """Conditional-expectation velocities ``(<dH/dp>_xp, -<dH/dx>_xp)``.

    Zero where the classical weight is below ``floor``.
    """
    _check_model(rho, model)
    X, P = rho.grid.mesh
    gx, gp = model.classical.gradient(X, P)
    rc = classical_marginal(rho)
    mask = rc > floor
    ta = np.einsum("ij,jixy->xy", model.a, rho.values).real
    tb = np.einsum("ij,jixy->xy", model.b, rho.values).real
    safe = np.where(mask, rc, 1.0)
    vx = np.where(mask, gp + tb / safe, 0.0)
    vp = np.where(mask, -gx - ta / safe, 0.0)
    return FlowField(vx, vp, mask)


def continuity_residuals(
    rho0: HybridDensity,
    model: HybridModel,
    t_final: float,
    dt: float = 1e-3,
    rhs: str = "hybrid",
    floor: float = WEIGHT_FLOOR,
) -> tuple[np.ndarray, np.ndarray, Trajectory]:
    """Sup-norm of ``d rho_C/dt + div(v rho_C)`` along an RK4 trajectory.

    ``d rho_C/dt`` is a central difference of consecutive steps, ``v`` comes
    from :func:`flow_field`.  Returns interior step times, residuals and the
    trajectory (end points only).
    """
    grid = rho0.grid
    hist: list[tuple[float, np.ndarray, np.ndarray]] = []
    times, res = [], []

    def cb(t, rho):
        rc = classical_marginal(rho)
        fl = flow_field(rho, model, floor)
        div = differentiate(grid, fl.vx * rc, "x") + differentiate(grid, fl.vp * rc, "p")
        hist.append((t, rc, div))
        if len(hist) == 3:
            (t0, r0, _), (t1, _, d1), (t2, r2, _) = hist
            times.append(t1)
            res.append(float(np.max(np.abs((r2 - r0) / (t2 - t0) + d1))))
            hist.pop(0)

    traj = rk4_evolve(rho0, model, t_final, dt, rhs=rhs, callback=cb, diag_every=1)
    return np.asarray(times), np.asarray(res), traj
