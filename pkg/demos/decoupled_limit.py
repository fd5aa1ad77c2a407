"""
Decoupled limit: rigid phase-space rotation and von Neumann evolution
====================================================================

Without interaction the hybrid equation splits into Liouville flow for the
oscillator and von Neumann evolution for the spin.  A quarter period turns
the classical marginal by 90 degrees.
"""

import numpy as np

from hybridyn import BargmannDyad, HybridModel, PhaseGrid
from hybridyn.evolvers import rk4_evolve
from hybridyn.hybrid_state import classical_marginal, from_bargmann_dyad, quantum_marginal
from hybridyn.quantum_core import SIGMA

grid = PhaseGrid(8.0, 96)
h_q = 0.5 * SIGMA[0] + 0.3 * SIGMA[2]
dyad = BargmannDyad(np.array([[[0.8, 0.2j], [0.3, -0.4], [0.1j, 0.15]]]))
rho0 = from_bargmann_dyad(dyad, grid)
traj = rk4_evolve(rho0, HybridModel.decoupled(h_q), np.pi / 2, 2e-3)

c0, c1 = classical_marginal(rho0), classical_marginal(traj.final)
print(f"marginal change over the quarter period: {np.abs(c1 - c0).max():.3e}")
print(f"distance to the rotated start:          {np.abs(c1 - c0[::-1, :].T).max():.3e}")

w, V = np.linalg.eigh(h_q)
U = (V * np.exp(-1j * w * np.pi / 2)) @ V.conj().T
ref = U @ quantum_marginal(rho0) @ U.conj().T
print(f"spin marginal vs exp(-iHt) rho exp(iHt): {np.abs(quantum_marginal(traj.final) - ref).max():.3e}")
