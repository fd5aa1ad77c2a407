"""
Mean field versus hybrid: where the averages agree and the states do not
=======================================================================

With the spin in a sigma_3 eigenstate, the hybrid means follow the mean-field
orbit exactly.  With the spin in an equal superposition the mean-field
pointer sits at one point, the average, while the hybrid pointer splits.
"""

import numpy as np

from hybridyn import HybridModel, PhaseGrid
from hybridyn.evolvers import rk4_evolve
from hybridyn.hybrid_state import HybridDensity, classical_marginal, gaussian_weight
from hybridyn.meanfield import MeanFieldState, meanfield_evolve, meanfield_kick
from hybridyn.measurement import impulsive_kick, kicked_grid, pointer_maxima
from hybridyn.phase_grid import integrate
from hybridyn.quantum_core import SIGMA

grid = PhaseGrid(8.0, 64)
model = HybridModel.spin_oscillator(kappa=1.0)
up = np.array([1.0, 0.0])

rho0 = HybridDensity.product(grid, gaussian_weight(grid), np.outer(up, up))
hyb = rk4_evolve(rho0, model, 1.0, 2e-3, sample_times=[0.25, 0.5, 0.75])
mf = meanfield_evolve(MeanFieldState.pure(0.0, 0.0, up), model, 1.0, 2e-3)
mx, mp = mf.positions_at(hyb.times)
X, P = grid.mesh
for k, rho in enumerate(hyb.states):
    rc = classical_marginal(rho)
    hx, hp = integrate(grid, X * rc), integrate(grid, P * rc)
    print(f"t = {rho.time:.2f}: hybrid <x>,<p> = ({hx:+.6f}, {hp:+.6f})  mean field = ({mx[k]:+.6f}, {mp[k]:+.6f})")

# %%
# Kick the superposition with g = 5.

g = 5.0
plus = np.array([1.0, 1.0]) / np.sqrt(2)
kgrid = kicked_grid(g)
kicked = impulsive_kick(HybridDensity.product(kgrid, gaussian_weight(kgrid), np.outer(plus, plus)), g)
mf_kicked = meanfield_kick(MeanFieldState.pure(0.0, 0.0, plus), g * SIGMA[2])
print("hybrid pointer maxima:", pointer_maxima(kicked))
print(f"mean-field pointer: ({mf_kicked.x:+.3f}, {mf_kicked.p:+.3f})")
