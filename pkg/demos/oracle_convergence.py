"""
Certifying the hybrid equation against the full quantum dynamics
================================================================

For a harmonic oscillator coupled linearly to a spin, the first-order hybrid
equation is the exact image of von Neumann dynamics on Fock x spin under the
coherent-state projection.  We evolve both and compare, refining the grid
and the time step.
"""

from hybridyn import HybridModel
from hybridyn.oracle import convergence_study
from hybridyn.scenarios import counterexample_dyad

model = HybridModel.spin_oscillator(kappa=0.3)
dyad = counterexample_dyad()

# %%
# Spatial refinement at dt = 1e-3: spectral convergence down to round-off.

for N, dt, err in convergence_study(model, dyad, 1.0, 8.0, [24, 32, 40, 48], [1e-3]):
    print(f"N = {N:3d}  dt = {dt:.0e}  L_inf = {err:.3e}")

# %%
# Temporal refinement at N = 48: each halving divides the error by ~16.

rows = convergence_study(model, dyad, 1.0, 8.0, [48], [0.01, 0.005, 0.0025])
prev = None
for N, dt, err in rows:
    ratio = "" if prev is None else f"  ratio {prev / err:.1f}"
    print(f"N = {N:3d}  dt = {dt:.4f}  L_inf = {err:.3e}{ratio}")
    prev = err
