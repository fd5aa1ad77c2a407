"""Hybrid quantum-classical dynamics on a phase-space grid."""
from .evolvers import (
    InexactModelWarning,
    NumericalInstabilityError,
    Trajectory,
    aleksandrov_rhs,
    continuity_residuals,
    evolve_dyad,
    flow_field,
    hybrid_first_order_rhs,
    max_stable_dt,
    rk4_evolve,
)
from .hybrid_state import (
    BargmannDyad,
    HybridDensity,
    UndefinedConditionalError,
    classical_marginal,
    conditional_state,
    from_bargmann_dyad,
    polarization_field,
    quantum_marginal,
)
from .meanfield import MeanFieldState, meanfield_evolve, meanfield_kick
from .model import HARMONIC, ClassicalHamiltonian, HybridModel, quartic
from .oracle import (
    FullQuantumState,
    TruncationWarning,
    dyad_preimage,
    husimi_project,
    oracle_compare,
    von_neumann_evolve,
)
from .phase_grid import PhaseGrid, differentiate, integrate, make_grid, poisson_bracket
from .quantum_core import SIGMA, FockBasis, coherent_amplitudes, lift_hamiltonian

__version__ = "0.1.0"
