import numpy as np
import pytest

from hybridyn.evolvers import NumericalInstabilityError
from hybridyn.meanfield import MeanFieldState, meanfield_evolve, meanfield_kick
from hybridyn.model import HybridModel
from hybridyn.quantum_core import SIGMA


@pytest.mark.parametrize("x0, p0, kappa", [(0.0, 0.0, 1.0), (1.0, -0.5, 0.3), (-2.0, 1.0, 2.0)])
def test_eigenstate_orbit(x0, p0, kappa):
    tr = meanfield_evolve(MeanFieldState.pure(x0, p0, [1, 0]), HybridModel.spin_oscillator(kappa), 2.0, 1e-3)
    t = tr.t
    np.testing.assert_allclose(tr.x, x0 * np.cos(t) + (p0 + kappa) * np.sin(t), atol=1e-10)
    np.testing.assert_allclose(tr.p, -x0 * np.sin(t) + (p0 + kappa) * np.cos(t) - kappa, atol=1e-10)
    np.testing.assert_allclose(tr.rho_q[:, 0, 0].real, 1.0, atol=1e-14)


def test_uncoupled_orbit_and_frozen_populations():
    psi = np.array([0.6, 0.8])
    m = HybridModel.decoupled(0.5 * SIGMA[2])
    tr = meanfield_evolve(MeanFieldState.pure(1.0, 0.0, psi), m, np.pi, 1e-3)
    np.testing.assert_allclose(tr.x, np.cos(tr.t), atol=1e-10)
    np.testing.assert_allclose(tr.rho_q[:, 1, 1].real, 0.64, atol=1e-12)
    # the coherence precesses at the splitting
    np.testing.assert_allclose(tr.rho_q[-1, 0, 1], 0.48 * np.exp(-1j * np.pi), atol=1e-10)


def test_superposition_never_splits():
    plus = np.array([1, 1]) / np.sqrt(2)
    tr = meanfield_evolve(MeanFieldState.pure(0.0, 0.0, plus), HybridModel.spin_oscillator(1.0), 1.0)
    np.testing.assert_allclose(tr.x, 0, atol=1e-12)
    np.testing.assert_allclose(tr.p, 0, atol=1e-12)
    assert tr.x.ndim == 1  # one sharp classical point per time


def test_state_validation():
    with pytest.raises(ValueError):
        MeanFieldState(0, 0, np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        meanfield_evolve(MeanFieldState(0, 0, np.eye(3) / 3), HybridModel.spin_oscillator(1.0), 1.0)


def test_instability_guard():
    with pytest.raises(NumericalInstabilityError):
        meanfield_evolve(MeanFieldState.pure(0, 0, [1, 0]), HybridModel.decoupled(20 * SIGMA[0]), 10, 0.5)


def test_kick():
    plus = np.array([1, 1]) / np.sqrt(2)
    s = meanfield_kick(MeanFieldState.pure(0.0, 0.7, plus), 5.0 * SIGMA[2])
    assert s.x == pytest.approx(0.0, abs=1e-15) and s.p == 0.7
    np.testing.assert_allclose(s.rho_q[0, 1], 0.5 * np.exp(-2j * 5.0 * 0.7), atol=1e-14)
    up = meanfield_kick(MeanFieldState.pure(0.0, 0.0, [1, 0]), 5.0 * SIGMA[2])
    assert up.x == pytest.approx(5.0)
