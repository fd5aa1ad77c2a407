import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density, random_hermitian
from hybridyn.hybrid_state import BargmannDyad, from_bargmann_dyad
from hybridyn.model import HybridModel
from hybridyn.oracle import (
    FullQuantumState,
    TruncationWarning,
    convergence_study,
    dyad_preimage,
    husimi_project,
    oracle_compare,
    von_neumann_evolve,
)
from hybridyn.phase_grid import PhaseGrid, integrate
from hybridyn.quantum_core import SIGMA, FockBasis, coherent_amplitudes, lift_hamiltonian

NF = 30


def coherent_vector(x0, p0, n_fock, spin):
    v = coherent_amplitudes(x0, p0, n_fock, warn=False) * np.exp(-0.25 * (x0**2 + p0**2))
    return np.kron(v, np.asarray(spin, dtype=complex))


@pytest.fixture(scope="module")
def grid64():
    return PhaseGrid(8, 64)


def test_vacuum_projects_to_gaussian(grid64):
    st_ = FullQuantumState.from_vector(coherent_vector(0, 0, NF, [1, 0]), NF, 2)
    rho = husimi_project(st_, grid64)
    X, P = grid64.mesh
    np.testing.assert_allclose(rho.values[0, 0].real, np.exp(-0.5 * (X**2 + P**2)) / (2 * np.pi), atol=1e-15)
    assert np.abs(rho.values[1]).max() == 0


@pytest.mark.parametrize("x0, p0", [(1.5, 0.0), (-1.0, 2.0), (0.5, -0.5)])
def test_coherent_state_rotates_rigidly(grid64, x0, p0):
    t = 0.7
    spin = np.array([0.6, 0.8j])
    st_ = FullQuantumState.from_vector(coherent_vector(x0, p0, NF, spin), NF, 2)
    H = lift_hamiltonian(HybridModel.decoupled(np.zeros((2, 2))), NF)
    rho = husimi_project(von_neumann_evolve(st_, H, t), grid64)
    xt, pt = x0 * np.cos(t) + p0 * np.sin(t), -x0 * np.sin(t) + p0 * np.cos(t)
    X, P = grid64.mesh
    q = np.exp(-0.5 * ((X - xt) ** 2 + (P - pt) ** 2)) / (2 * np.pi)
    expected = np.outer(spin, spin.conj())[:, :, None, None] * q
    assert np.abs(rho.values - expected).max() < 1e-12


def test_stationary_and_reversible():
    rng = np.random.default_rng(3)
    st_ = FullQuantumState(random_density(rng, 2 * 12), 12, 2)
    fock = FockBasis(12)
    H = np.kron(fock.number, SIGMA[2])
    diag = FullQuantumState(np.diag(np.diag(st_.matrix)), 12, 2)
    np.testing.assert_allclose(von_neumann_evolve(diag, H, 2.3).matrix, diag.matrix, atol=1e-13)
    Hr = random_hermitian(rng, 24)
    back = von_neumann_evolve(von_neumann_evolve(st_, Hr, 1.1), Hr, -1.1)
    np.testing.assert_allclose(back.matrix, st_.matrix, atol=1e-12)


def test_evolve_rejects_bad_hamiltonian():
    st_ = FullQuantumState(np.eye(8) / 8, 4, 2)
    with pytest.raises(ValueError, match="shape"):
        von_neumann_evolve(st_, np.eye(4), 1)
    with pytest.raises(ValueError, match="Hermitian"):
        von_neumann_evolve(st_, np.triu(np.ones((8, 8))), 1)


def test_projection_is_linear_and_positive(grid64):
    rng = np.random.default_rng(8)
    n = 10
    a = FullQuantumState(random_density(rng, 2 * n), n, 2)
    b = FullQuantumState(random_density(rng, 2 * n), n, 2)
    mix = FullQuantumState(0.3 * a.matrix + 0.7 * b.matrix, n, 2)
    with pytest.warns(TruncationWarning):
        ra, rb, rm = (husimi_project(s, grid64) for s in (a, b, mix))
    np.testing.assert_allclose(rm.values, 0.3 * ra.values + 0.7 * rb.values, atol=1e-16)
    assert rm.min_eigenvalue() >= -1e-16
    assert rm.hermitian_defect() <= 1e-16


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_low_fock_projection_keeps_trace(seed):
    rng = np.random.default_rng(seed)
    psi = np.zeros((24, 2), dtype=complex)
    psi[:4] = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    psi /= np.linalg.norm(psi)
    rho = husimi_project(FullQuantumState.from_vector(psi.ravel(), 24, 2), PhaseGrid(9, 72))
    assert integrate(rho.grid, rho.trace_field()) == pytest.approx(1.0, abs=1e-10)


def test_tail_warning():
    psi = np.zeros(2 * 20)
    psi[2 * 19] = 1
    st_ = FullQuantumState.from_vector(psi, 20, 2)
    assert st_.tail_mass() == 1 and not st_.healthy()
    with pytest.warns(TruncationWarning, match="tail"):
        husimi_project(st_, PhaseGrid(4, 16))


def test_state_validation():
    with pytest.raises(ValueError, match="matrix"):
        FullQuantumState(np.eye(5), 3, 2)
    with pytest.raises(ValueError, match="Hermitian"):
        FullQuantumState(np.triu(np.ones((4, 4))), 2, 2)
    with pytest.raises(ValueError, match="trace"):
        FullQuantumState(np.eye(4), 2, 2).check()


def test_preimage_of_counterexample(counterexample):
    st_ = dyad_preimage(counterexample, 6)
    psi = st_.blocks[:, :, 0, 1] / np.sqrt(st_.blocks[0, 1, 0, 1])
    expected = np.zeros((6, 2))
    expected[0, 1] = 1 / np.sqrt(3)
    expected[1, 0] = np.sqrt(2 / 3)
    np.testing.assert_allclose(psi, expected, atol=1e-15)
    assert st_.trace() == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValueError, match="n_fock"):
        dyad_preimage(counterexample, 1)


def test_preimage_projects_onto_dyad(grid64):
    rng = np.random.default_rng(2)
    c = rng.normal(size=(2, 4, 2)) + 1j * rng.normal(size=(2, 4, 2))
    dyad = BargmannDyad(c)
    rho = husimi_project(dyad_preimage(dyad, 30), grid64)
    assert np.abs(rho.values - from_bargmann_dyad(dyad.normalized(), grid64).values).max() < 1e-12


def test_oracle_distance_at_start(grid64, counterexample):
    rep = oracle_compare(HybridModel.spin_oscillator(1.0), counterexample, grid64, 0.0)
    assert rep.max_linf <= 1e-10


def test_uncoupled_product_tracks_oracle(grid64):
    dyad = BargmannDyad.constant(np.array([0.6, 0.8]))
    rep = oracle_compare(HybridModel.decoupled(0.5 * SIGMA[0]), dyad, grid64, 1.0)
    assert rep.final_linf < 1e-10


def test_report_rows(grid64, counterexample):
    rep = oracle_compare(HybridModel.spin_oscillator(0.3), counterexample, grid64, 0.2, sample_times=[0.1])
    np.testing.assert_allclose(rep.times, [0, 0.1, 0.2])
    assert len(rep.header()) == len(rep.rows()[0])
    assert rep.tail_mass.max() < 1e-8


def test_oracle_rejects_inexact_and_unknown(grid64, counterexample):
    from hybridyn.model import quartic

    with pytest.raises(ValueError, match="harmonic"):
        oracle_compare(HybridModel.spin_oscillator(0.3, classical=quartic(0.1)), counterexample, grid64, 0.1)
    with pytest.raises(ValueError, match="method"):
        oracle_compare(HybridModel.spin_oscillator(0.3), counterexample, grid64, 0.1, method="euler")


def test_spectral_convergence_in_grid(counterexample):
    out = convergence_study(HybridModel.spin_oscillator(0.3), counterexample, 1.0, 8.0, [24, 32, 40], [1e-3])
    errs = [e for _, _, e in out]
    assert [n for n, _, _ in out] == [24, 32, 40]
    assert errs[0] > 100 * errs[1] > 100 * 100 * errs[2]
    assert errs[2] < 1e-11
