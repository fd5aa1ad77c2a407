import numpy as np
import pytest

from hybridyn import BargmannDyad, HybridModel, PhaseGrid


@pytest.fixture(scope="session")
def grid():
    return PhaseGrid(8.0, 128)


@pytest.fixture(scope="session")
def small_grid():
    return PhaseGrid(8.0, 48)


@pytest.fixture(scope="session")
def counterexample():
    """[(x - ip)|+> + |->]/sqrt(3)"""
    return BargmannDyad(np.array([[[0.0, 1.0], [1.0, 0.0]]]) / np.sqrt(3))


@pytest.fixture(scope="session")
def spin_model():
    return HybridModel.spin_oscillator


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (m + m.conj().T)


def random_density(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = m @ m.conj().T
    return r / np.trace(r).real


# acceptance reporting: each criterion test records its measured checks and
# the terminal summary prints one PASS/FAIL line per criterion
_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    store = request.config.stash[_CRITERIA]

    def record(number, label, value, op, threshold):
        ok = bool(value <= threshold if op == "<=" else value >= threshold)
        store.setdefault(number, []).append((label, float(value), op, float(threshold), ok))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash[_CRITERIA]
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        checks = store[number]
        mark = "PASS" if all(c[-1] for c in checks) else "FAIL"
        detail = "; ".join(f"{lab} = {v:.10g} {op} {th:.10g}" for lab, v, op, th, _ in checks)
        terminalreporter.write_line(f"criterion {number}: {mark}  {detail}")
