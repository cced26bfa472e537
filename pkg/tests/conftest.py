import numpy as np
import pytest

from entanglecert.core import BlochVector, DensityMatrix, PureState


def random_direction(rng: np.random.Generator) -> BlochVector:
    v = rng.normal(size=3)
    return BlochVector.normalized(*v)


def random_pure(rng: np.random.Generator) -> PureState:
    return PureState.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))


def random_density(rng: np.random.Generator, rank: int = 4) -> DensityMatrix:
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def random_hermitian(rng: np.random.Generator, n: int = 4) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


@pytest.fixture
def nprng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in getattr(rep, "nodeid", "") and rep.when == "call":
                lines.append((rep.nodeid.split("::")[-1], outcome.upper(), rep.duration))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in sorted(lines):
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}  ({duration:.2f}s)")
