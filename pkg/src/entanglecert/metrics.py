"""State-quality functionals, outcome averaging, and linear-inversion tomography."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

import numpy as np

from .certify import CHSH_SETTINGS, WITNESS_SETTINGS
from .core import (
    PAULIS,
    SY,
    BlochVector,
    DensityMatrix,
    PureState,
    adjoint,
    as_density,
    hermitian_eigensystem,
    hermitian_sqrt,
)
from .errors import MissingExpectation, OutOfRange, ZeroProbabilityBranch
from .measurement import OUTCOME_PAIRS, WeakMeasurement, apply_measurement, branch_probabilities, weak_operator
from .rng import RngStream

_SYSY = np.kron(SY, SY)
PAULI_LABELS = ("I", "x", "y", "z")


@dataclass(frozen=True)
class StateMetrics:
    fidelity: float
    purity: float
    concurrence: float
    eof: float


@dataclass(frozen=True)
class AveragingPlan:
    pairs: tuple[tuple[BlochVector, BlochVector], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("averaging plan needs at least one direction pair")

    @property
    def size(self) -> int:
        return len(self.pairs)


WITNESS_PLAN = AveragingPlan(WITNESS_SETTINGS)
CHSH_PLAN = AveragingPlan(CHSH_SETTINGS)
PLANS = {"witness": WITNESS_PLAN, "steering": WITNESS_PLAN, "chsh": CHSH_PLAN}


def fidelity_with_pure(target: PureState, state) -> float:
    """<psi|rho|psi> for a pure reference state."""
    psi = target.amplitudes
    rho = as_density(state).matrix
    return float(np.clip(np.vdot(psi, rho @ psi).real, 0.0, 1.0))


def purity(state) -> float:
    rho = as_density(state).matrix
    return float(np.trace(rho @ rho).real)


def concurrence(state) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the singular values of sqrt(rho) (sy x sy) sqrt(rho)*, equal
    to the square roots of the eigenvalues of sqrt(rho) rho~ sqrt(rho) but
    without squaring, so rank-deficient states keep full precision.
    """
    s = hermitian_sqrt(as_density(state).matrix)
    lam = np.linalg.svd(s @ _SYSY @ s.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_hermitian(state) -> float:
    """Concurrence from the eigenvalues of sqrt(rho) rho~ sqrt(rho).

    Independent route used for cross-checks; accurate to ~1e-8 near pure states.
    """
    rho = as_density(state).matrix
    rho_tilde = _SYSY @ rho.conj() @ _SYSY
    s = hermitian_sqrt(rho)
    r = s @ rho_tilde @ s
    evals, _ = hermitian_eigensystem(0.5 * (r + adjoint(r)))
    lam = np.sqrt(np.clip(evals, 0.0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def entanglement_of_formation(c: float) -> float:
    """Entanglement of formation in ebits for concurrence ``c``."""
    if not -1e-12 <= c <= 1 + 1e-12:
        raise OutOfRange(f"concurrence {c} out of [0,1]")
    c = min(max(c, 0.0), 1.0)
    return _binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def state_metrics(state, target: PureState) -> StateMetrics:
    c = concurrence(state)
    return StateMetrics(fidelity_with_pure(target, state), purity(state), c, entanglement_of_formation(c))


def reversibility(p_a: float, p_b: float) -> float:
    """Total success probability of matched-outcome reversal."""
    for name, p in (("p_A", p_a), ("p_B", p_b)):
        if not 0.0 <= p <= 1.0:
            raise OutOfRange(f"{name} = {p} out of [0,1]")
    return 0.25 * (1.0 - p_a * p_a) * (1.0 - p_b * p_b)


def disturbed_branches(state, plan: AveragingPlan, p_a: float, p_b: float):
    """Yield ``(pair_index, l_a, l_b, weight, rho_m)`` over all nonzero branches.

    ``weight`` already includes the 1/D plan average.
    """
    rho = as_density(state)
    for i, (ra, rb) in enumerate(plan.pairs):
        m_a, m_b = WeakMeasurement(p_a, ra), WeakMeasurement(p_b, rb)
        probs = branch_probabilities(rho, m_a, m_b)
        for (l_a, l_b), prob in zip(OUTCOME_PAIRS, probs):
            if prob < 1e-14:
                continue
            try:
                post, _ = apply_measurement(rho, weak_operator(m_a, l_a), weak_operator(m_b, l_b))
            except ZeroProbabilityBranch:
                continue
            yield i, l_a, l_b, prob / plan.size, post


def averaged_quantity(state, plan: AveragingPlan, p_a: float, p_b: float, quantity: Callable[[DensityMatrix], float]) -> float:
    """Outcome- and direction-averaged value of ``quantity`` on disturbed states."""
    return float(sum(w * quantity(post) for _, _, _, w, post in disturbed_branches(state, plan, p_a, p_b)))


def averaged_metrics(state, plan: AveragingPlan, p_a: float, p_b: float, target: PureState) -> StateMetrics:
    f = e = pur = c = 0.0
    for _, _, _, w, post in disturbed_branches(state, plan, p_a, p_b):
        m = state_metrics(post, target)
        f += w * m.fidelity
        pur += w * m.purity
        c += w * m.concurrence
        e += w * m.eof
    return StateMetrics(f, pur, c, e)


# --- tomography -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TomographyResult:
    matrix: np.ndarray
    min_eigenvalue: float

    @property
    def physical(self) -> bool:
        return self.min_eigenvalue >= -1e-9

    def density(self) -> DensityMatrix:
        """The reconstruction as a validated DensityMatrix (raises if unphysical)."""
        return DensityMatrix(self.matrix)


def pauli_expectations(state) -> dict[tuple[str, str], float]:
    rho = as_density(state).matrix
    return {
        (i, j): float(np.trace(rho @ np.kron(PAULIS[i], PAULIS[j])).real)
        for i, j in product(PAULI_LABELS, repeat=2)
    }


def tomography_linear_inversion(expectations: Mapping[tuple[str, str], float]) -> TomographyResult:
    """rho = 1/4 sum_ij E_ij sigma_i (x) sigma_j with E_II fixed at 1."""
    rho = np.kron(PAULIS["I"], PAULIS["I"]).astype(complex)
    for i, j in product(PAULI_LABELS, repeat=2):
        if (i, j) == ("I", "I"):
            continue
        try:
            e = float(expectations[(i, j)])
        except KeyError:
            raise MissingExpectation(f"missing expectation <{i}{j}>") from None
        if not -1.0 - 1e-12 <= e <= 1.0 + 1e-12:
            raise OutOfRange(f"expectation <{i}{j}> = {e} out of [-1,1]")
        rho = rho + e * np.kron(PAULIS[i], PAULIS[j])
    rho = 0.25 * rho
    rho = 0.5 * (rho + adjoint(rho))
    evals, _ = hermitian_eigensystem(rho)
    return TomographyResult(rho, float(evals[-1]))


_AXES = {"x": BlochVector(1.0, 0.0, 0.0), "y": BlochVector(0.0, 1.0, 0.0), "z": BlochVector(0.0, 0.0, 1.0)}


def sampled_pauli_expectations(state, shots_per_setting: int, rng: RngStream) -> dict[tuple[str, str], float]:
    """Pauli expectations estimated from projective measurements in the nine local bases.

    Single-qubit marginals are averaged over the three settings that share
    the measured axis.
    """
    rho = as_density(state)
    sums: dict[tuple[str, str], list[float]] = {}
    for k, (a, b) in enumerate(product("xyz", repeat=2)):
        probs = branch_probabilities(rho, WeakMeasurement(1.0, _AXES[a]), WeakMeasurement(1.0, _AXES[b]))
        n = rng.child(k).multinomial(shots_per_setting, probs) / shots_per_setting
        # OUTCOME_PAIRS order: ++, +-, -+, --
        sums.setdefault((a, b), []).append(n[0] - n[1] - n[2] + n[3])
        sums.setdefault((a, "I"), []).append(n[0] + n[1] - n[2] - n[3])
        sums.setdefault(("I", b), []).append(n[0] - n[1] + n[2] - n[3])
    out = {key: float(np.mean(v)) for key, v in sums.items()}
    out[("I", "I")] = 1.0
    return out


def expectations_from_labels(data: Mapping[str, float]) -> dict[tuple[str, str], float]:
    """Convert two-character keys such as ``"xz"`` or ``"Iy"`` into label pairs."""
    out = {}
    for key, value in data.items():
        if len(key) != 2 or key[0] not in PAULI_LABELS or key[1] not in PAULI_LABELS:
            raise MissingExpectation(f"unrecognized expectation label {key!r}")
        out[(key[0], key[1])] = float(value)
    return out
