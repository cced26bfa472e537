"""Weak and reversal measurements on a pair of qubits.

A weak measurement of strength p along direction r has Kraus operators

    M_(+-) = sqrt((1 + p)/2) Pi_(+-) + sqrt((1 - p)/2) Pi_(-+)

and its reversal swaps the two weights.  Outcomes are the integers +1 / -1.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass

import numpy as np

from .core import (
    I2,
    BlochVector,
    DensityMatrix,
    PureState,
    adjoint,
    as_density,
    kron2,
)
from .errors import NonUnitDirection, OutOfRange, ZeroProbabilityBranch
from .rng import RngStream

PLUS, MINUS = 1, -1
OUTCOMES = (PLUS, MINUS)
# joint outcome order used by every 4-vector of branch probabilities
OUTCOME_PAIRS = ((PLUS, PLUS), (PLUS, MINUS), (MINUS, PLUS), (MINUS, MINUS))

ZERO_BRANCH_TOL = 1e-14


def _check_outcome(l: int) -> int:
    if l not in (PLUS, MINUS):
        raise ValueError(f"outcome must be +1 or -1, got {l!r}")
    return l


def _check_strength(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise OutOfRange(f"{name} = {value} out of [0,1]")
    return value


@dataclass(frozen=True)
class WeakMeasurement:
    strength: float
    direction: BlochVector

    def __post_init__(self):
        object.__setattr__(self, "strength", _check_strength(self.strength, "strength"))
        if not isinstance(self.direction, BlochVector):
            raise NonUnitDirection("direction must be a BlochVector")

    def operator(self, l: int) -> np.ndarray:
        return weak_operator(self, l)

    def reversal(self) -> "ReversalMeasurement":
        """The matched reversal (same strength and direction)."""
        return ReversalMeasurement(self.strength, self.direction)


@dataclass(frozen=True)
class ReversalMeasurement:
    strength: float
    direction: BlochVector

    def __post_init__(self):
        object.__setattr__(self, "strength", _check_strength(self.strength, "strength"))
        if not isinstance(self.direction, BlochVector):
            raise NonUnitDirection("direction must be a BlochVector")

    def operator(self, l: int) -> np.ndarray:
        return reversal_operator(self, l)


def projector(direction: BlochVector, sign: int) -> np.ndarray:
    """Projector (I + sign * r.sigma) / 2."""
    if not isinstance(direction, BlochVector):
        raise NonUnitDirection("direction must be a BlochVector")
    return 0.5 * (I2 + _check_outcome(sign) * direction.sigma())


def _two_weight_operator(heavy: float, light: float, direction: BlochVector, l: int) -> np.ndarray:
    # heavy * P_l + light * P_-l, expanded so r.sigma is built once
    if not isinstance(direction, BlochVector):
        raise NonUnitDirection("direction must be a BlochVector")
    return 0.5 * (heavy + light) * I2 + (0.5 * _check_outcome(l) * (heavy - light)) * direction.sigma()


def weak_operator(m: WeakMeasurement, l: int) -> np.ndarray:
    p = m.strength
    return _two_weight_operator(math.sqrt((1 + p) / 2), math.sqrt((1 - p) / 2), m.direction, l)


def reversal_operator(r: ReversalMeasurement, l: int) -> np.ndarray:
    q = r.strength
    return _two_weight_operator(math.sqrt((1 - q) / 2), math.sqrt((1 + q) / 2), r.direction, l)


@lru_cache(maxsize=4096)
def generalized_observable(m: WeakMeasurement) -> np.ndarray:
    """sum_l l * M_l^dag M_l, which equals p * (r . sigma). Returned read-only."""
    mu = np.zeros((2, 2), dtype=complex)
    for l in OUTCOMES:
        k = weak_operator(m, l)
        mu += l * (adjoint(k) @ k)
    mu.setflags(write=False)
    return mu


def _effects(m: WeakMeasurement) -> list[np.ndarray]:
    return [adjoint(k) @ k for k in (weak_operator(m, PLUS), weak_operator(m, MINUS))]


def branch_probabilities(state, m_a: WeakMeasurement, m_b: WeakMeasurement) -> np.ndarray:
    """Probabilities of the four joint outcomes in OUTCOME_PAIRS order."""
    rho = as_density(state).matrix
    ea, eb = _effects(m_a), _effects(m_b)
    probs = np.empty(4)
    for i, (la, lb) in enumerate(OUTCOME_PAIRS):
        e = kron2(ea[la == MINUS], eb[lb == MINUS])
        probs[i] = np.trace(rho @ e).real
    return np.clip(probs, 0.0, None)


def joint_outcome_probability(state, m_a: WeakMeasurement, m_b: WeakMeasurement, l_a: int, l_b: int) -> float:
    idx = OUTCOME_PAIRS.index((_check_outcome(l_a), _check_outcome(l_b)))
    return float(branch_probabilities(state, m_a, m_b)[idx])


def apply_measurement(state, op_a: np.ndarray, op_b: np.ndarray):
    """Apply the local Kraus pair op_a (x) op_b and renormalize.

    Returns ``(post_state, probability)``; the post-state has the same kind
    (pure or mixed) as the input.
    """
    k = kron2(op_a, op_b)
    if isinstance(state, PureState):
        v = k @ state.amplitudes
        prob = float(np.vdot(v, v).real)
        if prob < ZERO_BRANCH_TOL:
            raise ZeroProbabilityBranch(f"branch probability {prob:.3e} is zero")
        return PureState(v / math.sqrt(prob)), prob
    rho = as_density(state).matrix
    out = k @ rho @ adjoint(k)
    prob = float(np.trace(out).real)
    if prob < ZERO_BRANCH_TOL:
        raise ZeroProbabilityBranch(f"branch probability {prob:.3e} is zero")
    out = out / prob
    return DensityMatrix._unchecked(0.5 * (out + adjoint(out))), prob


def sample_outcomes(state, m_a: WeakMeasurement, m_b: WeakMeasurement, rng: RngStream):
    """Draw one joint outcome and return ``(l_a, l_b, post_state)``."""
    probs = branch_probabilities(state, m_a, m_b)
    l_a, l_b = OUTCOME_PAIRS[int(rng.choice(probs))]
    post, _ = apply_measurement(state, weak_operator(m_a, l_a), weak_operator(m_b, l_b))
    return l_a, l_b, post


def strength_from_waveplate(theta: float) -> float:
    """Measurement strength |cos 4 theta| set by the half-wave-plate angle (radians)."""
    return abs(math.cos(4.0 * theta))
