"""Entanglement certification statistics from weak-measurement correlations.

Three tests with decreasing trust in the measurement devices:

* witness (both devices trusted): strength compensated on both sides,
* steering (one device trusted): compensated on the trusted side only,
* CHSH (no trust): raw weak-observable correlations.

Exact mode evaluates correlations as traces; sampled mode estimates them
from simulated outcome counts.  Both feed the same assembly code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import X_HAT, Y_HAT, Z_HAT, ZMX_HAT, ZPX_HAT, BlochVector, as_density, kron2
from .errors import EmptyCounts, MissingDirection, ZeroStrength
from .measurement import OUTCOME_PAIRS, WeakMeasurement, branch_probabilities, generalized_observable
from .rng import RngStream

STEERING_BOUND = 1 / math.sqrt(3)
CHSH_BOUND = 2.0
WITNESS_WEIGHTS = {"x": 1.0, "y": -1.0, "z": 1.0}


class CertTest(str, enum.Enum):
    WITNESS = "witness"
    STEERING_A_TO_B = "steering"  # Alice steers Bob; Bob's device trusted
    STEERING_B_TO_A = "steering-reverse"  # Bob steers Alice; Alice's device trusted
    CHSH = "chsh"


class Trust(str, enum.Enum):
    BOB_TRUSTED = "bob"
    ALICE_TRUSTED = "alice"


WITNESS_SETTINGS: tuple[tuple[BlochVector, BlochVector], ...] = (
    (X_HAT, X_HAT),
    (Y_HAT, Y_HAT),
    (Z_HAT, Z_HAT),
)
CHSH_SETTINGS: tuple[tuple[BlochVector, BlochVector], ...] = (
    (Z_HAT, ZPX_HAT),
    (Z_HAT, ZMX_HAT),
    (X_HAT, ZPX_HAT),
    (X_HAT, ZMX_HAT),
)
_W3 = (WITNESS_WEIGHTS["x"], WITNESS_WEIGHTS["y"], WITNESS_WEIGHTS["z"])
_CHSH_SIGNS = (1.0, 1.0, 1.0, -1.0)


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    shots: int = 0  # 0 flags an exact value
    standard_error: float = 0.0


@dataclass(frozen=True)
class CertificationResult:
    test: CertTest
    statistic: float
    threshold: float
    certified: bool
    p_a: float
    p_b: float
    correlations: tuple[CorrelationEstimate, ...] = field(default=())
    standard_error: float = 0.0

    @property
    def shots(self) -> int:
        return sum(c.shots for c in self.correlations)


def settings_for(test: CertTest) -> tuple[tuple[BlochVector, BlochVector], ...]:
    return CHSH_SETTINGS if CertTest(test) is CertTest.CHSH else WITNESS_SETTINGS


def correlation(state, m_a: WeakMeasurement, m_b: WeakMeasurement) -> float:
    """<mu_A mu_B> = tr(rho (mu_A x mu_B))."""
    rho = as_density(state).matrix
    op = kron2(generalized_observable(m_a), generalized_observable(m_b))
    # tr(rho op) without forming the product
    return float(np.sum(rho * op.T).real)


def witness_from_pauli(correlations: Mapping[str, float]) -> float:
    """Witness value from projective Pauli correlations keyed 'x', 'y', 'z'."""
    try:
        total = sum(w * float(correlations[r]) for r, w in WITNESS_WEIGHTS.items())
    except KeyError as exc:
        raise MissingDirection(f"missing correlation for direction {exc.args[0]!r}") from None
    return 0.25 - 0.25 * total


def _require_positive(value: float, name: str) -> None:
    if value <= 0.0:
        raise ZeroStrength(f"{name} must be > 0 for strength compensation, got {value}")


def assemble(test: CertTest, correlations: Sequence[CorrelationEstimate], p_a: float, p_b: float) -> CertificationResult:
    """Statistic, propagated error and verdict from per-setting correlations."""
    test = CertTest(test)
    values = [c.value for c in correlations]
    se_sum = math.sqrt(sum(c.standard_error**2 for c in correlations))
    if test is CertTest.WITNESS:
        _require_positive(p_a * p_b, "p_A * p_B")
        scale = 1.0 / (4.0 * p_a * p_b)
        stat = 0.25 - scale * float(np.dot(_W3, values))
        threshold, certified = 0.0, stat < 0.0
    elif test in (CertTest.STEERING_A_TO_B, CertTest.STEERING_B_TO_A):
        trusted = p_b if test is CertTest.STEERING_A_TO_B else p_a
        _require_positive(trusted, "p_B" if test is CertTest.STEERING_A_TO_B else "p_A")
        scale = 1.0 / (3.0 * trusted)
        stat = scale * float(np.dot(_W3, values))
        threshold, certified = STEERING_BOUND, stat > STEERING_BOUND
    else:
        scale = 1.0
        stat = abs(float(np.dot(_CHSH_SIGNS, values)))
        threshold, certified = CHSH_BOUND, stat > CHSH_BOUND
    return CertificationResult(
        test=test,
        statistic=stat,
        threshold=threshold,
        certified=bool(certified),
        p_a=p_a,
        p_b=p_b,
        correlations=tuple(correlations),
        standard_error=scale * se_sum,
    )


def certify_exact(state, test: CertTest, p_a: float, p_b: float) -> CertificationResult:
    test = CertTest(test)
    state = as_density(state)
    corr = [
        CorrelationEstimate(correlation(state, WeakMeasurement(p_a, ra), WeakMeasurement(p_b, rb)))
        for ra, rb in settings_for(test)
    ]
    return assemble(test, corr, p_a, p_b)


def witness_weak(state, p_a: float, p_b: float) -> CertificationResult:
    _require_positive(p_a * p_b, "p_A * p_B")
    return certify_exact(state, CertTest.WITNESS, p_a, p_b)


def steering(state, p_a: float, p_b: float, trust: Trust = Trust.BOB_TRUSTED) -> CertificationResult:
    test = CertTest.STEERING_A_TO_B if Trust(trust) is Trust.BOB_TRUSTED else CertTest.STEERING_B_TO_A
    _require_positive(p_b if test is CertTest.STEERING_A_TO_B else p_a, "trusted strength")
    return certify_exact(state, test, p_a, p_b)


def chsh(state, p_a: float, p_b: float) -> CertificationResult:
    return certify_exact(state, CertTest.CHSH, p_a, p_b)


def estimate_correlation(counts: Mapping[tuple[int, int], int]) -> CorrelationEstimate:
    """Mean of l_A * l_B over recorded shots with its binomial standard error."""
    n = {pair: int(counts.get(pair, 0)) for pair in OUTCOME_PAIRS}
    total = sum(n.values())
    if total <= 0:
        raise EmptyCounts("no shots recorded")
    value = (n[(1, 1)] + n[(-1, -1)] - n[(1, -1)] - n[(-1, 1)]) / total
    se = math.sqrt(max(0.0, 1.0 - value * value) / total)
    return CorrelationEstimate(value, total, se)


def sample_counts(state, m_a: WeakMeasurement, m_b: WeakMeasurement, shots: int, rng: RngStream) -> dict:
    """Outcome counts of ``shots`` independent joint measurements."""
    n = rng.multinomial(shots, branch_probabilities(state, m_a, m_b))
    return {pair: int(k) for pair, k in zip(OUTCOME_PAIRS, n)}


def certify_sampled(state, test: CertTest, p_a: float, p_b: float, shots_per_setting: int, rng: RngStream) -> CertificationResult:
    """Finite-shot certification; setting i draws from ``rng.child(i)``."""
    if shots_per_setting <= 0:
        raise ValueError("shots_per_setting must be positive")
    test = CertTest(test)
    rho = as_density(state)
    corr = []
    for i, (ra, rb) in enumerate(settings_for(test)):
        counts = sample_counts(rho, WeakMeasurement(p_a, ra), WeakMeasurement(p_b, rb), shots_per_setting, rng.child(i))
        corr.append(estimate_correlation(counts))
    return assemble(test, corr, p_a, p_b)


def certify(state, test: CertTest, p_a: float, p_b: float, shots: int | None = None, rng: RngStream | None = None) -> CertificationResult:
    """Exact certification when ``shots`` is falsy, sampled otherwise."""
    if not shots:
        return certify_exact(state, test, p_a, p_b)
    return certify_sampled(state, test, p_a, p_b, shots, rng if rng is not None else RngStream())
