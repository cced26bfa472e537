"""Certify-then-recover trial engine and the parameter sweeps built on it."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .certify import (
    CertificationResult,
    CertTest,
    assemble,
    certify,
    estimate_correlation,
    settings_for,
)
from .core import PHI_PLUS, BlochVector, DensityMatrix, PureState, as_density, kron2
from .errors import ZeroStrength
from .measurement import (
    OUTCOME_PAIRS,
    PLUS,
    ReversalMeasurement,
    WeakMeasurement,
    apply_measurement,
    branch_probabilities,
    reversal_operator,
    weak_operator,
)
from .metrics import (
    PLANS,
    AveragingPlan,
    StateMetrics,
    averaged_metrics,
    reversibility,
    state_metrics,
)
from .rng import RngStream


class RecoveryStatus(str, enum.Enum):
    MATCHED = "matched"
    UNMATCHED = "unmatched"
    NOT_ATTEMPTED = "not-attempted"


class ReversalPolicy(str, enum.Enum):
    ALL_BRANCHES = "all"
    PLUS_ONLY = "plus"


def _attempts(policy: ReversalPolicy, l_a: int, l_b: int) -> bool:
    return ReversalPolicy(policy) is ReversalPolicy.ALL_BRANCHES or (l_a == PLUS and l_b == PLUS)


@dataclass(frozen=True)
class TrialRecord:
    directions: tuple[BlochVector, BlochVector]
    p_a: float
    p_b: float
    outcomes: tuple[int, int]
    disturbed: PureState | DensityMatrix
    status: RecoveryStatus
    reversal_outcomes: tuple[int, int] | None = None
    final: PureState | DensityMatrix | None = None


def run_trial(
    state,
    p_a: float,
    p_b: float,
    directions: tuple[BlochVector, BlochVector],
    policy: ReversalPolicy = ReversalPolicy.ALL_BRANCHES,
    rng: RngStream | None = None,
) -> TrialRecord:
    """One weak measurement followed by the matched reversal attempt.

    The reversal uses the same strength and direction as the weak measurement
    on each side; recovery succeeds when both reversal outcomes repeat the weak
    outcomes.
    """
    rng = rng if rng is not None else RngStream()
    r_a, r_b = directions
    m_a, m_b = WeakMeasurement(p_a, r_a), WeakMeasurement(p_b, r_b)
    l_a, l_b = OUTCOME_PAIRS[int(rng.choice(branch_probabilities(state, m_a, m_b)))]
    disturbed, _ = apply_measurement(state, weak_operator(m_a, l_a), weak_operator(m_b, l_b))
    common = dict(directions=(r_a, r_b), p_a=p_a, p_b=p_b, outcomes=(l_a, l_b), disturbed=disturbed)
    if not _attempts(policy, l_a, l_b):
        return TrialRecord(status=RecoveryStatus.NOT_ATTEMPTED, **common)

    rev_a, rev_b = m_a.reversal(), m_b.reversal()
    rev_probs = _reversal_probabilities(disturbed, rev_a, rev_b)
    k_a, k_b = OUTCOME_PAIRS[int(rng.choice(rev_probs))]
    if (k_a, k_b) != (l_a, l_b):
        return TrialRecord(status=RecoveryStatus.UNMATCHED, reversal_outcomes=(k_a, k_b), **common)
    final, _ = apply_measurement(disturbed, reversal_operator(rev_a, k_a), reversal_operator(rev_b, k_b))
    return TrialRecord(status=RecoveryStatus.MATCHED, reversal_outcomes=(k_a, k_b), final=final, **common)


def _reversal_probabilities(state, rev_a: ReversalMeasurement, rev_b: ReversalMeasurement) -> np.ndarray:
    rho = as_density(state).matrix
    probs = np.empty(4)
    for i, (k_a, k_b) in enumerate(OUTCOME_PAIRS):
        ka, kb = reversal_operator(rev_a, k_a), reversal_operator(rev_b, k_b)
        e = kron2(ka.conj().T @ ka, kb.conj().T @ kb)
        probs[i] = np.trace(rho @ e).real
    return np.clip(probs, 0.0, None)


def matched_probabilities(state, m_a: WeakMeasurement, m_b: WeakMeasurement) -> np.ndarray:
    """P(weak branch) and P(matched reversal | branch), one row per OUTCOME_PAIRS entry."""
    probs = branch_probabilities(state, m_a, m_b)
    cond = np.zeros(4)
    for i, (l_a, l_b) in enumerate(OUTCOME_PAIRS):
        if probs[i] < 1e-14:
            continue
        post, _ = apply_measurement(state, weak_operator(m_a, l_a), weak_operator(m_b, l_b))
        cond[i] = _reversal_probabilities(post, m_a.reversal(), m_b.reversal())[i]
    return np.column_stack([probs, cond])


def recovered_state(state, m_a: WeakMeasurement, m_b: WeakMeasurement, l_a: int, l_b: int):
    """Final state after weak outcome (l_a, l_b) and matched reversal outcomes."""
    k_a = reversal_operator(m_a.reversal(), l_a) @ weak_operator(m_a, l_a)
    k_b = reversal_operator(m_b.reversal(), l_b) @ weak_operator(m_b, l_b)
    return apply_measurement(state, k_a, k_b)[0]


@dataclass(frozen=True)
class TrialBatch:
    """Aggregate of many independent trials sharing strengths and directions."""

    trials: int
    attempted: int
    matched: int
    branch_counts: tuple[int, int, int, int]
    matched_counts: tuple[int, int, int, int]

    @property
    def matched_frequency(self) -> float:
        return self.matched / self.trials if self.trials else math.nan

    @property
    def standard_error(self) -> float:
        f = self.matched_frequency
        return math.sqrt(f * (1 - f) / self.trials) if self.trials else math.nan


def _batch_from_counts(state, m_a, m_b, branch_counts, policy, gen: np.random.Generator) -> TrialBatch:
    table = matched_probabilities(state, m_a, m_b)
    attempted = 0
    matched = []
    for i, (l_a, l_b) in enumerate(OUTCOME_PAIRS):
        n = int(branch_counts[i])
        if n == 0 or not _attempts(policy, l_a, l_b):
            matched.append(0)
            continue
        attempted += n
        matched.append(int(gen.binomial(n, min(1.0, table[i, 1]))))
    return TrialBatch(
        trials=int(sum(branch_counts)),
        attempted=attempted,
        matched=sum(matched),
        branch_counts=tuple(int(c) for c in branch_counts),
        matched_counts=tuple(matched),
    )


def run_trials(
    state,
    p_a: float,
    p_b: float,
    directions: tuple[BlochVector, BlochVector],
    n: int,
    policy: ReversalPolicy = ReversalPolicy.ALL_BRANCHES,
    rng: RngStream | None = None,
) -> TrialBatch:
    """``n`` trials of :func:`run_trial`, drawn in aggregate.

    Weak outcomes are drawn multinomially and matched reversals binomially per
    branch, which has the same joint distribution as ``n`` separate trials.
    """
    rng = rng if rng is not None else RngStream()
    m_a, m_b = WeakMeasurement(p_a, directions[0]), WeakMeasurement(p_b, directions[1])
    rho = as_density(state)
    counts = rng.multinomial(n, branch_probabilities(rho, m_a, m_b))
    return _batch_from_counts(rho, m_a, m_b, counts, policy, rng.generator)


@dataclass(frozen=True)
class InlineResult:
    certification: CertificationResult
    batches: tuple[TrialBatch, ...]

    @property
    def matched(self) -> int:
        return sum(b.matched for b in self.batches)

    @property
    def trials(self) -> int:
        return sum(b.trials for b in self.batches)


def certify_and_recover(
    state,
    test: CertTest,
    p_a: float,
    p_b: float,
    shots_per_setting: int,
    policy: ReversalPolicy = ReversalPolicy.ALL_BRANCHES,
    rng: RngStream | None = None,
) -> InlineResult:
    """In-line mode: the same sampled outcomes feed the statistic and the recovery attempts."""
    rng = rng if rng is not None else RngStream()
    rho = as_density(state)
    corr, batches = [], []
    for i, (r_a, r_b) in enumerate(settings_for(test)):
        sub = rng.child(i)
        m_a, m_b = WeakMeasurement(p_a, r_a), WeakMeasurement(p_b, r_b)
        counts = sub.multinomial(shots_per_setting, branch_probabilities(rho, m_a, m_b))
        corr.append(estimate_correlation(dict(zip(OUTCOME_PAIRS, counts))))
        batches.append(_batch_from_counts(rho, m_a, m_b, counts, policy, sub.generator))
    return InlineResult(assemble(test, corr, p_a, p_b), tuple(batches))


def recovery_metrics(
    state,
    plan: AveragingPlan,
    p_a: float,
    p_b: float,
    target: PureState,
    policy: ReversalPolicy = ReversalPolicy.ALL_BRANCHES,
) -> tuple[StateMetrics | None, float]:
    """Exact metrics averaged over matched outcomes, and the total matched probability.

    Returns ``(None, 0.0)`` when recovery is impossible (a projective side).
    """
    rho = as_density(state)
    acc = np.zeros(4)
    total = 0.0
    for r_a, r_b in plan.pairs:
        m_a, m_b = WeakMeasurement(p_a, r_a), WeakMeasurement(p_b, r_b)
        table = matched_probabilities(rho, m_a, m_b)
        for i, (l_a, l_b) in enumerate(OUTCOME_PAIRS):
            w = table[i, 0] * table[i, 1] / plan.size
            if w < 1e-14 or not _attempts(policy, l_a, l_b):
                continue
            m = state_metrics(recovered_state(rho, m_a, m_b, l_a, l_b), target)
            acc += w * np.array([m.fidelity, m.purity, m.concurrence, m.eof])
            total += w
    if total == 0.0:
        return None, 0.0
    acc /= total
    return StateMetrics(*acc), total


# --- sweeps -----------------------------------------------------------------


def grid_values(start: float = 0.0, stop: float = 1.0, points: int = 21) -> list[float]:
    return [float(v) for v in np.linspace(start, stop, points)]


@dataclass(frozen=True)
class SweepGrid:
    p_a_values: tuple[float, ...] = field(default_factory=lambda: tuple(grid_values()))
    p_b_values: tuple[float, ...] = field(default_factory=lambda: tuple(grid_values()))
    tests: tuple[CertTest, ...] = (CertTest.WITNESS, CertTest.STEERING_A_TO_B, CertTest.STEERING_B_TO_A, CertTest.CHSH)
    shots: int = 0  # 0 selects exact mode

    def __post_init__(self):
        if not self.p_a_values or not self.p_b_values or not self.tests:
            raise ValueError("sweep grid must be nonempty")
        for p in (*self.p_a_values, *self.p_b_values):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"strength {p} out of [0,1]")


def _undefined(test: CertTest, p_a: float, p_b: float) -> CertificationResult:
    threshold = {CertTest.WITNESS: 0.0, CertTest.CHSH: 2.0}.get(test, 1 / math.sqrt(3))
    return CertificationResult(test, math.nan, threshold, False, p_a, p_b, standard_error=math.nan)


def sweep_certification(grid: SweepGrid, state, rng: RngStream | None = None) -> list[CertificationResult]:
    """One result per (p_A, p_B, test) cell in that nesting order.

    Cells where strength compensation is undefined carry a NaN statistic and
    are not certified.
    """
    rng = rng if rng is not None else RngStream()
    rho = as_density(state)
    out = []
    cell = 0
    for p_a in grid.p_a_values:
        for p_b in grid.p_b_values:
            for test in grid.tests:
                try:
                    out.append(certify(rho, test, p_a, p_b, grid.shots, rng.child(cell)))
                except ZeroStrength:
                    out.append(_undefined(CertTest(test), p_a, p_b))
                cell += 1
    return out


@dataclass(frozen=True)
class RecoveryRow:
    p: float
    before: StateMetrics
    after: StateMetrics | None
    success_probability: float
    matched_trials: int = 0  # sampled mode only


def sweep_recovery(
    p_values: Sequence[float],
    state,
    plan: AveragingPlan,
    shots: int = 0,
    policy: ReversalPolicy = ReversalPolicy.ALL_BRANCHES,
    rng: RngStream | None = None,
    target: PureState | None = None,
) -> list[RecoveryRow]:
    """Averaged state metrics before and after recovery with p_A = p_B = p.

    "Before" values are exact outcome averages.  "After" values are exact
    matched-outcome averages when ``shots`` is 0; otherwise ``shots`` trials
    per direction pair are simulated and the metrics averaged over the
    matched ones.
    """
    rng = rng if rng is not None else RngStream()
    if target is None:
        target = state if isinstance(state, PureState) else PHI_PLUS
    rho = as_density(state)
    rows = []
    for k, p in enumerate(p_values):
        before = averaged_metrics(rho, plan, p, p, target)
        if not shots:
            after, success = recovery_metrics(rho, plan, p, p, target, policy)
            rows.append(RecoveryRow(p, before, after, success))
            continue
        acc = np.zeros(4)
        matched = trials = 0
        for j, (r_a, r_b) in enumerate(plan.pairs):
            batch = run_trials(rho, p, p, (r_a, r_b), shots, policy, rng.child(k * 64 + j))
            trials += batch.trials
            m_a, m_b = WeakMeasurement(p, r_a), WeakMeasurement(p, r_b)
            for i, (l_a, l_b) in enumerate(OUTCOME_PAIRS):
                n = batch.matched_counts[i]
                if n == 0:
                    continue
                m = state_metrics(recovered_state(rho, m_a, m_b, l_a, l_b), target)
                acc += n * np.array([m.fidelity, m.purity, m.concurrence, m.eof])
                matched += n
        after = StateMetrics(*(acc / matched)) if matched else None
        rows.append(RecoveryRow(p, before, after, matched / trials, matched))
    return rows


@dataclass(frozen=True)
class TradeoffRow:
    p: float
    reversibility: float
    chsh: float
    steering: float
    eof_steering: float
    eof_chsh: float


def tradeoff_curves(p_values: Sequence[float], state=PHI_PLUS) -> list[TradeoffRow]:
    """Reversibility, CHSH value, steering value and averaged EoF versus p = p_A = p_B."""
    rho = as_density(state)
    target = state if isinstance(state, PureState) else PHI_PLUS
    rows = []
    for p in p_values:
        # compensation makes S3 independent of the trusted strength, so p_B = 1
        # gives the p_B -> 0 limit as well
        s3 = certify(rho, CertTest.STEERING_A_TO_B, p, 1.0).statistic
        rows.append(
            TradeoffRow(
                p=p,
                reversibility=reversibility(p, p),
                chsh=certify(rho, CertTest.CHSH, p, p).statistic,
                steering=s3,
                eof_steering=averaged_metrics(rho, PLANS["steering"], p, p, target).eof,
                eof_chsh=averaged_metrics(rho, PLANS["chsh"], p, p, target).eof,
            )
        )
    return rows
