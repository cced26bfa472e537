"""Drifting entanglement source with witness-gated selection.

The source emits rho_mix(gamma) = (1 - gamma)|Phi+><Phi+| + gamma/2 (|HH><HH| + |VV><VV|)
with a decoherence degree gamma that drifts as a clamped Ornstein-Uhlenbeck
process.  Each time window is certified with the weak-measurement witness,
recovered, and then used for a CHSH test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certify import CertTest, certify
from .core import PHI_PLUS, Z_HAT, DensityMatrix
from .errors import OutOfRange, ValidationError
from .measurement import PLUS, WeakMeasurement
from .protocol import recovered_state
from .rng import RngStream

_HH_VV = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)


def mixed_state(gamma: float) -> DensityMatrix:
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma = {gamma} out of [0,1]")
    return DensityMatrix((1.0 - gamma) * PHI_PLUS.density().matrix + gamma * _HH_VV)


@dataclass
class OUProcess:
    mu: float = 0.3
    theta: float = 0.05
    sigma: float = 0.05
    dt: float = 1.0
    gamma: float | None = None  # current value; starts at mu

    def __post_init__(self):
        if self.gamma is None:
            self.gamma = self.mu
        self.gamma = min(1.0, max(0.0, float(self.gamma)))


def ou_step(process: OUProcess, rng: RngStream) -> float:
    """Advance one Euler-Maruyama step, clamp to [0,1], and return the new value."""
    g = process.gamma
    g += process.theta * (process.mu - g) * process.dt
    if process.sigma:
        g += process.sigma * math.sqrt(process.dt) * float(rng.normal())
    process.gamma = min(1.0, max(0.0, g))
    return process.gamma


def ou_path(process: OUProcess, steps: int, rng: RngStream) -> np.ndarray:
    return np.array([ou_step(process, rng) for _ in range(steps)])


@dataclass(frozen=True)
class SelectionConfig:
    threshold: float = -0.4
    window_shots: int = 10_000
    p_a: float = 0.7
    p_b: float = 0.7
    exact: bool = False
    bell_strength: float = 1.0

    def __post_init__(self):
        if not self.threshold < 0:
            raise ValidationError("threshold", f"threshold must be negative, got {self.threshold}")
        if not self.exact and self.window_shots <= 0:
            raise ValidationError("shots", "window shots must be positive in sampled mode")
        for name in ("p_a", "p_b"):
            p = getattr(self, name)
            if not 0.0 < p <= 1.0:
                raise ValidationError(name, f"{name} must lie in (0,1] for the witness, got {p}")


@dataclass(frozen=True)
class WindowRecord:
    index: int
    gamma: float
    witness: float
    witness_se: float
    selected: bool
    chsh: float
    chsh_se: float


@dataclass(frozen=True)
class EnsembleReport:
    windows: tuple[WindowRecord, ...]
    s_selected: float
    s_selected_se: float
    s_all: float
    s_all_se: float
    config: SelectionConfig = field(default_factory=SelectionConfig)

    @property
    def n_selected(self) -> int:
        return sum(w.selected for w in self.windows)


def _mean_with_error(records: list[WindowRecord]) -> tuple[float, float]:
    if not records:
        return math.nan, math.nan
    n = len(records)
    mean = sum(r.chsh for r in records) / n
    return mean, math.sqrt(sum(r.chsh_se**2 for r in records)) / n


def evaluate_window(index: int, gamma: float, config: SelectionConfig, rng: RngStream) -> WindowRecord:
    rho = mixed_state(gamma)
    shots = 0 if config.exact else config.window_shots
    w = certify(rho, CertTest.WITNESS, config.p_a, config.p_b, shots, rng.child(0))
    # matched reversal undoes the weak measurement exactly, so every matched
    # branch yields the same recovered copy
    recovered = recovered_state(rho, WeakMeasurement(config.p_a, Z_HAT), WeakMeasurement(config.p_b, Z_HAT), PLUS, PLUS)
    s = certify(recovered, CertTest.CHSH, config.bell_strength, config.bell_strength, shots, rng.child(1))
    return WindowRecord(
        index=index,
        gamma=gamma,
        witness=w.statistic,
        witness_se=w.standard_error,
        selected=w.statistic < config.threshold,
        chsh=s.statistic,
        chsh_se=s.standard_error,
    )


def run_monitoring(config: SelectionConfig, ou: OUProcess, windows: int, rng: RngStream) -> EnsembleReport:
    """Generate the drift path, then certify, select and Bell-test each window.

    The path draws from ``rng.child(0)`` and window ``i`` from
    ``rng.child(i + 1)``, so window evaluation order does not matter.
    """
    if windows <= 0:
        raise ValidationError("windows", "windows must be positive")
    path = ou_path(ou, windows, rng.child(0))
    records = [evaluate_window(i, float(g), config, rng.child(i + 1)) for i, g in enumerate(path)]
    sel = [r for r in records if r.selected]
    s_sel, s_sel_se = _mean_with_error(sel)
    s_all, s_all_se = _mean_with_error(records)
    return EnsembleReport(tuple(records), s_sel, s_sel_se, s_all, s_all_se, config)
