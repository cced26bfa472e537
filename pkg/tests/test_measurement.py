import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_direction, random_pure
from entanglecert.core import I2, MAXIMALLY_MIXED, PHI_PLUS, SX, SZ, X_HAT, Z_HAT, ZPX_HAT, BlochVector, basis_state
from entanglecert.errors import NonUnitDirection, OutOfRange, ZeroProbabilityBranch
from entanglecert.measurement import (
    OUTCOME_PAIRS,
    ReversalMeasurement,
    WeakMeasurement,
    apply_measurement,
    branch_probabilities,
    generalized_observable,
    joint_outcome_probability,
    projector,
    reversal_operator,
    sample_outcomes,
    strength_from_waveplate,
    weak_operator,
)
from entanglecert.rng import RngStream

unit_vectors = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda v: sum(x * x for x in v) > 1e-3)


class TestProjector:
    def test_z_plus(self):
        assert np.array_equal(projector(Z_HAT, 1), np.diag([1, 0]))

    def test_x_plus(self):
        assert np.allclose(projector(X_HAT, 1), 0.5 * np.ones((2, 2)), atol=0)

    def test_diagonal_direction(self):
        p = projector(ZPX_HAT, 1)
        expected = 0.5 * (I2 + (SZ + SX) / math.sqrt(2))
        assert np.max(np.abs(p - expected)) < 1e-15
        assert np.max(np.abs(p @ p - p)) < 1e-15
        assert np.max(np.abs(p + projector(ZPX_HAT, -1) - I2)) < 1e-15

    def test_rejects_raw_vector(self):
        with pytest.raises(NonUnitDirection):
            projector((0, 0, 1), 1)


class TestWeakOperator:
    def test_projective_limit(self):
        assert np.allclose(weak_operator(WeakMeasurement(1.0, Z_HAT), 1), np.diag([1, 0]), atol=0)

    def test_no_measurement_limit(self):
        assert np.allclose(weak_operator(WeakMeasurement(0.0, Z_HAT), 1), I2 / math.sqrt(2), atol=1e-16)

    def test_intermediate_strength(self):
        k = weak_operator(WeakMeasurement(0.6, Z_HAT), 1)
        assert np.allclose(k, np.diag([math.sqrt(0.8), math.sqrt(0.2)]), atol=1e-15)

    def test_strength_validated(self):
        with pytest.raises(OutOfRange):
            WeakMeasurement(1.2, Z_HAT)


class TestReversalOperator:
    def test_zero_strength(self, nprng):
        for _ in range(5):
            r = ReversalMeasurement(0.0, random_direction(nprng))
            for l in (1, -1):
                assert np.allclose(reversal_operator(r, l), I2 / math.sqrt(2), atol=1e-15)

    def test_intermediate_strength(self):
        k = reversal_operator(ReversalMeasurement(0.6, Z_HAT), 1)
        assert np.allclose(k, np.diag([math.sqrt(0.2), math.sqrt(0.8)]), atol=1e-15)

    def test_composition_is_scaled_identity(self):
        p = 0.6
        prod = reversal_operator(ReversalMeasurement(p, Z_HAT), 1) @ weak_operator(WeakMeasurement(p, Z_HAT), 1)
        assert np.max(np.abs(prod - math.sqrt(1 - p * p) / 2 * I2)) < 1e-15


@pytest.mark.parametrize("p", [i / 10 for i in range(11)])
def test_completeness(p, nprng):
    for _ in range(20):
        r = random_direction(nprng)
        for build, meas in ((weak_operator, WeakMeasurement(p, r)), (reversal_operator, ReversalMeasurement(p, r))):
            total = sum(build(meas, l).conj().T @ build(meas, l) for l in (1, -1))
            assert np.max(np.abs(total - I2)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), unit_vectors, st.sampled_from([1, -1]))
def test_generalized_observable_and_reversal_identity(p, v, l):
    r = BlochVector.normalized(*v)
    m = WeakMeasurement(p, r)
    assert np.max(np.abs(generalized_observable(m) - p * r.sigma())) < 1e-12
    prod = reversal_operator(m.reversal(), l) @ weak_operator(m, l)
    assert np.max(np.abs(prod - math.sqrt(1 - p * p) / 2 * I2)) < 1e-12


def test_generalized_observable_examples():
    assert np.allclose(generalized_observable(WeakMeasurement(1.0, Z_HAT)), SZ, atol=1e-15)
    assert np.allclose(generalized_observable(WeakMeasurement(0.5, X_HAT)), 0.5 * SX, atol=1e-15)
    assert np.allclose(generalized_observable(WeakMeasurement(0.0, ZPX_HAT)), 0, atol=1e-15)


class TestJointProbability:
    def test_bell_state_closed_form(self):
        p = 0.6
        m = WeakMeasurement(p, Z_HAT)
        assert abs(joint_outcome_probability(PHI_PLUS, m, m, 1, 1) - (1 + p * p) / 4) < 1e-15
        assert abs(joint_outcome_probability(PHI_PLUS, m, m, 1, 1) - 0.34) < 1e-15

    def test_perfect_correlation(self):
        m = WeakMeasurement(1.0, Z_HAT)
        assert joint_outcome_probability(PHI_PLUS, m, m, 1, -1) == 0.0

    def test_maximally_mixed_uniform(self, nprng):
        for _ in range(10):
            ma = WeakMeasurement(nprng.uniform(), random_direction(nprng))
            mb = WeakMeasurement(nprng.uniform(), random_direction(nprng))
            assert np.allclose(branch_probabilities(MAXIMALLY_MIXED, ma, mb), 0.25, atol=1e-15)

    def test_probabilities_sum_to_one(self, nprng):
        for _ in range(50):
            psi = random_pure(nprng)
            ma = WeakMeasurement(nprng.uniform(), random_direction(nprng))
            mb = WeakMeasurement(nprng.uniform(), random_direction(nprng))
            assert abs(branch_probabilities(psi, ma, mb).sum() - 1) < 1e-12


class TestApplyMeasurement:
    def test_trivial_operators(self):
        post, prob = apply_measurement(PHI_PLUS, I2 / math.sqrt(2), I2 / math.sqrt(2))
        assert abs(prob - 0.25) < 1e-15
        assert np.allclose(post.amplitudes, PHI_PLUS.amplitudes, atol=1e-15)

    def test_projective(self):
        k = weak_operator(WeakMeasurement(1.0, Z_HAT), 1)
        post, prob = apply_measurement(PHI_PLUS, k, k)
        assert abs(prob - 0.5) < 1e-15
        assert np.allclose(post.amplitudes, basis_state(0).amplitudes, atol=1e-15)

    def test_weak(self):
        k = weak_operator(WeakMeasurement(0.6, Z_HAT), 1)
        post, prob = apply_measurement(PHI_PLUS, k, k)
        expected = np.array([0.8, 0, 0, 0.2]) / math.sqrt(2 * 0.34)
        assert abs(prob - 0.34) < 1e-15
        assert np.allclose(post.amplitudes, expected, atol=1e-15)

    def test_density_branch_matches_pure(self):
        k = weak_operator(WeakMeasurement(0.6, Z_HAT), -1)
        pure, p1 = apply_measurement(PHI_PLUS, k, k)
        mixed, p2 = apply_measurement(PHI_PLUS.density(), k, k)
        assert abs(p1 - p2) < 1e-15
        assert np.allclose(mixed.matrix, pure.density().matrix, atol=1e-15)

    def test_zero_branch(self):
        kp = weak_operator(WeakMeasurement(1.0, Z_HAT), 1)
        km = weak_operator(WeakMeasurement(1.0, Z_HAT), -1)
        with pytest.raises(ZeroProbabilityBranch):
            apply_measurement(PHI_PLUS, kp, km)


class TestSampling:
    def test_projective_outcomes_correlated(self):
        m = WeakMeasurement(1.0, Z_HAT)
        rng = RngStream(5, 0)
        for _ in range(200):
            la, lb, post = sample_outcomes(PHI_PLUS, m, m, rng)
            assert la == lb

    def test_frequency_and_chi_square(self):
        p = 0.6
        m = WeakMeasurement(p, Z_HAT)
        probs = branch_probabilities(PHI_PLUS, m, m)
        n = 100_000
        idx = RngStream(11, 0).choice(probs, n)
        counts = np.bincount(idx, minlength=4)
        assert abs(counts[0] / n - 0.34) < 0.005
        chi2 = float(np.sum((counts - n * probs) ** 2 / (n * probs)))
        # 3 degrees of freedom, p = 0.001 critical value
        assert chi2 < 16.27

    def test_no_measurement_uniform(self):
        m = WeakMeasurement(0.0, X_HAT)
        counts = np.bincount(RngStream(2, 0).choice(branch_probabilities(PHI_PLUS, m, m), 100_000), minlength=4)
        assert np.all(np.abs(counts / 100_000 - 0.25) < 0.005)

    def test_sample_outcomes_post_state(self):
        m = WeakMeasurement(0.6, Z_HAT)
        la, lb, post = sample_outcomes(PHI_PLUS, m, m, RngStream(1, 1))
        expected, _ = apply_measurement(PHI_PLUS, weak_operator(m, la), weak_operator(m, lb))
        assert np.allclose(post.amplitudes, expected.amplitudes)


def _sequence(stream):
    m = WeakMeasurement(0.5, ZPX_HAT)
    rng = RngStream(99, stream)
    return [sample_outcomes(PHI_PLUS, m, m, rng)[:2] for _ in range(50)]


def test_determinism_across_threads():
    serial = [_sequence(s) for s in range(8)]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(_sequence, reversed(range(8))))
    assert serial == parallel[::-1]
    assert serial[0] != serial[1]


def test_rng_child_is_stable():
    a = RngStream(3, 4).child(7).uniform(5)
    b = RngStream(3, 4).child(7).uniform(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RngStream(3, 4).child(8).uniform(5))


@pytest.mark.parametrize(
    "theta, expected",
    [(0.0, 1.0), (math.pi / 8, 0.0), (math.pi / 16, math.sqrt(2) / 2)],
)
def test_waveplate_strength(theta, expected):
    assert abs(strength_from_waveplate(theta) - expected) < 1e-15


def test_outcome_pair_order():
    assert OUTCOME_PAIRS == ((1, 1), (1, -1), (-1, 1), (-1, -1))
