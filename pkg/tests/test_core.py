import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from entanglecert.core import (
    I2,
    PAULIS,
    PHI_PLUS,
    SX,
    SY,
    SZ,
    ZMX_HAT,
    ZPX_HAT,
    BlochVector,
    DensityMatrix,
    PureState,
    adjoint,
    basis_state,
    hermitian_eigensystem,
    hermitian_sqrt,
    tensor_product,
)
from entanglecert.errors import InvalidState, NonHermitianInput, NonUnitDirection
from entanglecert.monitor import mixed_state


def test_identity_tensor_identity():
    assert np.array_equal(tensor_product(I2, I2), np.eye(4))


def test_sz_tensor_sz_is_diagonal():
    assert np.array_equal(tensor_product(SZ, SZ), np.diag([1, -1, -1, 1]))


def test_bit_flip_acts_on_alice():
    out = tensor_product(SX, I2) @ basis_state(0).amplitudes
    assert np.array_equal(out, basis_state(2).amplitudes)


def test_tensor_product_rejects_wrong_shape():
    with pytest.raises(ValueError):
        tensor_product(np.eye(4), I2)


def test_double_adjoint_is_exact(nprng):
    for _ in range(20):
        m = nprng.normal(size=(4, 4)) + 1j * nprng.normal(size=(4, 4))
        assert np.max(np.abs(adjoint(adjoint(m)) - m)) == 0.0


def test_trace_factorizes_over_tensor_product(nprng):
    for _ in range(50):
        a, b = random_hermitian(nprng, 2), random_hermitian(nprng, 2)
        assert abs(np.trace(tensor_product(a, b)) - np.trace(a) * np.trace(b)) < 1e-10


def test_pauli_algebra_exact():
    sig = [SX, SY, SZ]
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    for i in range(3):
        for j in range(3):
            expect = (i == j) * I2 + 1j * sum(eps[i, j, k] * sig[k] for k in range(3))
            assert np.array_equal(sig[i] @ sig[j], expect)


def test_bloch_constants_and_validation():
    assert math.isclose(ZPX_HAT.x, 1 / math.sqrt(2)) and math.isclose(ZPX_HAT.z, 1 / math.sqrt(2))
    assert ZMX_HAT.x < 0
    with pytest.raises(NonUnitDirection):
        BlochVector(1.0, 1.0, 0.0)
    with pytest.raises(NonUnitDirection):
        BlochVector.normalized(0, 0, 0)


def test_state_validation():
    with pytest.raises(InvalidState):
        PureState(np.array([1, 1, 0, 0]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.eye(4))
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.array([[0.5, 1j, 0, 0], [1j, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))


def test_states_are_immutable():
    with pytest.raises(ValueError):
        PHI_PLUS.amplitudes[0] = 0.0


class TestEigensystem:
    def test_diagonal(self):
        w, _ = hermitian_eigensystem(np.diag([1.0, 2.0, 3.0, 4.0]))
        assert np.allclose(w, [4, 3, 2, 1], atol=0)

    def test_zz(self):
        w, _ = hermitian_eigensystem(tensor_product(SZ, SZ))
        assert np.array_equal(w, [1, 1, -1, -1])

    def test_bell_projector(self):
        w, v = hermitian_eigensystem(PHI_PLUS.density().matrix)
        assert np.allclose(w, [1, 0, 0, 0], atol=1e-15)
        assert abs(abs(np.vdot(v[:, 0], PHI_PLUS.amplitudes)) - 1) < 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            hermitian_eigensystem(np.triu(np.ones((4, 4))))

    def test_matches_lapack_and_reconstructs(self, nprng):
        for _ in range(200):
            h = random_hermitian(nprng)
            w, v = hermitian_eigensystem(h)
            assert np.all(np.diff(w) <= 0)
            assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) < 1e-9
            assert np.max(np.abs(w - np.linalg.eigvalsh(h)[::-1])) < 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=32, max_size=32))
    def test_eigenvalue_sum_is_trace(self, xs):
        a = np.array(xs[:16]).reshape(4, 4) + 1j * np.array(xs[16:]).reshape(4, 4)
        h = a + a.conj().T
        w, _ = hermitian_eigensystem(h)
        assert abs(w.sum() - np.trace(h).real) < 1e-9


class TestSqrt:
    def test_identity(self):
        assert np.allclose(hermitian_sqrt(np.eye(4)), np.eye(4), atol=1e-15)

    def test_diagonal(self):
        assert np.allclose(hermitian_sqrt(np.diag([4.0, 1.0, 0.0, 0.0])), np.diag([2.0, 1.0, 0.0, 0.0]), atol=1e-15)

    def test_mixed_state_reconstruction(self):
        rho = mixed_state(0.3).matrix
        s = hermitian_sqrt(rho)
        assert np.max(np.abs(s @ s - rho)) < 1e-8
        assert np.max(np.abs(s - s.conj().T)) < 1e-15
        assert np.linalg.eigvalsh(s).min() > -1e-12

    def test_random_states(self, nprng):
        for _ in range(50):
            rho = random_density(nprng).matrix
            s = hermitian_sqrt(rho)
            assert np.max(np.abs(s @ s - rho)) < 1e-8

    def test_rejects_negative(self):
        with pytest.raises(NonHermitianInput):
            hermitian_sqrt(np.diag([1.0, -0.1, 0, 0]))

    def test_clamps_tiny_negative(self):
        s = hermitian_sqrt(np.diag([1.0, -5e-10, 0, 0]))
        assert s[1, 1] == 0.0


def test_pauli_table_complete():
    assert set(PAULIS) == {"I", "x", "y", "z"}
