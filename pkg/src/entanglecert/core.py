"""Two-qubit linear algebra and state vocabulary.

Single-qubit operators are 2x2 complex numpy arrays and joint operators are
4x4 arrays in the basis |00>, |01>, |10>, |11> with Alice as the left tensor
factor (|0> = |H>, |1> = |V>).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidState, NonHermitianInput, NonUnitDirection

HERMITIAN_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "x": SX, "y": SY, "z": SZ}

for _m in (I2, SX, SY, SZ):
    _m.flags.writeable = False


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product a (Alice) x b (Bob)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError("tensor_product expects two 2x2 operators")
    return kron2(a, b)


def kron2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unchecked 2x2 (x) 2x2 Kronecker product for hot paths."""
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(4, 4)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - adjoint(m)), initial=0.0) <= tol)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(n - 1.0) > 1e-12:
            raise NonUnitDirection(f"Bloch vector ({self.x}, {self.y}, {self.z}) has norm {n}")

    @classmethod
    def normalized(cls, x: float, y: float, z: float) -> "BlochVector":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise NonUnitDirection("zero vector has no direction")
        return cls(x / n, y / n, z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def sigma(self) -> np.ndarray:
        """The Pauli observable r . sigma."""
        x, y, z = self.x, self.y, self.z
        return np.array([[z, x - 1j * y], [x + 1j * y, -z]])


_S2 = 1 / math.sqrt(2)
X_HAT = BlochVector(1.0, 0.0, 0.0)
Y_HAT = BlochVector(0.0, 1.0, 0.0)
Z_HAT = BlochVector(0.0, 0.0, 1.0)
ZPX_HAT = BlochVector(_S2, 0.0, _S2)  # (z + x)/sqrt(2)
ZMX_HAT = BlochVector(-_S2, 0.0, _S2)  # (z - x)/sqrt(2)
NAMED_DIRECTIONS = {"x": X_HAT, "y": Y_HAT, "z": Z_HAT, "z+x": ZPX_HAT, "z-x": ZMX_HAT}


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.shape != (4,):
            raise InvalidState(f"two-qubit pure state needs 4 amplitudes, got {a.shape}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > 1e-12:
            raise InvalidState(f"state norm {norm} is not 1")
        object.__setattr__(self, "amplitudes", _frozen(a))

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(a / np.linalg.norm(a))

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        # a normalized outer product is a valid state by construction
        return DensityMatrix._unchecked(np.outer(a, a.conj()))

    def __repr__(self):
        return f"PureState({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidState(f"two-qubit density matrix must be 4x4, got {m.shape}")
        if not is_hermitian(m):
            raise InvalidState("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise InvalidState(f"density matrix trace {tr} is not 1")
        evals, _ = hermitian_eigensystem(m)
        if evals[-1] < -NEGATIVE_EIG_TOL:
            raise InvalidState(f"density matrix has negative eigenvalue {evals[-1]}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def _unchecked(cls, m: np.ndarray) -> "DensityMatrix":
        # hot paths only: m is already a valid density matrix by construction
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _frozen(m))
        return obj

    def __repr__(self):
        return f"DensityMatrix(\n{np.array2string(self.matrix, precision=6)})"


def as_density(state: PureState | DensityMatrix) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.density()
    return state


def basis_state(index: int) -> PureState:
    a = np.zeros(4, dtype=complex)
    a[index] = 1.0
    return PureState(a)


def _jacobi_rotation(h: np.ndarray, p: int, q: int) -> np.ndarray:
    """Unitary that zeroes h[p, q] of the Hermitian matrix h."""
    n = h.shape[0]
    hpq = h[p, q]
    b = abs(hpq)
    phase = hpq / b
    theta = 0.5 * math.atan2(2.0 * b, (h[q, q] - h[p, p]).real)
    c, s = math.cos(theta), math.sin(theta)
    u = np.eye(n, dtype=complex)
    # diag(1, conj(phase)) followed by the real rotation [[c, s], [-s, c]]
    u[p, p] = c
    u[p, q] = s
    u[q, p] = -s * np.conj(phase)
    u[q, q] = c * np.conj(phase)
    return u


def hermitian_eigensystem(m: np.ndarray, max_sweeps: int = 50) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a small Hermitian matrix.

    Returns eigenvalues sorted descending and the matching eigenvectors as
    columns, so that ``m == V @ diag(w) @ V.conj().T``.
    """
    h = np.array(m, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h):
        raise NonHermitianInput("matrix is not Hermitian within 1e-10")
    n = h.shape[0]
    h = 0.5 * (h + adjoint(h))
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(h), 1e-300)
    prev_off = math.inf
    for _ in range(max_sweeps):
        off = np.linalg.norm(h - np.diag(np.diag(h)))
        # quadratic convergence stalls at rounding level
        if off <= 1e-16 * scale or off >= prev_off:
            break
        prev_off = off
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(h[p, q]) <= 1e-300:
                    continue
                u = _jacobi_rotation(h, p, q)
                h = adjoint(u) @ h @ u
                h[p, q] = h[q, p] = 0.0
                v = v @ u
    evals = np.real(np.diag(h))
    order = np.argsort(-evals, kind="stable")
    return evals[order], v[:, order]


def hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix."""
    evals, vecs = hermitian_eigensystem(m)
    if evals[-1] < -NEGATIVE_EIG_TOL:
        raise NonHermitianInput(f"matrix has eigenvalue {evals[-1]} below -1e-9")
    roots = np.sqrt(np.clip(evals, 0.0, None))
    s = (vecs * roots) @ adjoint(vecs)
    return 0.5 * (s + adjoint(s))


PHI_PLUS = PureState(np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2))
MAXIMALLY_MIXED = DensityMatrix(np.eye(4, dtype=complex) / 4)
