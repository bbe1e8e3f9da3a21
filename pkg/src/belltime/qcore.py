"""Small dense complex linear algebra and projective (Lüders) measurement.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; dimensions here
never exceed 4, so nothing sparse or clever is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ATOL = 1e-12
DEGENERATE_NORM = 1e-15

ComplexMatrix = np.ndarray

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class NumericalDegeneracyError(ArithmeticError):
    """A measurement branch with (numerically) zero norm was selected."""


@dataclass(frozen=True)
class QuantumState:
    """Normalized pure state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValueError("state must have at least one amplitude")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "QuantumState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm < DEGENERATE_NORM:
            raise NumericalDegeneracyError("cannot normalize a zero vector")
        return cls(amps / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def __eq__(self, other):
        if not isinstance(other, QuantumState):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)


@dataclass(frozen=True)
class MeasurementOutcome:
    value: int
    post_state: QuantumState


# kets -----------------------------------------------------------------------

H = np.array([1, 0], dtype=complex)
V = np.array([0, 1], dtype=complex)


def product_state(*kets) -> QuantumState:
    """Tensor product of single-particle kets, e.g. ``product_state(H, V)``."""
    vec = np.ones(1, dtype=complex)
    for ket in kets:
        vec = np.kron(vec, ket)
    return QuantumState.from_amplitudes(vec)


def singlet() -> QuantumState:
    """(|H1 V2> - |V1 H2>) / sqrt(2) in the basis HH, HV, VH, VV."""
    return QuantumState.from_amplitudes(np.kron(H, V) - np.kron(V, H))


# algebra --------------------------------------------------------------------

def pauli(axis: str) -> ComplexMatrix:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected x, y or z") from None


def identity(dim: int = 2) -> ComplexMatrix:
    return np.eye(dim, dtype=complex)


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("tensor expects square matrices")
    return np.kron(a, b)


def is_hermitian(m: ComplexMatrix, atol: float = ATOL) -> bool:
    return bool(np.allclose(m, np.conj(m.T), rtol=0, atol=atol))


def is_involutory(m: ComplexMatrix, atol: float = ATOL) -> bool:
    return bool(np.allclose(m @ m, np.eye(m.shape[0]), rtol=0, atol=atol))


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def expectation(state, op: ComplexMatrix) -> complex:
    """<psi|op|psi>."""
    psi = _amplitudes(state)
    op = np.asarray(op, dtype=complex)
    if op.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state dim {psi.size}, operator {op.shape}")
    return complex(np.vdot(psi, op @ psi))


def outcome_probabilities(state, observable: ComplexMatrix) -> tuple[float, float]:
    """Born probabilities (p_plus, p_minus) for a +/-1 valued observable."""
    psi = _amplitudes(state)
    _check_observable(observable, psi.size)
    proj = (np.eye(psi.size) + observable) / 2
    plus = proj @ psi
    p_plus = float(np.vdot(plus, plus).real)
    minus = psi - plus
    p_minus = float(np.vdot(minus, minus).real)
    return p_plus, p_minus


def _check_observable(observable: ComplexMatrix, dim: int) -> None:
    if observable.shape != (dim, dim):
        raise ValueError(f"dimension mismatch: state dim {dim}, observable {observable.shape}")
    if not (is_hermitian(observable) and is_involutory(observable)):
        raise ValueError("observable must be Hermitian with eigenvalues +/-1")


# measurement ----------------------------------------------------------------

def luders_batch(states: np.ndarray, observable: ComplexMatrix, u: np.ndarray):
    """Measure a +/-1 observable on each row of ``states`` using uniforms ``u``.

    Returns ``(outcomes, post_states)``. Outcome +1 is selected when
    ``u < p_plus``, so a row consumes exactly one uniform whatever happens.
    """
    states = np.asarray(states, dtype=complex)
    if states.ndim != 2:
        raise ValueError("states must be a 2-d array of shape (n, dim)")
    dim = states.shape[1]
    observable = np.asarray(observable, dtype=complex)
    _check_observable(observable, dim)
    proj = (np.eye(dim) + observable) / 2
    plus = states @ proj.T
    minus = states - plus
    norm2 = np.einsum("ij,ij->i", states.conj(), states).real
    p_plus = np.einsum("ij,ij->i", plus.conj(), plus).real / norm2
    take_plus = np.asarray(u) < p_plus
    outcomes = np.where(take_plus, 1, -1).astype(np.int8)
    branch = np.where(take_plus[:, None], plus, minus)
    branch_norm = np.sqrt(np.einsum("ij,ij->i", branch.conj(), branch).real)
    if np.any(branch_norm < DEGENERATE_NORM):
        raise NumericalDegeneracyError("selected measurement branch has zero norm")
    return outcomes, branch / branch_norm[:, None]


def measure_projective(state: QuantumState, observable: ComplexMatrix,
                       rng: np.random.Generator) -> MeasurementOutcome:
    """One Born-rule draw with Lüders collapse. Consumes one ``rng.random()``."""
    u = rng.random()
    outcomes, post = luders_batch(state.amplitudes[None, :], observable, np.array([u]))
    return MeasurementOutcome(int(outcomes[0]), QuantumState(post[0]))
