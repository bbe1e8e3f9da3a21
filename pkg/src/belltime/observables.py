"""Analyzer observables, the Bell operator and its squared-operator identity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .qcore import (
    ComplexMatrix,
    QuantumState,
    expectation,
    identity,
    luders_batch,
    pauli,
    tensor,
)

Kind = Literal["photon", "electron"]

ANGLE_MULTIPLIER = {"photon": 2, "electron": 1}
CIRELSON = 2 * math.sqrt(2)

# Bob's negative angles give the singlet 2 sqrt 2; +22.5, +67.5 give 0.
OPTIMAL_PHOTON_MENU_DEG = (0.0, 45.0, -22.5, -67.5)
OPTIMAL_ELECTRON_MENU_DEG = (0.0, 90.0, -45.0, -135.0)


@dataclass(frozen=True)
class AnalyzerSetting:
    angle: float
    kind: Kind = "photon"

    def __post_init__(self):
        if self.kind not in ANGLE_MULTIPLIER:
            raise ValueError(f"unknown particle kind {self.kind!r}")
        if not math.isfinite(self.angle):
            raise ValueError("analyzer angle must be finite")

    @classmethod
    def degrees(cls, angle_deg: float, kind: Kind = "photon") -> "AnalyzerSetting":
        return cls(math.radians(angle_deg), kind)

    @property
    def multiplier(self) -> int:
        return ANGLE_MULTIPLIER[self.kind]

    @property
    def phase(self) -> float:
        """k * angle, the argument of the cos/sin mixture."""
        return self.multiplier * self.angle


def menu(angles_deg, kind: Kind = "photon") -> tuple[AnalyzerSetting, ...]:
    """Four settings (a, a', b, b') from degrees."""
    if len(angles_deg) != 4:
        raise ValueError("a menu needs exactly four angles: a, a', b, b'")
    return tuple(AnalyzerSetting.degrees(x, kind) for x in angles_deg)


def optimal_menu(kind: Kind = "photon") -> tuple[AnalyzerSetting, ...]:
    angles = OPTIMAL_PHOTON_MENU_DEG if kind == "photon" else OPTIMAL_ELECTRON_MENU_DEG
    return menu(angles, kind)


def analyzer_observable(s: AnalyzerSetting) -> ComplexMatrix:
    """cos(k a) sigma_z + sin(k a) sigma_x, with k = 2 for photons, 1 for electrons."""
    return math.cos(s.phase) * pauli("z") + math.sin(s.phase) * pauli("x")


def commutator(x: ComplexMatrix, y: ComplexMatrix) -> ComplexMatrix:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x @ y - y @ x


def commutator_closed_form(s1: AnalyzerSetting, s2: AnalyzerSetting) -> ComplexMatrix:
    """2i sigma_y sin(k (a' - a))."""
    if s1.kind != s2.kind:
        raise ValueError("closed form needs both settings of one particle kind")
    return 2j * pauli("y") * math.sin(s1.multiplier * (s2.angle - s1.angle))


@dataclass(frozen=True)
class BellOperatorSet:
    settings: tuple[AnalyzerSetting, AnalyzerSetting, AnalyzerSetting, AnalyzerSetting]
    A: ComplexMatrix = field(repr=False)
    A2: ComplexMatrix = field(repr=False)
    B: ComplexMatrix = field(repr=False)
    B2: ComplexMatrix = field(repr=False)
    S: ComplexMatrix = field(repr=False)

    @property
    def commutator_product(self) -> ComplexMatrix:
        """[A, A'] (x) [B, B']."""
        return tensor(commutator(self.A, self.A2), commutator(self.B, self.B2))


def bell_operator(a: AnalyzerSetting, a2: AnalyzerSetting,
                  b: AnalyzerSetting, b2: AnalyzerSetting) -> BellOperatorSet:
    """S = AB + A'B + AB' - A'B'."""
    if a.kind != a2.kind:
        raise ValueError("Alice's two settings must share a particle kind")
    if b.kind != b2.kind:
        raise ValueError("Bob's two settings must share a particle kind")
    A, A2, B, B2 = (analyzer_observable(s) for s in (a, a2, b, b2))
    S = tensor(A, B) + tensor(A2, B) + tensor(A, B2) - tensor(A2, B2)
    return BellOperatorSet((a, a2, b, b2), A, A2, B, B2, S)


def max_abs_eigenvalue(op: ComplexMatrix) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(op))))


def bell_squared_residual(ops: BellOperatorSet) -> float:
    """max |S^2 - (4 I - [A,A'] (x) [B,B'])| over matrix elements."""
    lhs = ops.S @ ops.S
    rhs = 4 * identity(4) - ops.commutator_product
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class ChshExpectation:
    """<S> together with the four correlations it is built from.

    ``chsh_lhs`` rearranges the same correlations into the two-absolute-value
    combination |E(a,b) - E(a,b')| + |E(a',b') + E(a',b)|.
    """

    value: float
    E_ab: float
    E_a2b: float
    E_ab2: float
    E_a2b2: float

    @property
    def chsh_lhs(self) -> float:
        return abs(self.E_ab - self.E_ab2) + abs(self.E_a2b2 + self.E_a2b)


def _real(z: complex) -> float:
    if abs(z.imag) > 1e-12:
        raise ValueError(f"expectation of a Hermitian operator has imaginary part {z.imag!r}")
    return z.real


def correlation(state: QuantumState, s1: AnalyzerSetting, s2: AnalyzerSetting) -> float:
    return _real(expectation(state, tensor(analyzer_observable(s1), analyzer_observable(s2))))


def chsh_expectation(state: QuantumState, ops: BellOperatorSet) -> ChshExpectation:
    _require_two_qubits(state)
    E = {
        name: _real(expectation(state, tensor(x, y)))
        for name, x, y in (("ab", ops.A, ops.B), ("a2b", ops.A2, ops.B),
                           ("ab2", ops.A, ops.B2), ("a2b2", ops.A2, ops.B2))
    }
    return ChshExpectation(_real(expectation(state, ops.S)),
                           E["ab"], E["a2b"], E["ab2"], E["a2b2"])


def s_squared_expectation(state: QuantumState, ops: BellOperatorSet) -> float:
    _require_two_qubits(state)
    return _real(expectation(state, ops.S @ ops.S))


def _require_two_qubits(state: QuantumState) -> None:
    if state.dim != 4:
        raise ValueError(f"dimension mismatch: expected a two-qubit state, got dim {state.dim}")


def _local_commutator_axis(x: ComplexMatrix, y: ComplexMatrix):
    """Write [x, y] = 2i c O with O Hermitian involutory, c >= 0."""
    h = commutator(x, y) / 2j
    c = max_abs_eigenvalue(h)
    if c < 1e-15:
        return 0.0, pauli("z")
    return c, h / c


def sample_s_squared(state: QuantumState, ops: BellOperatorSet, n: int,
                     rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo <S^2> from local +/-1 outcomes.

    S^2 = 4 + 4 c_A c_B O_A (x) O_B, where [A,A'] = 2i c_A O_A and likewise for
    Bob, so measuring O_A on Alice's particle and O_B on Bob's and averaging
    the outcome product estimates <S^2>. Returns (mean, stderr).
    """
    _require_two_qubits(state)
    if n < 2:
        raise ValueError("need at least two samples")
    c_a, o_a = _local_commutator_axis(ops.A, ops.A2)
    c_b, o_b = _local_commutator_axis(ops.B, ops.B2)
    states = np.broadcast_to(state.amplitudes, (n, 4))
    u = rng.random((n, 2))
    alice, states = luders_batch(states, tensor(o_a, identity()), u[:, 0])
    bob, _ = luders_batch(states, tensor(identity(), o_b), u[:, 1])
    samples = 4.0 + 4.0 * c_a * c_b * (alice.astype(float) * bob)
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n))


# sweeps ---------------------------------------------------------------------

def random_setting(rng: np.random.Generator, kind: Kind) -> AnalyzerSetting:
    return AnalyzerSetting(float(rng.uniform(-math.pi, math.pi)), kind)


def _batch_observables(phase: np.ndarray) -> np.ndarray:
    """(n, 2, 2) stack of cos(phase) sigma_z + sin(phase) sigma_x."""
    c, s = np.cos(phase)[:, None, None], np.sin(phase)[:, None, None]
    return c * pauli("z") + s * pauli("x")


def _batch_kron(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    return np.einsum("nij,nkl->nikjl", x, y).reshape(n, 4, 4)


def s_squared_identity_sweep(n: int, rng: np.random.Generator, kinds=("photon", "electron")) -> dict[str, float]:
    """Max S^2 identity residual and max |eigenvalue| of S over random quadruples.

    Each of Alice's and Bob's sides draws its kind independently from ``kinds``.
    Vectorized over the n quadruples.
    """
    k = np.array([ANGLE_MULTIPLIER[x] for x in kinds])
    k_alice = k[rng.integers(len(kinds), size=n)]
    k_bob = k[rng.integers(len(kinds), size=n)]
    theta = rng.uniform(-math.pi, math.pi, size=(n, 4))
    A, A2 = (_batch_observables(k_alice * theta[:, i]) for i in (0, 1))
    B, B2 = (_batch_observables(k_bob * theta[:, i]) for i in (2, 3))
    S = _batch_kron(A, B) + _batch_kron(A2, B) + _batch_kron(A, B2) - _batch_kron(A2, B2)
    comm = _batch_kron(A @ A2 - A2 @ A, B @ B2 - B2 @ B)
    residual = S @ S - (4 * np.eye(4) - comm)
    return {"s_squared_identity_residual": float(np.max(np.abs(residual))),
            "max_abs_eig_S": float(np.max(np.abs(np.linalg.eigvalsh(S))))}


def commutator_sweep(n: int, rng: np.random.Generator, kind: Kind) -> float:
    """Max |[A(a), A(a')] - 2i sigma_y sin k(a' - a)| over random pairs."""
    worst = 0.0
    for _ in range(n):
        s1, s2 = random_setting(rng, kind), random_setting(rng, kind)
        diff = commutator(analyzer_observable(s1), analyzer_observable(s2)) - commutator_closed_form(s1, s2)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst
