"""Local hidden-variable models and index-aligned clone ensembles.

A model is a sampler for lambda plus a responder per wing. Responders see
only their own analyzer angle, the lambda record and a pre-drawn uniform;
there is no argument through which the remote setting could leak in.
Everything is vectorized over the leading (element) axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .observables import ANGLE_MULTIPLIER, AnalyzerSetting, Kind, analyzer_observable
from .qcore import QuantumState, identity, luders_batch, singlet, tensor

Wing = Literal["A", "B"]

# (angles (n,), lam (n, dim), u (n,)) -> (outcomes int8 (n,), lam' (n, dim))
Responder = Callable[[np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
Sampler = Callable[[int, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class HiddenVariableModel:
    name: str
    kind: Kind
    dim: int
    dynamic: bool
    sampler: Sampler = field(repr=False)
    respond_a: Responder = field(repr=False)
    respond_b: Responder = field(repr=False)
    local: bool = True
    description: str = ""
    initial_state: np.ndarray | None = field(default=None, repr=False)

    def responder(self, wing: Wing) -> Responder:
        if wing == "A":
            return self.respond_a
        if wing == "B":
            return self.respond_b
        raise ValueError(f"unknown wing {wing!r}")


@dataclass
class CloneEnsemble:
    """N lambda records; every time bin starts from a copy of ``lam``."""

    model: str
    lam: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        if self.lam.ndim != 2 or self.lam.shape[0] < 1:
            raise ValueError("ensemble needs a (N, dim) lambda array with N >= 1")
        if not np.all(np.isfinite(self.lam)):
            raise ValueError("hidden variables must be finite")

    @property
    def n(self) -> int:
        return self.lam.shape[0]

    def clone(self) -> np.ndarray:
        return self.lam.copy()

    def save(self, path) -> None:
        """One tab-separated record per element: index, model, seed, lambda..."""
        seed = "" if self.seed is None else str(self.seed)
        lines = ["# index\tmodel\tseed\tlambda"]
        for i, row in enumerate(self.lam):
            values = "\t".join(format(float(x), ".17g") for x in row)
            lines.append(f"{i}\t{self.model}\t{seed}\t{values}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "CloneEnsemble":
        rows, model, seed = [], None, None
        for line in Path(path).read_text().splitlines():
            if not line or line.startswith("#"):
                continue
            index, name, seed_text, *values = line.split("\t")
            if int(index) != len(rows):
                raise ValueError(f"ensemble records out of order at index {index}")
            if model is None:
                model, seed = name, (int(seed_text) if seed_text else None)
            elif name != model:
                raise ValueError("ensemble file mixes models")
            rows.append([float(v) for v in values])
        if not rows:
            raise ValueError(f"{path}: no ensemble records")
        return cls(model, np.array(rows), seed)


def sample_ensemble(model: HiddenVariableModel, n: int, rng: np.random.Generator,
                    seed: int | None = None) -> CloneEnsemble:
    if n < 1:
        raise ValueError("ensemble size must be at least 1")
    lam = np.asarray(model.sampler(n, rng), dtype=float).reshape(n, model.dim)
    return CloneEnsemble(model.name, lam, seed)


def respond(model: HiddenVariableModel, setting: AnalyzerSetting, lam, rng: np.random.Generator,
            wing: Wing = "B"):
    """Outcome and updated lambda for one analyzer on one wing.

    ``lam`` may be a single record (shape ``(dim,)``) or a batch ``(n, dim)``;
    one uniform is drawn per record whether or not the model uses it.
    """
    if setting.kind != model.kind:
        raise ValueError(f"model {model.name!r} expects {model.kind} settings, got {setting.kind}")
    lam = np.asarray(lam, dtype=float)
    single = lam.ndim == 1
    batch = lam.reshape(-1, model.dim)
    u = rng.random(batch.shape[0])
    outcomes, new = model.responder(wing)(np.full(batch.shape[0], setting.angle), batch, u)
    if single:
        return int(outcomes[0]), new[0]
    return outcomes, new


# built-in models --------------------------------------------------------------

def _sign(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, 1, -1).astype(np.int8)


def _lambda_period(kind: Kind) -> float:
    # polarization angles repeat every pi, spin directions every 2 pi
    return 2 * math.pi / ANGLE_MULTIPLIER[kind]


def static_sign_model(kind: Kind = "photon") -> HiddenVariableModel:
    k = ANGLE_MULTIPLIER[kind]
    period = _lambda_period(kind)

    def sampler(n, rng):
        return rng.uniform(0.0, period, size=(n, 1))

    def respond_a(angle, lam, u):
        return _sign(np.cos(k * (angle - lam[:, 0]))), lam

    def respond_b(angle, lam, u):
        return -_sign(np.cos(k * (angle - lam[:, 0]))), lam

    return HiddenVariableModel(
        "static-sign", kind, 1, False, sampler, respond_a, respond_b,
        description="lambda uniform; A = sign cos k(a - lambda), B = -sign cos k(b - lambda)",
    )


def collapse_rotation_model(kind: Kind = "photon") -> HiddenVariableModel:
    """Each particle carries its own axis; a measurement is Malus-random and
    snaps the axis onto the analyzer (outcome +1) or its orthogonal (-1).

    lambda = (alice_axis, bob_axis), Bob's axis orthogonal to Alice's at the
    source. Illustrative of a measurement-updated local theory, nothing more.
    """
    k = ANGLE_MULTIPLIER[kind]
    period = _lambda_period(kind)
    flip = math.pi / k

    def sampler(n, rng):
        axis = rng.uniform(0.0, period, size=n)
        return np.column_stack([axis, np.mod(axis + flip, period)])

    def make(col):
        def responder(angle, lam, u):
            p_plus = np.cos(k * (angle - lam[:, col]) / 2) ** 2
            outcomes = np.where(u < p_plus, 1, -1).astype(np.int8)
            new = lam.copy()
            new[:, col] = np.mod(np.where(outcomes == 1, angle, angle + flip), period)
            return outcomes, new
        return responder

    return HiddenVariableModel(
        "collapse-rotation", kind, 2, True, sampler, make(0), make(1),
        description="Malus-random outcome, axis jumps to analyzer or its orthogonal",
    )


def _pack(states: np.ndarray) -> np.ndarray:
    return np.concatenate([states.real, states.imag], axis=1)


def _unpack(lam: np.ndarray) -> np.ndarray:
    d = lam.shape[1] // 2
    return lam[:, :d] + 1j * lam[:, d:]


def quantum_model(state: QuantumState | None = None, kind: Kind = "photon",
                  name: str = "qm-oracle") -> HiddenVariableModel:
    """Adapter exposing a two-qubit state as a 'hidden variable' (lambda = psi).

    Both wings act on the shared state with Lüders collapse, so this source
    is *not* local; it is here for comparison only.
    """
    state = singlet() if state is None else state
    if state.dim != 4:
        raise ValueError("quantum source needs a two-qubit state")
    packed = _pack(state.amplitudes[None, :])[0]

    def sampler(n, rng):
        return np.tile(packed, (n, 1))

    def make(wing):
        def responder(angle, lam, u):
            states = _unpack(lam)
            outcomes = np.empty(len(u), dtype=np.int8)
            post = np.empty_like(states)
            # angles are usually constant across a batch
            for value in np.unique(angle):
                mask = angle == value
                local = analyzer_observable(AnalyzerSetting(float(value), kind))
                op = tensor(local, identity()) if wing == "A" else tensor(identity(), local)
                outcomes[mask], post[mask] = luders_batch(states[mask], op, u[mask])
            return outcomes, _pack(post)
        return responder

    return HiddenVariableModel(
        name, kind, 8, True, sampler, make("A"), make("B"), local=False,
        description="shared two-qubit state with Lüders collapse (not a local model)",
        initial_state=state.amplitudes,
    )


def builtin_models(kind: Kind = "photon") -> list[HiddenVariableModel]:
    return [static_sign_model(kind), collapse_rotation_model(kind), quantum_model(None, kind)]


def get_model(name: str, kind: Kind = "photon") -> HiddenVariableModel:
    for model in builtin_models(kind):
        if model.name == name:
            return model
    known = ", ".join(m.name for m in builtin_models(kind))
    raise KeyError(f"unknown model {name!r} (known: {known})")
