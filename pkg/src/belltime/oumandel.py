"""Ou-Mandel two-photon beam-splitter state and post-selected coincidences.

Modes are labelled ``"<detector><polarization>"``: 1x, 1y, 2x, 2y. The
two-photon state lives on four kets, in this order::

    |1_1x, 1_2y>,  |1_1y, 1_2x>,  |1_1x, 1_1y>,  |1_2x, 1_2y>

Only the first two put one photon at each detector and can give a
coincidence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar

Convention = Literal["annihilation", "creation"]

KETS = (("1x", "2y"), ("1y", "2x"), ("1x", "1y"), ("2x", "2y"))
ATOL = 1e-12


class UndefinedCorrelationError(ArithmeticError):
    """All four coincidence rates vanish, so E is 0/0."""


@dataclass(frozen=True)
class BeamSplitterParams:
    Tx: float
    Rx: float
    Ty: float
    Ry: float

    def __post_init__(self):
        for name in ("Tx", "Rx", "Ty", "Ry"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} = {value!r} is not a probability")
        if abs(self.Tx + self.Rx - 1) > ATOL or abs(self.Ty + self.Ry - 1) > ATOL:
            raise ValueError("need Tx + Rx = 1 and Ty + Ry = 1")

    @classmethod
    def from_transmissions(cls, Tx: float, Ty: float) -> "BeamSplitterParams":
        return cls(Tx, 1.0 - Tx, Ty, 1.0 - Ty)

    @classmethod
    def balanced(cls) -> "BeamSplitterParams":
        return cls(0.5, 0.5, 0.5, 0.5)


@dataclass(frozen=True)
class FockTwoPhotonState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != len(KETS):
            raise ValueError(f"expected {len(KETS)} amplitudes")
        if abs(np.vdot(amps, amps).real - 1) > ATOL:
            raise ValueError("two-photon state is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    def amplitude(self, mode1: str, mode2: str) -> complex:
        key = tuple(sorted((mode1, mode2)))
        for i, ket in enumerate(KETS):
            if tuple(sorted(ket)) == key:
                return complex(self.amplitudes[i])
        return 0j


@dataclass(frozen=True)
class PolarizerPair:
    theta_a: float
    theta_b: float

    @classmethod
    def degrees(cls, a: float, b: float) -> "PolarizerPair":
        return cls(math.radians(a), math.radians(b))


def ou_mandel_state(p: BeamSplitterParams) -> FockTwoPhotonState:
    return FockTwoPhotonState(np.array([
        math.sqrt(p.Tx * p.Ty),
        math.sqrt(p.Rx * p.Ry),
        -1j * math.sqrt(p.Ry * p.Tx),
        1j * math.sqrt(p.Rx * p.Ty),
    ]))


def photon_x(p: BeamSplitterParams) -> dict[str, complex]:
    """sqrt(Tx)|1_1x> + i sqrt(Rx)|1_2x>."""
    return {"1x": math.sqrt(p.Tx), "2x": 1j * math.sqrt(p.Rx)}


def photon_y(p: BeamSplitterParams) -> dict[str, complex]:
    """sqrt(Ty)|1_2y> - i sqrt(Ry)|1_1y>."""
    return {"2y": math.sqrt(p.Ty), "1y": -1j * math.sqrt(p.Ry)}


def product_amplitudes(psi_x: dict, psi_y: dict) -> np.ndarray:
    """Expand |psi_x>|psi_y> onto the four two-photon kets."""
    out = np.zeros(len(KETS), dtype=complex)
    index = {frozenset(ket): i for i, ket in enumerate(KETS)}
    for (mx, cx), (my, cy) in itertools.product(psi_x.items(), psi_y.items()):
        out[index[frozenset((mx, my))]] += cx * cy
    return out


def factorization_residual(p: BeamSplitterParams) -> float:
    expanded = product_amplitudes(photon_x(p), photon_y(p))
    return float(np.max(np.abs(expanded - ou_mandel_state(p).amplitudes)))


# detection ------------------------------------------------------------------

def detector_fields(p: BeamSplitterParams, pol: PolarizerPair,
                    weighted: bool = True) -> tuple[dict[str, complex], dict[str, complex]]:
    """Mode coefficients of the two detection operators.

    E1 = cos(a) sqrt(Tx) [1x] - i sin(a) sqrt(Ry) [1y]
    E2 = i cos(b) sqrt(Rx) [2x] + sin(b) sqrt(Ty) [2y]

    ``weighted=False`` drops the sqrt(T), sqrt(R) factors, leaving bare
    polarizer projections.
    """
    ca, sa = math.cos(pol.theta_a), math.sin(pol.theta_a)
    cb, sb = math.cos(pol.theta_b), math.sin(pol.theta_b)
    w = (math.sqrt(p.Tx), math.sqrt(p.Ry), math.sqrt(p.Rx), math.sqrt(p.Ty)) if weighted else (1, 1, 1, 1)
    e1 = {"1x": ca * w[0], "1y": -1j * sa * w[1]}
    e2 = {"2x": 1j * cb * w[2], "2y": sb * w[3]}
    return e1, e2


def coincidence_amplitude(state: FockTwoPhotonState, e1: dict, e2: dict,
                          convention: Convention = "annihilation") -> complex:
    """<0| E1 E2 |psi> for single-occupancy kets.

    With annihilation operators a ket contributes only if it holds one
    photon in a mode seen by E1 and one in a mode seen by E2. Read
    literally as creation operators, E1 E2 raises the photon number to four
    and the vacuum overlap is zero.
    """
    if convention == "creation":
        return 0j
    if convention != "annihilation":
        raise ValueError(f"unknown convention {convention!r}")
    total = 0j
    for amp, (m1, m2) in zip(state.amplitudes, KETS):
        total += amp * (e1.get(m1, 0) * e2.get(m2, 0) + e1.get(m2, 0) * e2.get(m1, 0))
    return total


def _raw_rate(p, pol, convention, weighted) -> float:
    e1, e2 = detector_fields(p, pol, weighted)
    return abs(coincidence_amplitude(ou_mandel_state(p), e1, e2, convention)) ** 2


@lru_cache(maxsize=None)
def _normalization(weighted: bool) -> float:
    # the four-rate sum does not depend on the polarizer angles
    balanced = BeamSplitterParams.balanced()
    total = sum(_raw_rate(balanced, PolarizerPair(a, b), "annihilation", weighted)
                for a, b in _quad(0.0, 0.0))
    return 1.0 / total


def _quad(theta_a: float, theta_b: float):
    """(θ, θ'), (θ⊥, θ'⊥), (θ⊥, θ'), (θ, θ'⊥) with ⊥ = +90°."""
    perp = math.pi / 2
    return ((theta_a, theta_b), (theta_a + perp, theta_b + perp),
            (theta_a + perp, theta_b), (theta_a, theta_b + perp))


def coincidence_probability(p: BeamSplitterParams, pol: PolarizerPair,
                            convention: Convention = "annihilation",
                            weighted: bool = True) -> float:
    """Coincidence rate |<0|E1 E2|psi>|^2, scaled so the four-rate sum is 1
    for the balanced splitter."""
    return _normalization(weighted) * _raw_rate(p, pol, convention, weighted)


def coincidence_rates(p: BeamSplitterParams, theta_a: float, theta_b: float,
                      convention: Convention = "annihilation", weighted: bool = True) -> np.ndarray:
    """Rates (P++, P--, P-+, P+-) where - means the polarizer turned by 90°."""
    return np.array([coincidence_probability(p, PolarizerPair(a, b), convention, weighted)
                     for a, b in _quad(theta_a, theta_b)])


def coincidence_correlation(p: BeamSplitterParams, theta_a: float, theta_b: float,
                            convention: Convention = "annihilation", weighted: bool = True) -> float:
    rates = coincidence_rates(p, theta_a, theta_b, convention, weighted)
    total = rates.sum()
    if total <= 0.0:
        raise UndefinedCorrelationError("no coincidences at this polarizer pair")
    return float((rates[0] + rates[1] - rates[2] - rates[3]) / total)


def chsh_from_coincidences(p: BeamSplitterParams, alice_angles, bob_angles,
                           convention: Convention = "annihilation", weighted: bool = True) -> float:
    """|E(a,b) - E(a,b')| + |E(a',b') + E(a',b)| from post-selected rates (radians)."""
    (a, a2), (b, b2) = alice_angles, bob_angles

    def E(x, y):
        return coincidence_correlation(p, x, y, convention, weighted)

    return abs(E(a, b) - E(a, b2)) + abs(E(a2, b2) + E(a2, b))


# menu search ------------------------------------------------------------------

def _correlation_grid(p: BeamSplitterParams, angles: np.ndarray, weighted: bool) -> np.ndarray:
    """E(a_i, b_j) over a grid, vectorized through the closed-form amplitude."""
    e = np.empty((angles.size, angles.size))
    for i, a in enumerate(angles):
        for j, b in enumerate(angles):
            e[i, j] = coincidence_correlation(p, a, b, weighted=weighted)
    return e


def optimize_chsh_menu(p: BeamSplitterParams, grid_step_deg: float = 10.0,
                       xtol: float = 1e-8, weighted: bool = True) -> tuple[float, tuple[float, ...]]:
    """Maximize the coincidence CHSH value over (a, a', b, b').

    Coarse grid over [0, 180) in each angle, then cyclic one-dimensional
    bounded Brent (golden-section) refinement until a sweep stops improving.
    Returns (value, angles in radians).
    """
    angles = np.radians(np.arange(0.0, 180.0, grid_step_deg))
    E = _correlation_grid(p, angles, weighted)
    # value[i, k, j, l] for a = angles[i], a' = angles[k], b = angles[j], b' = angles[l]
    value = (np.abs(E[:, None, :, None] - E[:, None, None, :])
             + np.abs(E[None, :, None, :] + E[None, :, :, None]))
    i, k, j, l = np.unravel_index(np.argmax(value), value.shape)
    x = np.array([angles[i], angles[k], angles[j], angles[l]])

    def chsh(v):
        try:
            return chsh_from_coincidences(p, v[:2], v[2:], weighted=weighted)
        except UndefinedCorrelationError:
            return -math.inf

    best = chsh(x)
    half_width = math.radians(grid_step_deg)
    for _ in range(200):
        start = best
        for axis in range(4):
            def neg(t, axis=axis):
                trial = x.copy()
                trial[axis] = t
                return -chsh(trial)

            res = minimize_scalar(neg, bounds=(x[axis] - half_width, x[axis] + half_width),
                                  method="bounded", options={"xatol": xtol})
            if -res.fun > best:
                x[axis], best = res.x, -res.fun
        if best - start < 1e-15:
            break
    return best, tuple(float(t) for t in x)


def sample_coincidences(p: BeamSplitterParams, theta_a: float, theta_b: float, n: int,
                        rng: np.random.Generator, weighted: bool = True) -> np.ndarray:
    """Multinomial click counts over (++, --, -+, +-) for n coincidences."""
    rates = coincidence_rates(p, theta_a, theta_b, weighted=weighted)
    total = rates.sum()
    if total <= 0:
        raise UndefinedCorrelationError("no coincidences at this polarizer pair")
    return rng.multinomial(n, rates / total)


def random_params(rng: np.random.Generator) -> BeamSplitterParams:
    return BeamSplitterParams.from_transmissions(float(rng.random()), float(rng.random()))


def factorization_sweep(n: int, rng: np.random.Generator) -> float:
    return max(factorization_residual(random_params(rng)) for _ in range(n))
