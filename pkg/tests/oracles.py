"""Reference computations that share no code with the package.

Each oracle rebuilds its answer from a different route: explicit ladder
operators on a truncated Fock space, brute-force quadrature over lambda,
or exact integration over the uniform draws a model consumes.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

# Fock-space mode algebra ---------------------------------------------------

MODES = ("1x", "1y", "2x", "2y")
MAX_OCC = 2  # two photons at most, so occupations 0..2 suffice


def _single_mode_annihilator() -> np.ndarray:
    d = MAX_OCC + 1
    a = np.zeros((d, d))
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def mode_annihilator(mode: str) -> np.ndarray:
    """a_mode on the 4-mode space, ordering as in MODES (no sign issues: bosons)."""
    d = MAX_OCC + 1
    ops = [np.eye(d)] * len(MODES)
    ops = list(ops)
    ops[MODES.index(mode)] = _single_mode_annihilator()
    out = np.ones((1, 1))
    for op in ops:
        out = np.kron(out, op)
    return out.astype(complex)


def vacuum() -> np.ndarray:
    v = np.zeros((MAX_OCC + 1) ** len(MODES), dtype=complex)
    v[0] = 1.0
    return v


def creation_field(coeffs: dict) -> np.ndarray:
    return sum(c * mode_annihilator(m).conj().T for m, c in coeffs.items())


def annihilation_field(coeffs: dict) -> np.ndarray:
    # positive-frequency part carries conjugate coefficients of the mode function;
    # here we keep the printed coefficients on the annihilators
    return sum(c * mode_annihilator(m) for m, c in coeffs.items())


def fock_ou_mandel_state(Tx: float, Ty: float) -> np.ndarray:
    """Photon x and photon y each through the splitter, created on vacuum."""
    Rx, Ry = 1 - Tx, 1 - Ty
    bx = creation_field({"1x": math.sqrt(Tx), "2x": 1j * math.sqrt(Rx)})
    by = creation_field({"2y": math.sqrt(Ty), "1y": -1j * math.sqrt(Ry)})
    return by @ bx @ vacuum()


def fock_coincidence_amplitude(Tx: float, Ty: float, theta_a: float, theta_b: float) -> complex:
    Rx, Ry = 1 - Tx, 1 - Ty
    e1 = annihilation_field({"1x": math.cos(theta_a) * math.sqrt(Tx),
                             "1y": -1j * math.sin(theta_a) * math.sqrt(Ry)})
    e2 = annihilation_field({"2x": 1j * math.cos(theta_b) * math.sqrt(Rx),
                             "2y": math.sin(theta_b) * math.sqrt(Ty)})
    return complex(np.vdot(vacuum(), e1 @ e2 @ fock_ou_mandel_state(Tx, Ty)))


def fock_correlation(Tx: float, Ty: float, theta_a: float, theta_b: float) -> float:
    perp = math.pi / 2
    rate = [abs(fock_coincidence_amplitude(Tx, Ty, a, b)) ** 2 for a, b in
            ((theta_a, theta_b), (theta_a + perp, theta_b + perp),
             (theta_a + perp, theta_b), (theta_a, theta_b + perp))]
    return (rate[0] + rate[1] - rate[2] - rate[3]) / sum(rate)


def fock_state_in_kets(Tx: float, Ty: float) -> dict[tuple[str, str], complex]:
    """Amplitudes of the two-photon state on single-occupancy mode pairs."""
    psi = fock_ou_mandel_state(Tx, Ty)
    out = {}
    for m1, m2 in itertools.combinations(MODES, 2):
        ket = mode_annihilator(m1).conj().T @ mode_annihilator(m2).conj().T @ vacuum()
        out[(m1, m2)] = complex(np.vdot(ket, psi))
    return out


# static-sign model ----------------------------------------------------------

def static_sign_correlation(a: float, b: float, k: int, grid: int = 200_000) -> float:
    """Midpoint quadrature of sign cos k(a-l) * (-sign cos k(b-l)) over one period."""
    period = 2 * math.pi / k
    lam = (np.arange(grid) + 0.5) * period / grid
    A = np.where(np.cos(k * (a - lam)) >= 0, 1, -1)
    B = -np.where(np.cos(k * (b - lam)) >= 0, 1, -1)
    return float(np.mean(A * B))


def sawtooth(a: float, b: float, k: int) -> float:
    """Closed form of the above: -(1 - 2|k d|/pi) with k d wrapped to [-pi, pi]."""
    d = math.remainder(k * (a - b), 2 * math.pi)
    return -(1 - 2 * abs(d) / math.pi)


# collapse-rotation time-order term ---------------------------------------

def _intervals(breaks):
    pts = sorted({0.0, 1.0, *[min(max(p, 0.0), 1.0) for p in breaks]})
    return [(lo, hi) for lo, hi in zip(pts, pts[1:]) if hi > lo]


def collapse_rotation_time_order(first: float, second: float, k: int,
                                 grid: int = 4000) -> tuple[float, float]:
    """Exact-in-u, quadrature-in-lambda (E[X1 X2 - Y1 Y2], E|X1 X2 - Y1 Y2|).

    Chain X measures ``first`` then ``second``; chain Y the other way round.
    Both chains consume the same two uniforms u0, u1. The first outcome is +1
    when u0 < cos^2(k(angle - lambda)/2); the axis then sits on the analyzer
    (or its orthogonal), so the second stage is +1 when u1 < c (outcome +1)
    or u1 < 1 - c (outcome -1) with c = cos^2(k(second - first)/2).
    """
    c = math.cos(k * (second - first) / 2) ** 2
    q = {1: c, -1: 1 - c}
    period = 2 * math.pi / k
    signed = absolute = 0.0
    for lam in (np.arange(grid) + 0.5) * period / grid:
        px = math.cos(k * (first - lam) / 2) ** 2
        py = math.cos(k * (second - lam) / 2) ** 2
        for lo0, hi0 in _intervals((px, py)):
            u0 = (lo0 + hi0) / 2
            x1 = 1 if u0 < px else -1
            y1 = 1 if u0 < py else -1
            for lo1, hi1 in _intervals((q[1], q[-1])):
                u1 = (lo1 + hi1) / 2
                x2 = 1 if u1 < q[x1] else -1
                y2 = 1 if u1 < q[y1] else -1
                w = (hi0 - lo0) * (hi1 - lo1)
                d = x1 * x2 - y1 * y2
                signed += w * d
                absolute += w * abs(d)
    return signed / grid, absolute / grid


# quantum closed forms ------------------------------------------------------

def singlet_correlation(a: float, b: float, k: int) -> float:
    return -math.cos(k * (a - b))


def luders_sequential_correlation(first: float, second: float, k: int) -> float:
    """Either order on one half of a maximally entangled pair: cos k(second - first)."""
    return math.cos(k * (second - first))
