"""Four-time-bin CHSH experiments, the time-order term and inequality verdicts.

Randomness is split into fixed-size chunks of elements, each with its own
child ``SeedSequence`` keyed by chunk index. Chunks can be farmed out to any
number of threads; results are concatenated in chunk order, so the output is
bit-identical for every worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .hvt import CloneEnsemble, HiddenVariableModel, Wing, sample_ensemble
from .observables import CIRELSON, AnalyzerSetting

Side = Literal["A", "B"]
CHUNK = 8192


class InsufficientDataError(ValueError):
    """A correlation bin has too few entries for a standard error."""


# random streams -----------------------------------------------------------

def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Fresh SeedSequence from an int, a SeedSequence or a Generator.

    A SeedSequence argument is copied rather than spawned from, so passing
    the same object twice gives the same streams.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(0, 2**63)))
    return np.random.SeedSequence(seed)


def map_chunks(fn, n: int, seed, workers: int = 1) -> list:
    """Call ``fn(start, stop, rng)`` on each chunk of ``range(n)``, in order."""
    n_chunks = max(1, math.ceil(n / CHUNK))
    children = as_seed_sequence(seed).spawn(n_chunks)
    jobs = [(i * CHUNK, min(n, (i + 1) * CHUNK), children[i]) for i in range(n_chunks)]

    def run(job):
        start, stop, ss = job
        return fn(start, stop, np.random.default_rng(ss))

    if workers <= 1 or n_chunks == 1:
        return [run(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def build_ensemble(model: HiddenVariableModel, n: int, seed, workers: int = 1):
    """Chunked ``sample_ensemble``; identical for any worker count."""
    parts = map_chunks(lambda s, e, rng: sample_ensemble(model, e - s, rng).lam, n, seed, workers)
    return CloneEnsemble(model.name, np.concatenate(parts), seed if isinstance(seed, int) else None)


# schedule and estimates -----------------------------------------------------

@dataclass(frozen=True)
class FourBinSchedule:
    """Settings (a, a', b, b') run in four consecutive time bins.

    With ``side="B"`` the bins are (a,b), (a,b'), (a',b'), (a',b): Bob meets
    b then b' on one chain of clones and b' then b on the other. ``side="A"``
    mirrors this for Alice: (a,b), (a',b), (a',b'), (a,b').
    ``tandem=True`` carries each element's post-measurement lambda from bin 1
    into bin 3 and from bin 2 into bin 4 instead of re-cloning.
    """

    a: AnalyzerSetting
    a2: AnalyzerSetting
    b: AnalyzerSetting
    b2: AnalyzerSetting
    trials_per_bin: int
    side: Side = "B"
    tandem: bool = False

    def __post_init__(self):
        if self.trials_per_bin < 2:
            raise ValueError("trials_per_bin must be at least 2 to estimate a standard error")
        if self.side not in ("A", "B"):
            raise ValueError(f"side must be 'A' or 'B', got {self.side!r}")

    @property
    def bins(self) -> tuple[tuple[AnalyzerSetting, AnalyzerSetting], ...]:
        a, a2, b, b2 = self.a, self.a2, self.b, self.b2
        if self.side == "B":
            return ((a, b), (a, b2), (a2, b2), (a2, b))
        return ((a, b), (a2, b), (a2, b2), (a, b2))

    @property
    def protocol(self) -> str:
        return "tandem" if self.tandem else "clones"


@dataclass(frozen=True)
class CorrelationEstimate:
    mean: float
    stderr: float
    n: int

    @classmethod
    def from_products(cls, products: np.ndarray) -> "CorrelationEstimate":
        n = products.size
        if n < 2:
            raise InsufficientDataError(f"correlation bin has {n} entries, need at least 2")
        x = products.astype(float)
        return cls(float(x.mean()), float(x.std(ddof=1) / math.sqrt(n)), int(n))


@dataclass(frozen=True)
class Verdict:
    bound: float | None
    margin: float | None
    stderr: float | None
    satisfied: bool | None

    @property
    def status(self) -> str:
        if self.satisfied is None:
            return "undefined"
        return "satisfied" if self.satisfied else "violated"


@dataclass
class ChshReport:
    correlations: tuple[CorrelationEstimate, ...]
    chsh_lhs: float
    chsh_stderr: float
    side: Side
    protocol: str
    settings_deg: tuple[float, float, float, float]
    kind: str
    source: str
    t_signed: float | None = None
    t_abs: float | None = None
    t_abs_stderr: float | None = None
    other_side_abs: float | None = None
    sums: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    outcomes: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def f(self) -> float | None:
        """t_abs / t_signed, the slack factor that makes both bounds agree."""
        if self.t_signed is None or self.t_signed <= 0:
            return None
        return self.t_abs / self.t_signed

    def time_order_bound_holds_exactly(self) -> bool:
        """Integer check of N*chsh <= 2N + sum|side diff| + sum|other-side diff|."""
        s = self.sums
        lhs = abs(s["S1"] - s["S2"]) + abs(s["S3"] + s["S4"])
        return lhs <= 2 * s["n"] + s["sum_abs_side"] + s["sum_abs_other"]

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "kind": self.kind,
            "protocol": self.protocol,
            "side": self.side,
            "settings_deg": list(self.settings_deg),
            "correlations": [
                {"mean": c.mean, "stderr": c.stderr, "n": c.n} for c in self.correlations
            ],
            "chsh_lhs": self.chsh_lhs,
            "chsh_stderr": self.chsh_stderr,
            "t_signed": self.t_signed,
            "t_abs": self.t_abs,
            "t_abs_stderr": self.t_abs_stderr,
            "other_side_abs": self.other_side_abs,
            "f": self.f,
            "sums": dict(self.sums),
            "verdicts": {
                name: {"bound": v.bound, "margin": v.margin, "stderr": v.stderr,
                       "status": v.status}
                for name, v in self.verdicts.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChshReport":
        verdicts = {}
        for name, v in d["verdicts"].items():
            satisfied = {"satisfied": True, "violated": False, "undefined": None}[v["status"]]
            verdicts[name] = Verdict(v["bound"], v["margin"], v["stderr"], satisfied)
        return cls(
            correlations=tuple(CorrelationEstimate(**c) for c in d["correlations"]),
            chsh_lhs=d["chsh_lhs"], chsh_stderr=d["chsh_stderr"], side=d["side"],
            protocol=d["protocol"], settings_deg=tuple(d["settings_deg"]), kind=d["kind"],
            source=d["source"], t_signed=d["t_signed"], t_abs=d["t_abs"],
            t_abs_stderr=d["t_abs_stderr"], other_side_abs=d["other_side_abs"],
            sums=dict(d["sums"]), verdicts=verdicts,
        )


def evaluate_inequalities(report: ChshReport) -> dict[str, Verdict]:
    """Verdicts keyed by bound name (``bell_2``, ``new_bound``, ``cirelson_2sqrt2``).

    ``new_bound`` is 2 + t_abs and is undefined without a time-order term. A verdict is ``satisfied`` when its margin (bound - chsh_lhs) is >= 0.
    """
    x, se = report.chsh_lhs, report.chsh_stderr

    def verdict(bound, extra_se=0.0):
        margin = bound - x
        return Verdict(bound, margin, math.hypot(se, extra_se), margin >= 0)

    verdicts = {"bell_2": verdict(2.0)}
    if report.t_abs is None:
        verdicts["new_bound"] = Verdict(None, None, None, None)
    else:
        verdicts["new_bound"] = verdict(2.0 + report.t_abs, report.t_abs_stderr or 0.0)
    verdicts["cirelson_2sqrt2"] = verdict(CIRELSON)
    return verdicts


# four-bin run -----------------------------------------------------------------

def _check_kinds(model: HiddenVariableModel, settings) -> None:
    for s in settings:
        if s.kind != model.kind:
            raise ValueError(f"model {model.name!r} expects {model.kind} settings, got {s.kind}")


def _four_bin_chunk(model: HiddenVariableModel, schedule: FourBinSchedule, m: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Outcomes of shape (4 bins, m elements, 2 wings) for one chunk.

    Uniform columns: fixed wing 1st/2nd stage, varying wing 1st/2nd stage.
    Both chains reuse the same columns, so the clones see identical draws.
    The fixed-order wing measures first in every bin.
    """
    lam = sample_ensemble(model, m, rng).lam
    u = rng.random((m, 4))
    var_wing: Wing = schedule.side
    fixed_wing: Wing = "A" if var_wing == "B" else "B"
    fixed_col, var_col = (0, 1) if fixed_wing == "A" else (1, 0)
    out = np.empty((4, m, 2), dtype=np.int8)
    for first, second in ((0, 2), (1, 3)):
        state = lam.copy()
        for stage, bin_idx in enumerate((first, second)):
            if stage == 1 and not schedule.tandem:
                state = lam.copy()
            settings = schedule.bins[bin_idx]
            fixed_s, var_s = settings[fixed_col], settings[var_col]
            o_fixed, state = model.responder(fixed_wing)(np.full(m, fixed_s.angle), state, u[:, stage])
            o_var, state = model.responder(var_wing)(np.full(m, var_s.angle), state, u[:, 2 + stage])
            out[bin_idx, :, fixed_col] = o_fixed
            out[bin_idx, :, var_col] = o_var
    return out


def _paired_chsh_stderr(products: np.ndarray) -> float:
    """Delta-method stderr of |m1 - m2| + |m3 + m4| from per-element products.

    All four bins share elements (and draws), so they are correlated; the
    per-element combination accounts for that where quadrature would not.
    """
    x = products.astype(float)
    s1 = 1.0 if x[0].sum() - x[1].sum() >= 0 else -1.0
    s2 = 1.0 if x[2].sum() + x[3].sum() >= 0 else -1.0
    g = s1 * (x[0] - x[1]) + s2 * (x[2] + x[3])
    return float(g.std(ddof=1) / math.sqrt(g.size))


def report_from_outcomes(outcomes: np.ndarray, schedule: FourBinSchedule, source: str) -> ChshReport:
    """Build a report from (4, N, 2) matched-clone outcomes."""
    n = outcomes.shape[1]
    products = outcomes[:, :, 0].astype(np.int64) * outcomes[:, :, 1]
    sums = {f"S{k + 1}": int(products[k].sum()) for k in range(4)}
    var_col, fixed_col = (1, 0) if schedule.side == "B" else (0, 1)
    var = outcomes[:, :, var_col].astype(np.int64)
    fixed = outcomes[:, :, fixed_col].astype(np.int64)
    diff = var[0] * var[2] - var[1] * var[3]
    other = fixed[0] * fixed[2] - fixed[1] * fixed[3]
    sums.update(n=int(n), sum_signed=int(diff.sum()), sum_abs_side=int(np.abs(diff).sum()),
                sum_abs_other=int(np.abs(other).sum()))

    chsh = (abs(sums["S1"] - sums["S2"]) + abs(sums["S3"] + sums["S4"])) / n
    abs_diff = np.abs(diff).astype(float)
    report = ChshReport(
        correlations=tuple(CorrelationEstimate.from_products(products[k]) for k in range(4)),
        chsh_lhs=chsh,
        chsh_stderr=_paired_chsh_stderr(products),
        side=schedule.side,
        protocol=schedule.protocol,
        settings_deg=tuple(math.degrees(s.angle) for s in
                           (schedule.a, schedule.a2, schedule.b, schedule.b2)),
        kind=schedule.a.kind,
        source=source,
        t_signed=abs(sums["sum_signed"]) / n,
        t_abs=sums["sum_abs_side"] / n,
        t_abs_stderr=float(abs_diff.std(ddof=1) / math.sqrt(n)),
        other_side_abs=sums["sum_abs_other"] / n,
        sums=sums,
        outcomes=outcomes,
    )
    report.verdicts = evaluate_inequalities(report)
    return report


def run_four_bin(source: HiddenVariableModel, schedule: FourBinSchedule, seed,
                 workers: int = 1) -> ChshReport:
    """Run the four time bins on matched clones of one ensemble.

    Quantum sources (``hvt.quantum_model``) are handled the same way: every
    bin starts from the identical pure state with identical uniforms.
    """
    _check_kinds(source, (schedule.a, schedule.a2, schedule.b, schedule.b2))
    n = schedule.trials_per_bin
    parts = map_chunks(lambda s, e, rng: _four_bin_chunk(source, schedule, e - s, rng),
                       n, seed, workers)
    return report_from_outcomes(np.concatenate(parts, axis=1), schedule, source.name)


# time-order term ----------------------------------------------------------

@dataclass
class TimeOrderResult:
    t_signed: float
    t_abs: float
    stderr_signed: float
    stderr_abs: float
    forward: float
    reverse: float
    trace: np.ndarray = field(repr=False)

    @property
    def diffs(self) -> np.ndarray:
        t = self.trace.astype(np.int64)
        return t[:, 0] * t[:, 1] - t[:, 2] * t[:, 3]


def time_order_term(source: HiddenVariableModel, first: AnalyzerSetting, second: AnalyzerSetting,
                    n: int, seed, side: Side = "B", workers: int = 1) -> TimeOrderResult:
    """Sequential measurements on one wing, both orders, on identical clones.

    Per element the trace row is (X1, X2', Y2', Y1): chain X measures
    ``first`` then ``second``, chain Y ``second`` then ``first``; both
    chains start from the same lambda and use the same two uniforms.
    The per-element difference is X1*X2' - Y2'*Y1.
    """
    if n < 2:
        raise ValueError("time-order term needs n >= 2")
    _check_kinds(source, (first, second))
    respond = source.responder(side)

    def chunk(start, stop, rng):
        m = stop - start
        lam = sample_ensemble(source, m, rng).lam
        u = rng.random((m, 2))
        trace = np.empty((m, 4), dtype=np.int8)
        trace[:, 0], state = respond(np.full(m, first.angle), lam.copy(), u[:, 0])
        trace[:, 1], _ = respond(np.full(m, second.angle), state, u[:, 1])
        trace[:, 2], state = respond(np.full(m, second.angle), lam.copy(), u[:, 0])
        trace[:, 3], _ = respond(np.full(m, first.angle), state, u[:, 1])
        return trace

    trace = np.concatenate(map_chunks(chunk, n, seed, workers))
    t = trace.astype(np.int64)
    forward_p = t[:, 0] * t[:, 1]
    reverse_p = t[:, 2] * t[:, 3]
    d = (forward_p - reverse_p).astype(float)
    root_n = math.sqrt(n)
    return TimeOrderResult(
        t_signed=abs(float(d.mean())),
        t_abs=float(np.abs(d).mean()),
        stderr_signed=float(d.std(ddof=1) / root_n),
        stderr_abs=float(np.abs(d).std(ddof=1) / root_n),
        forward=float(forward_p.mean()),
        reverse=float(reverse_p.mean()),
        trace=trace,
    )


def luders_chain_branches(state: np.ndarray, first: np.ndarray, second: np.ndarray) -> dict:
    """Exact probabilities of the four (first, second) outcome branches.

    ``first`` and ``second`` are +/-1 observables on the state's space;
    P(x, y) = || P_y(second) P_x(first) psi ||^2 with P_s(M) = (I + s M) / 2.
    """
    psi = np.asarray(state, dtype=complex)
    eye = np.eye(psi.size)
    branches = {}
    for x in (1, -1):
        after_first = (eye + x * first) / 2 @ psi
        for y in (1, -1):
            v = (eye + y * second) / 2 @ after_first
            branches[(x, y)] = float(np.vdot(v, v).real)
    return branches


def chain_correlation(branches: dict) -> float:
    return sum(x * y * p for (x, y), p in branches.items())


# random settings ----------------------------------------------------------

@dataclass
class RandomSettingsRun:
    records: np.ndarray  # columns: alice_choice, bob_choice, A, B
    report: ChshReport


def bin_of_records(records: np.ndarray) -> np.ndarray:
    """Bin index per trial: (a,b) -> 0, (a,b') -> 1, (a',b') -> 2, (a',b) -> 3."""
    return np.array([0, 1, 3, 2])[records[:, 0].astype(int) * 2 + records[:, 1]]


def random_settings_run(source: HiddenVariableModel, settings, n: int, seed,
                        workers: int = 1) -> RandomSettingsRun:
    """Independent uniform setting choice per trial, binned afterwards.

    ``settings`` is (a, a', b, b'). Each trial uses a fresh element; there
    are no clones, so the time-order fields of the report stay undefined.
    """
    if n < 8:
        raise ValueError("random-settings run needs n >= 8")
    a, a2, b, b2 = settings
    _check_kinds(source, settings)
    alice_angles = np.array([a.angle, a2.angle])
    bob_angles = np.array([b.angle, b2.angle])

    def chunk(start, stop, rng):
        m = stop - start
        lam = sample_ensemble(source, m, rng).lam
        choice = rng.integers(0, 2, size=(m, 2))
        u = rng.random((m, 2))
        rec = np.empty((m, 4), dtype=np.int8)
        rec[:, :2] = choice
        rec[:, 2], lam = source.respond_a(alice_angles[choice[:, 0]], lam, u[:, 0])
        rec[:, 3], _ = source.respond_b(bob_angles[choice[:, 1]], lam, u[:, 1])
        return rec

    records = np.concatenate(map_chunks(chunk, n, seed, workers))
    which = bin_of_records(records)
    products = records[:, 2].astype(np.int64) * records[:, 3]
    estimates = tuple(CorrelationEstimate.from_products(products[which == k]) for k in range(4))
    m = [e.mean for e in estimates]
    report = ChshReport(
        correlations=estimates,
        chsh_lhs=abs(m[0] - m[1]) + abs(m[2] + m[3]),
        chsh_stderr=math.sqrt(sum(e.stderr ** 2 for e in estimates)),
        side="B",
        protocol="random-settings",
        settings_deg=tuple(math.degrees(s.angle) for s in settings),
        kind=a.kind,
        source=source.name,
        sums={f"S{k + 1}": int(products[which == k].sum()) for k in range(4)} | {
            f"n{k + 1}": int((which == k).sum()) for k in range(4)},
    )
    report.verdicts = evaluate_inequalities(report)
    return RandomSettingsRun(records, report)

