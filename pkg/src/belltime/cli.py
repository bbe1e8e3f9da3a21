"""Command-line front end.

Exit status:
    0  success
    1  internal error (a bug; traceback printed)
    2  configuration error (bad flag, unknown key, invalid value)
    3  numerical degeneracy (zero-norm branch, empty or undefined correlation bin)
    4  I/O error (config file unreadable, output not writable)
"""

from __future__ import annotations

import argparse
import math
import sys
import time
import traceback
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import harness, hvt, observables, oumandel
from .observables import AnalyzerSetting, menu
from .qcore import H, V, NumericalDegeneracyError, identity, product_state, singlet, tensor
from .report import ReportDocument, render_text

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

MODES = ("four-bin", "random-settings", "sequential", "identity-checks")
SOURCES = ("singlet", "product", "hvt", "ou-mandel")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = "four-bin"
    source: str = "singlet"
    model: str = "static-sign"
    kind: str = "photon"
    angles: tuple[float, float, float, float] = observables.OPTIMAL_PHOTON_MENU_DEG
    trials: int = 100_000
    seed: int = 0
    side: str = "B"
    tandem: bool = False
    convention: str = "annihilation"
    workers: int = 1
    out: str | None = None
    table_out: str | None = None
    timing: bool = False

    def echo(self) -> dict:
        """Settings that determine the numbers (not where they are written)."""
        d = asdict(self)
        for key in ("workers", "out", "table_out", "timing"):
            d.pop(key)
        d["angles"] = list(self.angles)
        return d


# parsing ----------------------------------------------------------------------

def _parse_angles(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        parts = list(text)
    else:
        parts = [p for p in str(text).replace(" ", "").split(",") if p]
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"angles must be numbers in degrees, got {text!r}") from None
    if len(values) != 4:
        raise ConfigError(f"angles needs four comma-separated values (a,a',b,b'), got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError("angles must be finite")
    return values


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_int(name):
    def parse(text):
        try:
            return int(str(text).strip())
        except ValueError:
            raise ConfigError(f"{name} must be an integer, got {text!r}") from None
    return parse


def _choice(name, options):
    def parse(text):
        value = str(text).strip()
        if value not in options:
            raise ConfigError(f"{name} must be one of {', '.join(options)}; got {value!r}")
        return value
    return parse


def _side(text):
    value = str(text).strip().upper().removesuffix("-SIDE")
    if value not in ("A", "B"):
        raise ConfigError(f"side must be A-side or B-side, got {text!r}")
    return value


_PARSERS = {
    "mode": _choice("mode", MODES),
    "source": str,
    "model": str,
    "kind": _choice("kind", ("photon", "electron")),
    "angles": _parse_angles,
    "trials": _parse_int("trials"),
    "seed": _parse_int("seed"),
    "side": _side,
    "tandem": _parse_bool,
    "convention": _choice("convention", ("annihilation", "creation")),
    "workers": _parse_int("workers"),
    "out": str,
    "table_out": str,
    "timing": _parse_bool,
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys mirror flags."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="belltime", description=__doc__.split("\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog=__doc__.split("\n", 1)[1])
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--mode", help=f"one of {', '.join(MODES)} (default four-bin)")
    p.add_argument("--source", help="singlet, product, ou-mandel, hvt or hvt:<model> (default singlet)")
    p.add_argument("--model", help="hidden-variable model for source=hvt (default static-sign)")
    p.add_argument("--kind", help="photon or electron (default photon)")
    p.add_argument("--angles", help="a,a',b,b' in degrees (default 0,45,-22.5,-67.5)")
    p.add_argument("--trials", help="trials per bin, >= 2 (default 100000)")
    p.add_argument("--seed", help="unsigned 64-bit seed (default 0)")
    p.add_argument("--side", help="A-side or B-side time-order term (default B-side)")
    p.add_argument("--tandem", action="store_const", const="true",
                   help="two-experiment tandem variant: bins 3/4 continue from bins 1/2")
    p.add_argument("--convention", help="ou-mandel detection operators: annihilation or creation")
    p.add_argument("--workers", help="threads for chunked sampling (results do not depend on it)")
    p.add_argument("--out", help="report path (.json machine form, anything else human text)")
    p.add_argument("--table-out", dest="table_out", help="per-trial table (tab separated)")
    p.add_argument("--timing", action="store_const", const="true",
                   help="include wall time in the report")
    return p


def parse_config(argv=None) -> RunConfig:
    """Documented defaults < config file < command-line flags."""
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config")
    raw = read_config_file(config_path) if config_path else {}
    raw.update({k: v for k, v in args.items() if v is not None})
    values = {key: _PARSERS[key](text) for key, text in raw.items()}

    source = values.get("source")
    if source is not None:
        if source.startswith("hvt:"):
            values["source"], values["model"] = "hvt", source.split(":", 1)[1]
        elif source not in SOURCES:
            raise ConfigError(f"source must be one of {', '.join(SOURCES)} or hvt:<model>; got {source!r}")
    if "angles" not in values and values.get("kind") == "electron":
        values["angles"] = observables.OPTIMAL_ELECTRON_MENU_DEG
    config = RunConfig(**values)
    if config.trials < 2:
        raise ConfigError(f"trials must be at least 2, got {config.trials}")
    if not 0 <= config.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if config.workers < 1:
        raise ConfigError("workers must be at least 1")
    if config.source == "hvt":
        names = [m.name for m in hvt.builtin_models(config.kind)]
        if config.model not in names:
            raise ConfigError(f"unknown model {config.model!r}; known: {', '.join(names)}")
    return config


# running ----------------------------------------------------------------------

def _settings(config: RunConfig) -> tuple[AnalyzerSetting, ...]:
    return menu(config.angles, config.kind)


def _source_model(config: RunConfig) -> hvt.HiddenVariableModel:
    if config.source == "singlet":
        return hvt.quantum_model(singlet(), config.kind, "singlet")
    if config.source == "product":
        return hvt.quantum_model(product_state(H, V), config.kind, "product")
    return hvt.get_model(config.model, config.kind)


def _bin_rows(report: harness.ChshReport, bins) -> list[dict]:
    return [
        {"bin": k + 1, "alice_deg": math.degrees(alice.angle), "bob_deg": math.degrees(bob.angle),
         "mean": est.mean, "stderr": est.stderr, "n": est.n}
        for k, ((alice, bob), est) in enumerate(zip(bins, report.correlations))
    ]


def _menu_bins(settings):
    a, a2, b, b2 = settings
    return ((a, b), (a, b2), (a2, b2), (a2, b))


def _four_bin_table(report: harness.ChshReport, bins) -> list[str]:
    rows = []
    for k, (alice, bob) in enumerate(bins):
        a_deg, b_deg = math.degrees(alice.angle), math.degrees(bob.angle)
        for i, (x, y) in enumerate(report.outcomes[k]):
            rows.append(f"{i}\t{k + 1}\t{a_deg:g}\t{b_deg:g}\t{x}\t{y}")
    return rows


def _random_table(run: harness.RandomSettingsRun, settings) -> list[str]:
    a, a2, b, b2 = (math.degrees(s.angle) for s in settings)
    alice, bob = (a, a2), (b, b2)
    which = harness.bin_of_records(run.records)
    return [f"{i}\t{which[i] + 1}\t{alice[r[0]]:g}\t{bob[r[1]]:g}\t{r[2]}\t{r[3]}"
            for i, r in enumerate(run.records)]


def _ou_mandel(config: RunConfig, doc: ReportDocument) -> list[str]:
    """Coincidence-sampled CHSH for the balanced splitter at the configured menu."""
    p = oumandel.BeamSplitterParams.balanced()
    settings = _settings(config)
    rng = np.random.default_rng(config.seed)
    bins = _menu_bins(settings)
    estimates, rows, sums = [], [], {}
    for k, (alice, bob) in enumerate(bins):
        rates = oumandel.coincidence_rates(p, alice.angle, bob.angle, config.convention)
        if rates.sum() <= 0:
            raise oumandel.UndefinedCorrelationError(
                f"no coincidences at bin {k + 1} under the {config.convention} convention")
        counts = rng.multinomial(config.trials, rates / rates.sum())
        products = np.repeat(np.array([1, 1, -1, -1], dtype=np.int8), counts)
        estimates.append(harness.CorrelationEstimate.from_products(products))
        sums[f"S{k + 1}"] = int(products.astype(np.int64).sum())
        a_deg, b_deg = math.degrees(alice.angle), math.degrees(bob.angle)
        outcome_pairs = [(1, 1), (-1, -1), (-1, 1), (1, -1)]
        for cls, c in enumerate(counts):
            x, y = outcome_pairs[cls]
            rows.extend(f"{k + 1}\t{a_deg:g}\t{b_deg:g}\t{x}\t{y}" for _ in range(c))
    m = [e.mean for e in estimates]
    report = harness.ChshReport(
        correlations=tuple(estimates),
        chsh_lhs=abs(m[0] - m[1]) + abs(m[2] + m[3]),
        chsh_stderr=math.sqrt(sum(e.stderr ** 2 for e in estimates)),
        side="B", protocol="coincidence", settings_deg=tuple(config.angles),
        kind=config.kind, source="ou-mandel", sums=sums,
    )
    report.verdicts = harness.evaluate_inequalities(report)
    doc.chsh = report.to_dict()
    doc.bins = _bin_rows(report, bins)
    (a, a2, b, b2) = (s.angle for s in settings)
    best, best_menu = oumandel.optimize_chsh_menu(p)
    doc.oumandel = {
        "chsh_analytic": oumandel.chsh_from_coincidences(p, (a, a2), (b, b2), config.convention),
        "chsh_optimal": float(best),
        "optimal_menu_deg": [math.degrees(t) for t in best_menu],
        "factorization_residual_balanced": oumandel.factorization_residual(p),
        "convention": config.convention,
    }
    return [f"{i}\t{row}" for i, row in enumerate(rows)]


def _identity_checks(config: RunConfig) -> dict:
    rng = np.random.default_rng(config.seed)
    sweep = observables.s_squared_identity_sweep(10_000, rng)
    ops = observables.bell_operator(*observables.optimal_menu("photon"))
    return {
        "s_squared_identity_residual_max": sweep["s_squared_identity_residual"],
        "cirelson_max_abs_eig_S": sweep["max_abs_eig_S"],
        "commutator_residual_photon": observables.commutator_sweep(1000, rng, "photon"),
        "commutator_residual_electron": observables.commutator_sweep(1000, rng, "electron"),
        "factorization_residual_max": oumandel.factorization_sweep(1000, rng),
        "s_squared_HV_optimal_menu": observables.s_squared_expectation(product_state(H, V), ops),
        "s_squared_singlet_optimal_menu": observables.s_squared_expectation(singlet(), ops),
    }


def _sequential(config: RunConfig, doc: ReportDocument) -> list[str]:
    model = _source_model(config)
    a, a2, b, b2 = _settings(config)
    first, second = (b, b2) if config.side == "B" else (a, a2)
    result = harness.time_order_term(model, first, second, config.trials, config.seed,
                                     side=config.side, workers=config.workers)
    section = {
        "side": config.side,
        "first_deg": math.degrees(first.angle),
        "second_deg": math.degrees(second.angle),
        "n": config.trials,
        "t_signed": result.t_signed,
        "t_abs": result.t_abs,
        "stderr_signed": result.stderr_signed,
        "stderr_abs": result.stderr_abs,
        "forward": result.forward,
        "reverse": result.reverse,
    }
    if not model.local:
        # lambda is the state itself: enumerate the Lüders chain exactly
        local_ops = [observables.analyzer_observable(s) for s in (first, second)]
        if config.side == "A":
            x, y = (tensor(m, identity()) for m in local_ops)
        else:
            x, y = (tensor(identity(), m) for m in local_ops)
        psi = model.initial_state
        fwd = harness.chain_correlation(harness.luders_chain_branches(psi, x, y))
        rev = harness.chain_correlation(harness.luders_chain_branches(psi, y, x))
        section["exact"] = {"forward": fwd, "reverse": rev, "t_signed": abs(fwd - rev)}
    doc.time_order = section
    return [f"{i}\t{row[0]}\t{row[1]}\t{row[2]}\t{row[3]}" for i, row in enumerate(result.trace)]


def run(config: RunConfig) -> tuple[ReportDocument, list[str]]:
    """Execute one configured run; returns the report and per-trial table rows."""
    start = time.perf_counter()
    doc = ReportDocument(mode=config.mode, seed=config.seed, config=config.echo())
    table: list[str] = []
    header = "trial\tbin\talice_deg\tbob_deg\tA\tB"
    if config.mode == "identity-checks":
        doc.identity_checks = _identity_checks(config)
    elif config.source == "ou-mandel":
        if config.mode == "sequential":
            raise ConfigError("sequential mode needs a source with measurement updates, not ou-mandel")
        table = [header] + _ou_mandel(config, doc)
    elif config.mode == "four-bin":
        a, a2, b, b2 = _settings(config)
        schedule = harness.FourBinSchedule(a, a2, b, b2, config.trials, config.side, config.tandem)
        report = harness.run_four_bin(_source_model(config), schedule, config.seed, config.workers)
        doc.chsh = report.to_dict()
        doc.chsh["time_order_bound_exact"] = report.time_order_bound_holds_exactly()
        doc.bins = _bin_rows(report, schedule.bins)
        table = [header] + _four_bin_table(report, schedule.bins)
    elif config.mode == "random-settings":
        settings = _settings(config)
        result = harness.random_settings_run(_source_model(config), settings, config.trials,
                                             config.seed, config.workers)
        doc.chsh = result.report.to_dict()
        doc.bins = _bin_rows(result.report, _menu_bins(settings))
        table = [header] + _random_table(result, settings)
    else:
        table = ["trial\tfirst\tthen_second\tsecond\tthen_first"] + _sequential(config, doc)
    if config.timing:
        doc.timing = {"wall_time_s": time.perf_counter() - start}
    return doc, table


def write_outputs(config: RunConfig, doc: ReportDocument, table: list[str]) -> None:
    if config.out:
        text = doc.to_json() if config.out.endswith(".json") else render_text(doc)
        Path(config.out).write_text(text)
    if config.table_out:
        Path(config.table_out).write_text("\n".join(table) + "\n")


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
        doc, table = run(config)
        write_outputs(config, doc, table)
    except ConfigError as exc:
        print(f"belltime: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDegeneracyError, oumandel.UndefinedCorrelationError,
            harness.InsufficientDataError) as exc:
        print(f"belltime: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"belltime: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    sys.stdout.write(render_text(doc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
