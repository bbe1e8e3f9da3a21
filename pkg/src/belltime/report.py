"""Report document: one internal structure, JSON and plain-text renderings."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from . import __version__

SCHEMA_VERSION = "1.0"


class ReportSchemaError(ValueError):
    pass


@dataclass
class ReportDocument:
    mode: str
    seed: int
    config: dict
    chsh: dict | None = None
    bins: list | None = None
    time_order: dict | None = None
    identity_checks: dict | None = None
    oumandel: dict | None = None
    timing: dict | None = None
    software_version: str = __version__
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        version = str(d.get("schema_version", ""))
        major = version.split(".")[0]
        if major != SCHEMA_VERSION.split(".")[0]:
            raise ReportSchemaError(f"unsupported report schema version {version!r}")
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ReportSchemaError(f"unknown report fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text))


def _fmt(x, digits: int = 6) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.{digits}f}"
    return str(x)


def render_text(doc: ReportDocument) -> str:
    lines = [f"belltime {doc.software_version}  mode={doc.mode}  seed={doc.seed}"]
    cfg = doc.config
    lines.append("config: " + ", ".join(f"{k}={v}" for k, v in cfg.items()))
    if doc.chsh:
        c = doc.chsh
        lines.append(f"source={c['source']} kind={c['kind']} protocol={c['protocol']} side={c['side']}")
        lines.append(f"settings (deg): {c['settings_deg']}")
        for row in doc.bins or []:
            lines.append(f"  bin {row['bin']}: A={row['alice_deg']:g} B={row['bob_deg']:g}  "
                         f"E={_fmt(row['mean'])} +/- {_fmt(row['stderr'])}  (n={row['n']})")
        lines.append(f"chsh_lhs = {_fmt(c['chsh_lhs'])} +/- {_fmt(c['chsh_stderr'])}")
        lines.append(f"t_signed = {_fmt(c['t_signed'])}  t_abs = {_fmt(c['t_abs'])}  f = {_fmt(c['f'])}")
        for name, v in c["verdicts"].items():
            lines.append(f"  {name:<16} bound={_fmt(v['bound'])} margin={_fmt(v['margin'])} "
                         f"stderr={_fmt(v['stderr'])} -> {v['status']}")
    if doc.time_order:
        t = doc.time_order
        lines.append(f"time-order term ({t['side']}-side, {t['first_deg']:g} -> {t['second_deg']:g} deg, "
                     f"n={t['n']}):")
        lines.append(f"  t_signed = {_fmt(t['t_signed'])} +/- {_fmt(t['stderr_signed'])}")
        lines.append(f"  t_abs    = {_fmt(t['t_abs'])} +/- {_fmt(t['stderr_abs'])}")
        lines.append(f"  E[forward] = {_fmt(t['forward'])}  E[reverse] = {_fmt(t['reverse'])}")
        if t.get("exact"):
            lines.append(f"  exact Lüders chain: forward {_fmt(t['exact']['forward'])}, "
                         f"reverse {_fmt(t['exact']['reverse'])}")
    if doc.identity_checks:
        lines.append("identity checks (max residuals):")
        for name, value in doc.identity_checks.items():
            lines.append(f"  {name:<32} {value!r}")
    if doc.oumandel:
        lines.append("ou-mandel:")
        for name, value in doc.oumandel.items():
            lines.append(f"  {name:<32} {value!r}")
    if doc.timing:
        lines.append(f"wall time: {doc.timing['wall_time_s']:.3f} s")
    return "\n".join(lines) + "\n"
