"""CSV/JSON emission with an embedded run manifest, and the matching reader.

Floats are written with 15 significant digits and exact rationals as
``num/den`` strings, so a file read back and written again is unchanged.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from lyapflow import __version__

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_FLOAT = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?(inf|nan)$")


def format_value(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return f"{x:.15g}"
    if x is None:
        return ""
    return str(x)


def parse_value(s: str) -> Any:
    """Inverse of :func:`format_value`: int/Fraction, float, or the raw string."""
    t = s.strip()
    if _RATIONAL.match(t):
        f = Fraction(t)
        return f.numerator if f.denominator == 1 and "/" not in t else f
    if _FLOAT.match(t):
        return float(t)
    return t


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return format_value(x)
    if isinstance(x, float):
        return float(format_value(x))
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class RunManifest:
    subcommand: str
    flags: dict = field(default_factory=dict)
    config_hash: str = ""
    version: str = __version__
    timestamp: str = ""

    @classmethod
    def create(cls, subcommand: str, flags: dict, config: dict | None = None) -> "RunManifest":
        payload = json.dumps(_jsonable(config if config is not None else flags), sort_keys=True)
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
        now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return cls(subcommand, _jsonable(flags), digest, __version__, now)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "flags": self.flags,
            "config_hash": self.config_hash,
            "version": self.version,
            "timestamp": self.timestamp,
        }

    def header(self) -> str:
        return "# " + json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    manifest: RunManifest | None = None


def write_csv(table: Table) -> str:
    buf = _io.StringIO()
    if table.manifest is not None:
        buf.write(table.manifest.header() + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> Table:
    manifest = None
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            if manifest is None:
                data = json.loads(line[1:].strip())
                manifest = RunManifest(**data)
            continue
        body.append(line)
    reader = csv.reader(body)
    columns = next(reader, [])
    rows = [[parse_value(c) for c in r] for r in reader]
    return Table(columns, rows, manifest)


def write_json(payload: Any, manifest: RunManifest | None = None) -> str:
    out = {"manifest": manifest.to_dict() if manifest else None, "data": _jsonable(payload)}
    return json.dumps(out, indent=2, sort_keys=False) + "\n"


def read_json(text: str) -> tuple[Any, RunManifest | None]:
    obj = json.loads(text)
    m = obj.get("manifest")
    return obj.get("data"), (RunManifest(**m) if m else None)


def rational_row(values: Iterable[Fraction]) -> str:
    """Comma-separated rationals, e.g. ``2, -12/5, -72/175``."""
    return ", ".join(format_value(Fraction(v)) for v in values)


def table_from_records(columns: Sequence[str], records: Iterable[Sequence[Any]], manifest=None) -> Table:
    return Table(list(columns), [list(r) for r in records], manifest)
