"""Structured scenario reports: ``report.json`` and ``summary.csv``."""

import csv
import datetime as _dt
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Check:
    name: str
    actual: float
    tol: float
    kind: str = "<"  # "<": actual < tol ; ">": actual > tol
    expected: float = 0.0

    @property
    def passed(self):
        a = float(self.actual)
        return bool(np.isfinite(a) and (a < self.tol if self.kind == "<" else a > self.tol))

    def as_dict(self):
        return {"name": self.name, "expected": self.expected, "actual": float(self.actual),
                "tolerance": self.tol, "relation": self.kind, "passed": self.passed}


@dataclass
class Report:
    scenario: str
    seed: int
    config: dict
    values: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def check(self, name, actual, tol, kind="<", expected=0.0):
        c = Check(name, float(actual), float(tol), kind, expected)
        self.checks.append(c)
        return c.passed

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self):
        return not self.failures

    def as_dict(self, timestamp=None):
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "generated": timestamp,
            "config": self.config,
            "values": _plain(self.values),
            "checks": [c.as_dict() for c in self.checks],
            "failures": [c.as_dict() for c in self.failures],
            "passed": self.ok,
        }

    def summary_rows(self):
        rows = [("value", k, _fmt(v), "", "") for k, v in _flatten(_plain(self.values))]
        rows += [("check", c.name, _fmt(c.actual), f"{c.kind}{_fmt(c.tol)}",
                  "pass" if c.passed else "FAIL") for c in self.checks]
        return rows

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        (out / "report.json").write_text(json.dumps(self.as_dict(stamp), indent=2) + "\n")
        buf = io.StringIO()
        buf.write(f"# generated {stamp}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "name", "value", "tolerance", "status"])
        w.writerows(self.summary_rows())
        (out / "summary.csv").write_text(buf.getvalue())
        return out


def write_traction_dump(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["patch", "flavor", "x", "y", "z", "nx", "ny", "nz",
                    "tx", "ty", "tz", "gx", "gy", "gz"])
        for r in rows:
            w.writerow([r["patch"], r["flavor"], *map(_fmt, r["point"]), *map(_fmt, r["n"]),
                        *map(_fmt, r["t"]), *map(_fmt, r["g"])])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list):
            continue
        else:
            yield key, v
