"""Check reports with a stable, deterministic schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

SCHEMA = "finhall-report/1"


def jsonable(x):
    """Convert Fractions, tuples and sets into deterministic JSON values."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(jsonable(v) for v in x)
    if hasattr(x, "to_json"):
        return x.to_json()
    return x


@dataclass
class Report:
    """A named list of check entries; passes iff every entry passes."""

    name: str
    entries: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, check: str, obj, passed: bool, witness=None):
        self.entries.append({"check": check, "object": obj, "pass": bool(passed), "witness": witness})

    def extend(self, other: "Report"):
        self.entries.extend(other.entries)

    @property
    def passed(self) -> bool:
        return all(e["pass"] for e in self.entries)

    @property
    def failures(self):
        return [e for e in self.entries if not e["pass"]]

    def summary(self) -> dict:
        return {"name": self.name, "checks": len(self.entries), "failures": len(self.failures), "pass": self.passed}

    def to_json(self):
        return {
            "schema": SCHEMA,
            "name": self.name,
            "pass": self.passed,
            "info": jsonable(self.info),
            "entries": [jsonable(e) for e in self.entries],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def __repr__(self):
        s = self.summary()
        return f"Report({s['name']}: {s['checks']} checks, {s['failures']} failures)"
