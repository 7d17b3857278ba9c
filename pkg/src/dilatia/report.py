"""Check records and verification reports with a stable JSON form.

A report is a list of per-check records, each carrying the property it
verified (as a plain statement), the sample size, the worst violation
found, the worst witness, and a pass flag. Serialization is sorted and
timestamp-free so identical (spec, seed, tolerances) runs are
byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA = "dilatia/1"
VERSION = "0.1.0"


def jsonable(value):
    """Coerce witnesses and parameters into JSON-serializable form."""
    if value is None or isinstance(value, (bool, int, str, float)):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if hasattr(value, "as_json"):
        return value.as_json()
    return repr(value)


@dataclass
class CheckRecord:
    """Outcome of one verified property."""

    name: str
    claim: str
    samples: int
    max_violation: float
    witness: object
    passed: bool
    info: dict = field(default_factory=dict)

    @classmethod
    def from_violation(cls, name, claim, samples, violation, witness, tol, info=None):
        v = float(violation)
        return cls(name, claim, int(samples), v, witness, bool(v <= tol), dict(info or {}))

    def as_json(self):
        return {
            "name": self.name,
            "claim": self.claim,
            "samples": int(self.samples),
            "max_violation": jsonable(self.max_violation),
            "witness": jsonable(self.witness),
            "pass": bool(self.passed),
            "info": jsonable(self.info),
        }


@dataclass
class VerificationReport:
    """All check records produced by one command or verifier call."""

    command: str
    seed: int
    tolerances: dict
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.checks.append(record)
        return record

    def extend(self, records) -> None:
        for r in records:
            self.add(r)

    def merge(self, other: "VerificationReport", prefix: str = "") -> None:
        for r in other.checks:
            if prefix:
                r = CheckRecord(prefix + r.name, r.claim, r.samples,
                                r.max_violation, r.witness, r.passed, r.info)
            self.add(r)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.checks)

    def record(self, name: str) -> CheckRecord:
        for r in self.checks:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_json(self):
        return {
            "schema": SCHEMA,
            "tool": {"name": "dilatia", "version": VERSION},
            "command": self.command,
            "seed": int(self.seed),
            "tolerances": jsonable(self.tolerances),
            "checks": [r.as_json() for r in sorted(self.checks, key=lambda r: r.name)],
            "info": jsonable(self.info),
            "pass": bool(self.passed),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_json(), indent=2, sort_keys=True) + "\n"
