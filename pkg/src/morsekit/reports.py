"""Check reports and deterministic JSON serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

SCHEMA_VERSION = "morse-kit-report/1"

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}


def report_schema_version() -> str:
    """The frozen report schema identifier.

    >>> report_schema_version()
    'morse-kit-report/1'
    """
    return SCHEMA_VERSION


def to_jsonable(obj: Any, fmt=None) -> Any:
    """Recursively convert to JSON-safe values.

    Fractions with denominator 1 become ints, other Fractions ``"p/q"``;
    floats are rounded to 12 significant digits so reports are stable.
    ``fmt`` formats vertices (tuples are otherwise emitted as lists).
    """
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return obj.numerator if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict(), fmt)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, fmt) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v, fmt) for v in items]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class Violation:
    """A failed assertion, replayable from its witness data."""

    instance: int
    bound: Any
    observed: Any
    witness: dict = field(default_factory=dict)
    lower: bool = False  # the bound is a lower bound on the observed value

    @property
    def slack(self):
        return self.observed - self.bound if self.lower else self.bound - self.observed

    def to_dict(self) -> dict:
        return {"instance": self.instance, "bound": self.bound, "observed": self.observed,
                "kind": "lower" if self.lower else "upper", "slack": self.slack,
                "witness": self.witness}


@dataclass
class CheckReport:
    """Outcome of a checker: verdict is ``fail`` iff there are violations."""

    check: str
    anchor: str
    params: dict = field(default_factory=dict)
    instances: int = 0
    skipped: int = 0
    skip_reasons: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    max_slack: Any = None
    min_slack: Any = None
    extra: dict = field(default_factory=dict)
    inconclusive: bool = False

    @property
    def verdict(self) -> str:
        if self.violations:
            return FAIL
        return INCONCLUSIVE if self.inconclusive else PASS

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def skip(self, reason: str) -> None:
        self.skipped += 1
        self.skip_reasons[reason] = self.skip_reasons.get(reason, 0) + 1

    def record(self, instance: int, bound, observed, witness: dict | None = None,
               lower: bool = False, count: bool = True) -> bool:
        """Record one assertion; returns True iff it holds.

        Upper bounds need observed <= bound, lower bounds observed >= bound.
        ``count=False`` adds a further assertion to the current instance.
        """
        if count:
            self.instances += 1
        slack = observed - bound if lower else bound - observed
        if slack < 0:
            self.violations.append(Violation(instance, bound, observed, witness or {}, lower))
            return False
        if self.max_slack is None or slack > self.max_slack:
            self.max_slack = slack
        if self.min_slack is None or slack < self.min_slack:
            self.min_slack = slack
        return True

    def merge(self, other: "CheckReport") -> None:
        self.instances += other.instances
        self.skipped += other.skipped
        for k, v in other.skip_reasons.items():
            self.skip_reasons[k] = self.skip_reasons.get(k, 0) + v
        self.violations.extend(other.violations)
        for s in (other.max_slack,):
            if s is not None and (self.max_slack is None or s > self.max_slack):
                self.max_slack = s
        for s in (other.min_slack,):
            if s is not None and (self.min_slack is None or s < self.min_slack):
                self.min_slack = s

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "check": self.check,
            "anchor": self.anchor,
            "params": self.params,
            "verdict": self.verdict,
            "instances": self.instances,
            "skipped": self.skipped,
            "skip_reasons": self.skip_reasons,
            "violations": self.violations,
            "max_slack": self.max_slack,
            "min_slack": self.min_slack,
            "extra": self.extra,
        }


def wrap(kind: str, anchor: str, params: dict, body: Any) -> dict:
    """Envelope for non-check reports (profiles, experiments, constants)."""
    return {"schema": SCHEMA_VERSION, "report": kind, "anchor": anchor,
            "params": params, "result": body}


def check_schema(data: dict) -> None:
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"report schema {data.get('schema')!r} != {SCHEMA_VERSION!r}")
