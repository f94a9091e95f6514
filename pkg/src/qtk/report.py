"""Verdicts, exact-number serialization and the JSON report envelope."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

SCHEMA_VERSION = "1.0"


@dataclass
class Verdict:
    name: str
    passed: bool
    checked: int = 0
    witness: Any = None
    evidence: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": bool(self.passed), "checked": int(self.checked)}
        if self.witness is not None:
            out["witness"] = self.witness
        out["evidence"] = self.evidence
        return out


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, an int, or a decimal string into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def fmt_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def jsonable(obj):
    """Recursively convert numpy / Fraction / tuple-keyed data to plain JSON."""
    if isinstance(obj, Fraction):
        return fmt_rational(obj)
    if isinstance(obj, Verdict):
        return jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=1) + "\n"


def load_schema() -> dict:
    """The JSON schema every CLI report conforms to."""
    from importlib import resources

    return json.loads(resources.files("qtk").joinpath("report_schema.json").read_text())
