"""
Audit report container and its published JSON schema.
"""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List

import jsonschema

SCHEMA_VERSION = "1.0"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "PrivCache audit report",
    "type": "object",
    "required": ["schema_version", "scheme", "params", "seed", "mode", "checks", "pass"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"type": "string"},
        "scheme": {"type": "string"},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
        "mode": {"type": "string", "enum": ["exact", "rank", "aux", "statistical", "correctness"]},
        "pass": {"type": "boolean"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "pass", "metric", "detail"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "pass": {"type": "boolean"},
                    "metric": {"type": ["number", "string", "integer", "null"]},
                    "detail": {"type": ["string", "object"]},
                },
            },
        },
    },
}


def _plain(value):
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, 'item'):
        return value.item()
    return value


@dataclass
class CheckResult:
    name: str
    passed: bool
    metric: Any = None
    detail: Any = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "pass": bool(self.passed), "metric": _plain(self.metric),
                "detail": _plain(self.detail)}


@dataclass
class AuditReport:
    scheme: str
    params: Dict[str, Any]
    seed: int
    mode: str
    checks: List[CheckResult] = field(default_factory=list)

    def add(self, name: str, passed: bool, metric=None, detail="") -> CheckResult:
        check = CheckResult(name, bool(passed), metric, detail)
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self):
        return next((c for c in self.checks if not c.passed), None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "scheme": self.scheme,
            "params": _plain(self.params),
            "seed": int(self.seed),
            "mode": self.mode,
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def validate_report(data: Dict[str, Any]):
    """Raise jsonschema.ValidationError when a report does not match the schema."""
    jsonschema.validate(instance=data, schema=REPORT_SCHEMA)
