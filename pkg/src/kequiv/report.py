"""Run configuration and claim reports shared by the command-line driver."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Mapping, Sequence

import flint

VERIFIED, REFUTED, REFUSED = "verified", "refuted", "refused"
EXIT_OK, EXIT_REFUTED, EXIT_MALFORMED, EXIT_BUDGET = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    inputs: tuple[str, ...] = ()
    x_order: int = 6
    q_order: int = 3
    R: int = 3
    primes: tuple[int, ...] = (2, 3, 5)
    budget: int = 20_000_000
    output: str | None = None
    format: str = "human"

    def __post_init__(self):
        for name in ("x_order", "q_order", "R", "budget"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.format not in ("human", "machine"):
            raise ConfigError(f"format must be 'human' or 'machine', not {self.format!r}")
        if any(p < 2 for p in self.primes):
            raise ConfigError("field sizes must be at least 2")

    @classmethod
    def from_mapping(cls, doc: Mapping) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        doc = dict(doc)
        for key in ("inputs", "primes"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)


def jsonable(v):
    """Convert library values into plain JSON data."""
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if hasattr(v, "to_document"):
        return jsonable(v.to_document())
    if isinstance(v, Mapping):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (flint.fmpz_poly, flint.fmpq_poly)):
        return [str(c) for c in v.coeffs()]
    if isinstance(v, (flint.fmpz, flint.fmpq)):
        return str(v)
    return str(v)


@dataclass
class Claim:
    id: str
    tag: str
    status: str
    lhs: object = None
    rhs: object = None
    witness: object = None

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "tag": self.tag,
            "status": self.status,
            "lhs": jsonable(self.lhs),
            "rhs": jsonable(self.rhs),
            "witness": jsonable(self.witness),
        }


@dataclass
class Report:
    command: list[str]
    inputs: dict[str, str] = field(default_factory=dict)
    claims: list[Claim] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, claim: Claim):
        self.claims.append(claim)

    @property
    def exit_status(self) -> int:
        statuses = {c.status for c in self.claims}
        if REFUTED in statuses:
            return EXIT_REFUTED
        if REFUSED in statuses:
            return EXIT_BUDGET
        return EXIT_OK

    def to_document(self) -> dict:
        return {
            "command": list(self.command),
            "inputs": dict(sorted(self.inputs.items())),
            "claims": [c.to_document() for c in sorted(self.claims, key=lambda c: c.id)],
            "data": jsonable(self.data),
            "exit_status": self.exit_status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=2) + "\n"

    def render_human(self) -> str:
        lines = ["$ kequiv " + " ".join(self.command)]
        for path, digest in sorted(self.inputs.items()):
            lines.append(f"input {path}  sha256:{digest[:16]}")
        if self.data:
            lines.extend(_render_data(self.data))
        if self.claims:
            rows = [("claim", "tag", "status", "witness")]
            for c in sorted(self.claims, key=lambda c: c.id):
                rows.append((c.id, c.tag, c.status, _short(c.witness)))
            lines.extend(table(rows))
            counts = {s: sum(c.status == s for c in self.claims) for s in (VERIFIED, REFUTED, REFUSED)}
            lines.append(", ".join(f"{n} {s}" for s, n in counts.items() if n) + f"; exit {self.exit_status}")
        return "\n".join(lines) + "\n"


def _short(v, width: int = 60) -> str:
    if v is None:
        return ""
    s = json.dumps(jsonable(v), sort_keys=True)
    return s if len(s) <= width else s[: width - 3] + "..."


def _render_data(data: Mapping) -> list[str]:
    out = []
    for key in sorted(data):
        v = data[key]
        if isinstance(v, list) and v and isinstance(v[0], (list, tuple)):
            out.append(f"{key}:")
            out.extend("  " + line for line in table([tuple(str(x) for x in row) for row in v]))
        else:
            out.append(f"{key}: {_short(v, 200) if not isinstance(v, str) else v}")
    return out


def table(rows: Sequence[Sequence[str]]) -> list[str]:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip() for r in rows]


def digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
