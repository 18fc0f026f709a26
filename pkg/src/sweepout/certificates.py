"""Recorded instances of inequalities evaluated on a concrete run."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

RELATIONS = ("<=", "<", ">=", ">", "==")


@dataclass
class Certificate:
    """One inequality ``lhs <relation> rhs`` with the constants it used.

    ``slack`` is the ratio ``lhs / rhs``; for ``<=`` a value at most 1 passes.
    Non-strict relations and equalities accept a relative rounding margin
    ``rtol``.
    """

    name: str
    lhs: float
    rhs: float
    relation: str = "<="
    constants: dict = field(default_factory=dict)
    note: str = ""
    rtol: float = 1e-12
    passed: bool = field(init=False)
    slack: float = field(init=False)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        margin = self.rtol * max(abs(self.lhs), abs(self.rhs))
        lhs, rhs = self.lhs, self.rhs
        self.passed = bool(
            {
                "<=": lhs <= rhs + margin,
                "<": lhs < rhs,
                ">=": lhs >= rhs - margin,
                ">": lhs > rhs,
                "==": abs(lhs - rhs) <= margin,
            }[self.relation]
        )
        if rhs != 0:
            self.slack = lhs / rhs
        else:
            self.slack = 0.0 if lhs == 0 else math.inf

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "pass": self.passed,
            "slack": self.slack,
            "constants": dict(self.constants),
            "note": self.note,
        }


def check(name, lhs, rhs, relation="<=", **kw) -> Certificate:
    return Certificate(name, lhs, rhs, relation, **kw)


def all_pass(certs) -> bool:
    return all(c.passed for c in certs)


def failures(certs):
    return [c for c in certs if not c.passed]
