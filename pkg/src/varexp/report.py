"""Single-trial inequality reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any


def ratio_of(lhs: float, rhs: float) -> tuple[float, bool]:
    """LHS/RHS with 0/0 reported as 0; the flag marks the degenerate case."""
    if rhs > 0:
        return lhs / rhs, False
    if lhs == 0:
        return 0.0, True
    return math.inf, True


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    ratio: float
    config: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    degenerate: bool = False

    @classmethod
    def build(cls, name: str, lhs: float, rhs: float, config=None, seed=None) -> "InequalityReport":
        r, degenerate = ratio_of(float(lhs), float(rhs))
        return cls(name, float(lhs), float(rhs), r, dict(config or {}), seed, degenerate)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "InequalityReport":
        return cls(**d)
