"""Scenarios, seeded sweeps and their aggregated reports."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .trials import TRIALS

SEED_ENV = "VAREXP_SEED"


@dataclass
class Scenario:
    """A check type plus the grid of trials (seed x scale x resolution x shift) to run it on.

    ``thresholds`` keys:
      ratio_max / ratio_min   bounds on every trial ratio
      drift_c_max             bound on max/min across (scale, resolution, shift)
                              groups of the per-group maximal ratio
      drift_seed_max          bound on max/min of the ratios of each seed
    """

    name: str
    check: str
    params: dict[str, Any] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    scales: list[float] = field(default_factory=lambda: [1.0])
    resolutions: list[int] = field(default_factory=lambda: [256])
    shifts: list[float] = field(default_factory=lambda: [0.0])
    thresholds: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.check not in TRIALS:
            raise ValueError(f"unknown check {self.check!r}; known: {sorted(TRIALS)}")
        if any(not isinstance(s, int) for s in self.seeds):
            raise ValueError("seeds must be explicit integers")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def effective_seeds(self) -> list[int]:
        """Scenario seeds, or a block starting at $VAREXP_SEED of the same length."""
        env = os.environ.get(SEED_ENV)
        if env is None or env == "":
            return list(self.seeds)
        base = int(env)
        return [base + i for i in range(len(self.seeds))]

    def trials(self) -> list[tuple[int, float, int, float]]:
        return [(s, float(sc), int(r), float(sh)) for s in self.effective_seeds()
                for sc in self.scales for r in self.resolutions for sh in self.shifts]


@dataclass
class TrialRow:
    seed: int
    scale: float
    resolution: int
    shift: float
    lhs: float | None
    rhs: float | None
    ratio: float | None
    ok: bool
    degenerate: bool = False
    error: str | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class ScenarioReport:
    name: str
    check: str
    rows: list[TrialRow]
    thresholds: dict[str, float]
    aggregate: dict[str, Any]
    passed: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioReport":
        rows = [TrialRow(**r) for r in d["rows"]]
        return cls(d["name"], d["check"], rows, d["thresholds"], d["aggregate"], d["passed"],
                   list(d.get("warnings", [])))


def _spread(values: list[float]) -> float:
    vals = [v for v in values if v is not None]
    if not vals:
        return 1.0
    lo, hi = min(vals), max(vals)
    if hi == 0:
        return 1.0
    return hi / lo if lo > 0 else math.inf


def aggregate(rows: list[TrialRow]) -> dict[str, Any]:
    good = [r for r in rows if r.error is None and r.ratio is not None]
    ratios = [r.ratio for r in good]
    groups: dict[tuple, list[float]] = {}
    per_seed: dict[int, list[float]] = {}
    for r in good:
        groups.setdefault((r.scale, r.resolution, r.shift), []).append(r.ratio)
        per_seed.setdefault(r.seed, []).append(r.ratio)
    group_max = {f"{k[0]:g}/{k[1]}/{k[2]:g}": max(v) for k, v in groups.items()}
    seed_drift = [_spread(v) for v in per_seed.values()]
    return {
        "trials": len(rows),
        "errors": sum(r.error is not None for r in rows),
        "failed": sum((not r.ok) for r in rows),
        "max_ratio": max(ratios) if ratios else None,
        "min_ratio": min(ratios) if ratios else None,
        "group_max": group_max,
        "drift_c": _spread(list(group_max.values())),
        "drift_seed": max(seed_drift) if seed_drift else 1.0,
    }


def decide(rows: list[TrialRow], thresholds: dict[str, float]) -> tuple[bool, dict[str, Any], list[str]]:
    """Pass flag, aggregate and warnings as a pure function of rows and thresholds."""
    agg = aggregate(rows)
    warnings = []
    if not rows:
        warnings.append("no trials: pass is vacuous")
        return True, agg, warnings
    ok = agg["errors"] == 0 and agg["failed"] == 0
    if "ratio_max" in thresholds and agg["max_ratio"] is not None:
        ok &= agg["max_ratio"] <= thresholds["ratio_max"]
    if "ratio_min" in thresholds and agg["min_ratio"] is not None:
        ok &= agg["min_ratio"] >= thresholds["ratio_min"]
    if "drift_c_max" in thresholds:
        ok &= agg["drift_c"] <= thresholds["drift_c_max"]
    if "drift_seed_max" in thresholds:
        ok &= agg["drift_seed"] <= thresholds["drift_seed_max"]
    if agg["errors"]:
        warnings.append(f"{agg['errors']} trial(s) raised")
    return bool(ok), agg, warnings


def run_trial(scenario: Scenario, seed: int, scale: float, resolution: int, shift: float) -> TrialRow:
    fn = TRIALS[scenario.check]
    try:
        out = fn(scenario.params, seed, scale, resolution, shift)
    except Exception as exc:  # recorded per trial; the sweep continues
        return TrialRow(seed, scale, resolution, shift, None, None, None, False,
                        error=f"{type(exc).__name__}: {exc}")
    ratio = out["ratio"]
    ok = out.get("ok")
    if ok is None:
        ok = ratio is not None and not math.isnan(ratio)
    return TrialRow(seed, scale, resolution, shift, out["lhs"], out["rhs"], ratio, bool(ok),
                    out.get("degenerate", False), None, out.get("extra", {}))


def run(scenario: Scenario, threads: int = 1) -> ScenarioReport:
    """Execute every trial; rows come back in trial order whatever the thread count."""
    jobs = scenario.trials()
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda j: run_trial(scenario, *j), jobs))
    else:
        rows = [run_trial(scenario, *j) for j in jobs]
    passed, agg, warnings = decide(rows, scenario.thresholds)
    return ScenarioReport(scenario.name, scenario.check, rows, dict(scenario.thresholds), agg, passed, warnings)
