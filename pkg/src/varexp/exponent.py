"""Variable exponents p(.) sampled on a node grid with a constant tail value.

Inside the bounding box the exponent is the multilinear interpolant of the
node samples; outside it equals ``p_inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .geometry import Cube, Grid


@dataclass(frozen=True, eq=False)
class ExponentField:
    n: int
    box: tuple[tuple[float, float], ...]
    samples: np.ndarray
    p_inf: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        samples = np.array(self.samples, dtype=float)
        if len(box) != self.n or samples.ndim != self.n:
            raise ValueError("box/samples do not match the dimension n")
        if any(k < 2 for k in samples.shape):
            raise ValueError("need at least two nodes per axis")
        if not (np.all(np.isfinite(samples)) and np.all(samples > 0)):
            raise ValueError("exponent samples must lie in (0, inf)")
        if not (math.isfinite(self.p_inf) and self.p_inf > 0):
            raise ValueError("tail value p_inf must lie in (0, inf)")
        samples.setflags(write=False)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "p_inf", float(self.p_inf))

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value: float, n: int = 1, box=None) -> "ExponentField":
        box = box if box is not None else ((-1.0, 1.0),) * n
        return cls(n, box, np.full((2,) * n, float(value)), float(value))

    @classmethod
    def from_callable(cls, fn: Callable, box, shape, p_inf: float) -> "ExponentField":
        box = tuple(tuple(b) for b in box)
        shape = (shape,) * len(box) if np.isscalar(shape) else tuple(shape)
        axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(box, shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(len(box), box, np.broadcast_to(fn(*mesh), shape), p_inf)

    # -- geometry of the node grid ----------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.samples.shape

    def node_axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, k) for (lo, hi), k in zip(self.box, self.shape)]

    def node_points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.node_axes(), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([(hi - lo) / (k - 1) for (lo, hi), k in zip(self.box, self.shape)])

    @property
    def p_minus(self) -> float:
        return float(min(self.samples.min(), self.p_inf))

    @property
    def p_plus(self) -> float:
        return float(max(self.samples.max(), self.p_inf))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.samples == self.p_inf))

    # -- evaluation -------------------------------------------------------
    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.n == 1 and (pts.ndim == 1 or pts.shape[-1] != 1):
            pts = pts.reshape(-1, 1)
        pts = pts.reshape(-1, self.n)
        if self.is_constant:
            return np.full(len(pts), self.p_inf)
        interp = self._cache.get("interp")
        if interp is None:
            interp = RegularGridInterpolator(self.node_axes(), self.samples, method="linear",
                                             bounds_error=False, fill_value=self.p_inf)
            self._cache["interp"] = interp
        return interp(pts)

    def on(self, grid: Grid) -> np.ndarray:
        """Exponent values at the cell midpoints of ``grid`` (cached per grid)."""
        key = ("on", grid)
        vals = self._cache.get(key)
        if vals is None:
            vals = self(grid.points()).reshape(grid.shape)
            vals.setflags(write=False)
            self._cache[key] = vals
        return vals

    def same_nodes(self, other: "ExponentField") -> bool:
        return self.box == other.box and self.shape == other.shape

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "ExponentField":
        """Apply ``fn`` pointwise to the samples and to the tail."""
        return ExponentField(self.n, self.box, fn(self.samples), float(fn(np.float64(self.p_inf))))

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "box": [list(b) for b in self.box],
            "shape": list(self.shape),
            "samples": self.samples.ravel().tolist(),
            "p_inf": self.p_inf,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExponentField":
        shape = tuple(d["shape"])
        return cls(int(d["n"]), tuple(tuple(b) for b in d["box"]),
                   np.asarray(d["samples"], dtype=float).reshape(shape), float(d["p_inf"]))


def inf_sup(p: ExponentField, region=None) -> tuple[float, float]:
    """(p^-(E), p^+(E)) over the node samples in E, plus p_inf if E meets the tail.

    ``region`` is None (all of R^n), ``"tail"`` (the complement of the box),
    ``"box"`` or a :class:`Cube`.
    """
    if region is None:
        return p.p_minus, p.p_plus
    if isinstance(region, str):
        if region == "tail":
            return p.p_inf, p.p_inf
        if region == "box":
            return float(p.samples.min()), float(p.samples.max())
        raise ValueError(f"unknown region {region!r}")
    if isinstance(region, Cube):
        vals = p.samples.ravel()[region.contains(p.node_points())]
        lo, hi = region.lower, region.upper
        meets_tail = any(l < b[0] or u > b[1] for l, u, b in zip(lo, hi, p.box))
        if meets_tail:
            vals = np.append(vals, p.p_inf)
        if vals.size == 0:
            raise ValueError("empty region")
        return float(vals.min()), float(vals.max())
    raise TypeError(f"unsupported region type {type(region).__name__}")


@dataclass(frozen=True)
class LHReport:
    C_local: float
    C_decay: float
    threshold: float
    passed: bool


def _padded_nodes(p: ExponentField):
    """Node values with one ghost layer of tail nodes around the box."""
    vals = np.pad(p.samples, 1, mode="constant", constant_values=p.p_inf)
    axes = []
    for (lo, hi), k, s in zip(p.box, p.shape, p.spacing):
        axes.append(np.concatenate([[lo - s], np.linspace(lo, hi, k), [hi + s]]))
    return vals, axes


def _local_constant(vals: np.ndarray, spacing: np.ndarray, radius: float = 0.5) -> float:
    n = vals.ndim
    reach = [int(math.floor(radius / s + 1e-12)) for s in spacing]
    best = 0.0
    ranges = [range(-r, r + 1) for r in reach]
    for off in np.ndindex(*[len(r) for r in ranges]):
        o = np.array([ranges[i][off[i]] for i in range(n)])
        nz = np.flatnonzero(o)
        if nz.size == 0 or o[nz[0]] < 0:
            continue  # each unordered pair once
        dist = float(np.sqrt(np.sum((o * spacing) ** 2)))
        if dist > radius or dist == 0.0:
            continue
        a = vals[tuple(slice(max(0, -k), vals.shape[i] - max(0, k)) for i, k in enumerate(o))]
        b = vals[tuple(slice(max(0, k), vals.shape[i] - max(0, -k)) for i, k in enumerate(o))]
        jump = float(np.max(np.abs(a - b))) if a.size else 0.0
        best = max(best, jump * -math.log(dist))
    return best


def _decay_constant(vals: np.ndarray, axes: list[np.ndarray], p_inf: float) -> float:
    mesh = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(g ** 2 for g in mesh)).ravel()
    v = vals.ravel()
    order = np.argsort(r, kind="stable")
    r_s, v_s = r[order], v[order]
    # far tail points have |y| >= |x| for every x
    suf_max = np.maximum.accumulate(np.append(v_s, p_inf)[::-1])[::-1]
    suf_min = np.minimum.accumulate(np.append(v_s, p_inf)[::-1])[::-1]
    first = np.searchsorted(r_s, r_s, side="left")
    spread = np.maximum(suf_max[first] - v_s, v_s - suf_min[first])
    return float(np.max(spread * np.log(math.e + r_s)))


def check_log_holder(p: ExponentField, threshold: float = 100.0) -> LHReport:
    """Empirical log-Hoelder constants by exhaustive scan of the node samples.

    The local constant is the max of |p(x)-p(y)| * (-log|x-y|) over node pairs
    with 0 < |x-y| <= 1/2; the decay constant is the max of
    |p(x)-p(y)| * log(e+|x|) over pairs with |y| >= |x|.  A ghost layer of tail
    nodes and a point at infinity (value p_inf) take part in both scans.
    """
    if p.is_constant:
        return LHReport(0.0, 0.0, threshold, True)
    vals, axes = _padded_nodes(p)
    c_loc = _local_constant(vals, p.spacing)
    c_dec = _decay_constant(vals, axes, p.p_inf)
    ok = math.isfinite(c_loc) and math.isfinite(c_dec) and c_loc <= threshold and c_dec <= threshold
    return LHReport(c_loc, c_dec, threshold, bool(ok))


@dataclass(frozen=True)
class LHRefinementReport:
    reports: tuple[LHReport, ...]
    growth: tuple[float, ...]
    diverging: bool
    passed: bool


def classify_log_holder(refinements: Sequence[ExponentField], threshold: float = 100.0,
                        min_growth: float = 2.0) -> LHRefinementReport:
    """Run :func:`check_log_holder` on successively finer samplings of one exponent.

    The exponent is flagged as diverging when the local constant increases by
    at least ``min_growth`` at every refinement step.
    """
    reports = tuple(check_log_holder(p, threshold) for p in refinements)
    c = [r.C_local for r in reports]
    growth = tuple((b / a) if a > 0 else (math.inf if b > 0 else 1.0) for a, b in zip(c, c[1:]))
    diverging = len(growth) > 0 and all(g >= min_growth for g in growth)
    passed = all(r.passed for r in reports) and not diverging
    return LHRefinementReport(reports, growth, diverging, passed)


def holder_scale(ps: Sequence[ExponentField], alpha: float, n: int) -> ExponentField:
    """q(.) with 1/q = sum_i 1/p_i - alpha/n, pointwise on the shared nodes and tail."""
    if not ps:
        raise ValueError("need at least one exponent")
    base = ps[0]
    for p in ps[1:]:
        if not p.same_nodes(base):
            raise ValueError("exponents must share the node grid and box")
    inv = sum(1.0 / p.samples for p in ps) - alpha / n
    inv_tail = sum(1.0 / p.p_inf for p in ps) - alpha / n
    if np.any(inv <= 0):
        idx = np.unravel_index(int(np.argmin(inv)), inv.shape)
        raise ValueError(f"scaling violates P0 at sample {tuple(int(i) for i in idx)} (1/q = {inv[idx]:.6g})")
    if inv_tail <= 0:
        raise ValueError(f"scaling violates P0 at the tail (1/q = {inv_tail:.6g})")
    return ExponentField(base.n, base.box, 1.0 / inv, 1.0 / inv_tail)


def atom_degree(p: ExponentField, n: int | None = None) -> int:
    """max(floor(n/p_- - n), -1) with p_- = min(p^-, 1)."""
    n = p.n if n is None else n
    p_low = min(p.p_minus, 1.0)
    # the small guard keeps exact-rational cases such as p^- = 2/3 from rounding down
    return max(int(math.floor(n / p_low - n + 1e-9)), -1)


def conjugate(p: ExponentField) -> ExponentField:
    """p'(.) with 1/p + 1/p' = 1."""
    if p.p_minus <= 1.0:
        raise ValueError("conjugate undefined outside P (need p^- > 1)")
    return p.map(lambda v: v / (v - 1.0))


def r_p(p: ExponentField) -> float:
    """Hoelder constant 1 + 1/p^- - 1/p^+."""
    return 1.0 + 1.0 / p.p_minus - 1.0 / p.p_plus
