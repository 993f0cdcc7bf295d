"""Cubes, the E_A region algebra, and uniformly sampled grid functions.

Grid functions are piecewise constant on the cells of a uniform grid and are
zero outside their bounding box.  Integration is the midpoint rule, so no
integrand is ever evaluated on a cell boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

_BIT_REPRODUCIBLE = False


def set_bit_reproducible(flag: bool) -> None:
    """Switch integration to correctly rounded (order-independent) summation."""
    global _BIT_REPRODUCIBLE
    _BIT_REPRODUCIBLE = bool(flag)


def bit_reproducible() -> bool:
    return _BIT_REPRODUCIBLE


def _as_box(box) -> tuple[tuple[float, float], ...]:
    out = tuple((float(lo), float(hi)) for lo, hi in box)
    for lo, hi in out:
        if not hi > lo:
            raise ValueError(f"degenerate box side [{lo}, {hi}]")
    return out


@dataclass(frozen=True)
class Cube:
    """Closed axis-aligned cube with the given center and side length."""

    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, "side", float(self.side))
        if not self.side > 0:
            raise ValueError("cube side length must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side ** self.n

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center) - self.side / 2

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.center) + self.side / 2

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self.n and self.n == 1:
            pts = pts.reshape(-1, 1)
        d = np.abs(pts - np.asarray(self.center))
        return np.all(d <= self.side / 2, axis=-1)

    def translate(self, shift) -> "Cube":
        return Cube(tuple(np.asarray(self.center) + np.asarray(shift, dtype=float)), self.side)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "side": self.side}

    @classmethod
    def from_dict(cls, d: dict) -> "Cube":
        return cls(tuple(d["center"]), d["side"])


def dilate(cube: Cube, factor: float) -> Cube:
    """Same center, side length multiplied by ``factor``."""
    if not factor > 0:
        raise ValueError("dilation factor must be positive")
    return Cube(cube.center, cube.side * factor)


def default_kappa(n: int) -> float:
    return 2.0 * math.sqrt(n)


def region_EA(cubes: Sequence[Cube], A: Iterable[int], kappa: float | None = None) -> Callable:
    """Membership predicate of E_A for the dilated cubes Q*_j = dilate(Q_j, kappa).

    Indices in ``A`` are 0-based.  A point is in E_A when it lies outside Q*_j
    for every j in A and inside Q*_j for every j not in A.
    """
    A = sorted(set(A))
    m = len(cubes)
    if not A:
        raise ValueError("A must be a nonempty index subset")
    if A[0] < 0 or A[-1] >= m:
        raise ValueError(f"A={A} is not a subset of range({m})")
    if kappa is None:
        kappa = default_kappa(cubes[0].n)
    stars = [dilate(Q, kappa) for Q in cubes]
    Ac = [j for j in range(m) if j not in A]

    def predicate(points) -> np.ndarray:
        inside = [stars[j].contains(points) for j in range(m)]
        mask = np.ones_like(inside[0], dtype=bool)
        for j in A:
            mask &= ~inside[j]
        for j in Ac:
            mask &= inside[j]
        return mask

    predicate.A = tuple(A)
    predicate.stars = stars
    return predicate


def nonempty_subsets(m: int):
    for r in range(1, m + 1):
        yield from itertools.combinations(range(m), r)


@dataclass(frozen=True)
class Grid:
    """Uniform cell grid of spacing ``h`` covering ``box``."""

    box: tuple[tuple[float, float], ...]
    h: float

    def __post_init__(self):
        object.__setattr__(self, "box", _as_box(self.box))
        object.__setattr__(self, "h", float(self.h))
        if not self.h > 0:
            raise ValueError("cell size must be positive")
        for lo, hi in self.box:
            cells = (hi - lo) / self.h
            if abs(cells - round(cells)) > 1e-6 * max(1.0, cells):
                raise ValueError(f"box side {hi - lo} is not a multiple of h={self.h}")

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(round((hi - lo) / self.h)) for lo, hi in self.box)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.box]))

    def axes(self) -> list[np.ndarray]:
        return [lo + (np.arange(k) + 0.5) * self.h for (lo, _), k in zip(self.box, self.shape)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """Cell midpoints as an (size, n) array in C order."""
        return np.stack([g.ravel() for g in self.mesh()], axis=-1)

    def cell_index(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Integer cell indices of ``points`` and a mask of those inside the box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.array([b[0] for b in self.box])
        idx = np.floor((pts - lo) / self.h).astype(int)
        inside = np.all((idx >= 0) & (idx < np.array(self.shape)), axis=-1)
        return idx, inside

    def cube_mask(self, cube: Cube) -> np.ndarray:
        """Cells lying entirely inside the closed cube."""
        tol = 1e-9 * self.h
        masks = []
        for ax, c in zip(self.axes(), cube.center):
            masks.append(np.abs(ax - c) <= cube.side / 2 - self.h / 2 + tol)
        out = masks[0]
        for mk in masks[1:]:
            out = np.multiply.outer(out, mk)
        return out.astype(bool)

    def scaled(self, t: float, shift=None) -> "Grid":
        shift = np.zeros(self.n) if shift is None else np.asarray(shift, dtype=float)
        return Grid(tuple((t * lo + s, t * hi + s) for (lo, hi), s in zip(self.box, shift)), t * self.h)

    def to_dict(self) -> dict:
        return {"box": [list(b) for b in self.box], "h": self.h}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values at cell midpoints of ``grid``; zero outside the box."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def box(self):
        return self.grid.box

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable) -> "GridFunction":
        """Sample ``fn`` at the cell midpoints; ``fn`` receives one array per axis."""
        return cls(grid, np.broadcast_to(fn(*grid.mesh()), grid.shape))

    @classmethod
    def indicator(cls, grid: Grid, cube: Cube) -> "GridFunction":
        return cls(grid, grid.cube_mask(cube).astype(float))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, other) -> "GridFunction":
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)

    def abs(self) -> "GridFunction":
        return self.with_values(np.abs(self.values))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def integrate(self) -> float:
        return integrate(self)

    def sample(self, points) -> np.ndarray:
        """Piecewise-constant evaluation at arbitrary points (0 outside the box)."""
        idx, inside = self.grid.cell_index(points)
        out = np.zeros(len(idx))
        if inside.any():
            out[inside] = self.values[tuple(idx[inside].T)]
        return out

    def restrict(self, cube: Cube) -> "GridFunction":
        return self.with_values(np.where(self.grid.cube_mask(cube), self.values, 0.0))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "box": [list(b) for b in self.box],
            "h": self.h,
            "values": self.values.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridFunction":
        grid = Grid(tuple(tuple(b) for b in d["box"]), d["h"])
        if grid.n != d.get("n", grid.n):
            raise ValueError("dimension mismatch in serialized grid function")
        return cls(grid, np.asarray(d["values"], dtype=float).reshape(grid.shape))


def _check_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.grid != g.grid:
        raise ValueError("grid functions live on different grids")


def integrate(f: GridFunction) -> float:
    """Midpoint-rule integral h^n * sum(values)."""
    if _BIT_REPRODUCIBLE:
        return math.fsum(f.values.ravel()) * f.grid.cell_volume
    return float(np.sum(f.values)) * f.grid.cell_volume


def random_piecewise(grid: Grid, pieces: int | Sequence[int], rng: np.random.Generator,
                     support: Cube | None = None) -> GridFunction:
    """Seeded test function: constant on a coarse block partition, values uniform in [-1, 1].

    The blocks are unions of cells, so the same function is represented exactly
    on any refinement of the grid that keeps the box fixed.
    """
    shape = grid.shape
    pieces = (pieces,) * grid.n if np.isscalar(pieces) else tuple(pieces)
    for k, p in zip(shape, pieces):
        if k % p:
            raise ValueError(f"{k} cells do not split into {p} equal pieces")
    coarse = rng.uniform(-1.0, 1.0, size=pieces)
    vals = coarse
    for ax, (k, p) in enumerate(zip(shape, pieces)):
        vals = np.repeat(vals, k // p, axis=ax)
    f = GridFunction(grid, vals)
    return f.restrict(support) if support is not None else f
