"""Modulars, Luxemburg norms, Hoelder/duality checks and a dyadic BMO seminorm."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry
from .exponent import ExponentField, conjugate, holder_scale, r_p
from .geometry import Cube, GridFunction
from .report import InequalityReport


@dataclass(frozen=True)
class ModularValue:
    value: float
    h: float


def _sum(x: np.ndarray) -> float:
    if geometry.bit_reproducible():
        return math.fsum(x.ravel())
    return float(np.sum(x))


def modular(f: GridFunction, p: ExponentField) -> ModularValue:
    """Midpoint value of the integral of |f(x)|^p(x)."""
    a = np.abs(f.values)
    vals = np.power(a, p.on(f.grid), where=a > 0, out=np.zeros_like(a))
    return ModularValue(_sum(vals) * f.grid.cell_volume, f.h)


def luxemburg_norm(f: GridFunction, p: ExponentField, rtol: float = 1e-10) -> float:
    """inf{lam > 0 : modular(f/lam) <= 1}, by bisection on lam.

    lam -> modular(f/lam) is nonincreasing, so the returned upper end of the
    final bracket satisfies modular(f/lam) <= 1.
    """
    a = np.abs(f.values)
    nz = a > 0
    if not nz.any():
        return 0.0
    log_a = np.log(a[nz])
    pe = p.on(f.grid)[nz]
    dv = f.grid.cell_volume

    def rho(lam: float) -> float:
        return _sum(np.exp(pe * (log_a - math.log(lam)))) * dv

    sup = float(a.max())
    vol = f.grid.volume
    p_lo, p_hi = float(pe.min()), float(pe.max())
    lo = sup * min(1.0, vol ** (1 / p_hi), vol ** (1 / p_lo)) / 2
    hi = sup * max(1.0, vol ** (1 / p_lo)) * 2
    while rho(lo) <= 1.0:
        lo /= 2
    while rho(hi) > 1.0:
        hi *= 2
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def holder_pair_check(f: GridFunction, g: GridFunction, p: ExponentField) -> InequalityReport:
    """int|fg| against r_p ||f||_p ||g||_p' (an exact inequality for p in P)."""
    pc = conjugate(p)
    lhs = geometry.integrate((f * g).abs())
    nf, ng = luxemburg_norm(f, p), luxemburg_norm(g, pc)
    rp = r_p(p)
    return InequalityReport.build("holder", lhs, rp * nf * ng,
                                  {"r_p": rp, "norm_f": nf, "norm_g": ng})


def duality_witness(f: GridFunction, p: ExponentField) -> GridFunction:
    """sign(f)|f/||f|||^(p-1), which has unit p'-norm and pairs with f to ||f||."""
    nf = luxemburg_norm(f, p)
    if nf == 0:
        return GridFunction.zeros(f.grid)
    F = f.values / nf
    w = np.sign(F) * np.abs(F) ** (p.on(f.grid) - 1.0)
    g = f.with_values(w)
    ng = luxemburg_norm(g, conjugate(p))
    return g * (1.0 / ng)


def duality_lower_bound(f: GridFunction, p: ExponentField, trials: int, seed: int = 0,
                        include_witness: bool = True) -> InequalityReport:
    """max |int f g| over random g normalized to ||g||_p' = 1 (plus the witness).

    The report carries lhs = that maximum and rhs = ||f||; the contract is
    ||f|| <= lhs <= r_p ||f|| once the witness is included.
    """
    pc = conjugate(p)
    nf = luxemburg_norm(f, p)
    rng = np.random.default_rng(seed)
    best_random = 0.0
    for _ in range(trials):
        g = f.with_values(rng.uniform(-1.0, 1.0, f.grid.shape))
        ng = luxemburg_norm(g, pc)
        if ng > 0:
            best_random = max(best_random, abs(geometry.integrate(f * g)) / ng)
    witness = 0.0
    if include_witness and nf > 0:
        witness = abs(geometry.integrate(f * duality_witness(f, p)))
    best = max(best_random, witness)
    rp = r_p(p)
    return InequalityReport.build("duality", best, nf,
                                  {"r_p": rp, "random_max": best_random, "witness": witness,
                                   "upper": rp * nf, "trials": trials}, seed)


def generalized_holder_check(fs: Sequence[GridFunction], ps: Sequence[ExponentField]) -> InequalityReport:
    """||prod f_i||_p / prod ||f_i||_{p_i} with 1/p = sum 1/p_i."""
    if len(fs) != len(ps) or not fs:
        raise ValueError("need one exponent per function")
    p = holder_scale(ps, 0.0, fs[0].n)
    prod = fs[0]
    for f in fs[1:]:
        prod = prod * f
    lhs = luxemburg_norm(prod, p)
    norms = [luxemburg_norm(f, q) for f, q in zip(fs, ps)]
    return InequalityReport.build("generalized_holder", lhs, float(np.prod(norms)),
                                  {"factor_norms": norms, "m": len(fs)})


def _block_bounds(k: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, k, parts + 1).round().astype(int)
    return list(zip(edges[:-1], edges[1:]))


def dyadic_family(grid: geometry.Grid, min_cells: int = 4) -> list[tuple[slice, ...]]:
    """Index blocks of the dyadic subdivisions of the box, down to ``min_cells`` per side."""
    family = []
    level = 0
    while True:
        parts = 2 ** level
        if any(k // parts < min_cells for k in grid.shape):
            break
        per_axis = [_block_bounds(k, parts) for k in grid.shape]
        for combo in np.ndindex(*(parts,) * grid.n):
            family.append(tuple(slice(*per_axis[ax][i]) for ax, i in enumerate(combo)))
        level += 1
    if not family:
        family.append(tuple(slice(0, k) for k in grid.shape))
    return family


def bmo_norm(b: GridFunction, family: Sequence[Cube] | None = None, min_cells: int = 4) -> float:
    """max over the family of the mean oscillation (1/|Q|) int_Q |b - b_Q|.

    The default family is every dyadic subcube of the box down to side
    ``min_cells * h``.
    """
    vals = b.values
    if family is None:
        blocks = [vals[s] for s in dyadic_family(b.grid, min_cells)]
    else:
        if len(family) == 0:
            raise ValueError("empty cube family")
        blocks = [vals[b.grid.cube_mask(Q)] for Q in family]
        blocks = [blk for blk in blocks if blk.size]
        if not blocks:
            raise ValueError("no cube in the family resolves a grid cell")
    best = 0.0
    for blk in blocks:
        if blk.max() == blk.min():
            continue  # exact zero for constant blocks; np.mean can round
        best = max(best, float(np.mean(np.abs(blk - np.mean(blk)))))
    return best
