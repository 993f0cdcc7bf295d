"""The kernel K_alpha and finite-difference checks of its derivative bounds."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from ..report import InequalityReport

# second-order central stencils for derivatives of order 0..4
_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


@dataclass(frozen=True)
class KernelParams:
    m: int
    n: int
    alpha: float

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if not 0 < self.alpha < self.m * self.n:
            raise ValueError(f"alpha={self.alpha} outside (0, mn) = (0, {self.m * self.n})")

    @property
    def N(self) -> int:
        return self.m * self.n

    def require_theorem_range(self) -> None:
        if not self.alpha < self.n:
            raise ValueError(f"alpha={self.alpha} outside (0, n) = (0, {self.n})")


def _norm(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(u * u, axis=-1))


def kernel(yvec, params: KernelParams) -> float:
    """|(y_1, ..., y_m)|^(alpha - mn) with the Euclidean norm on R^(mn)."""
    u = np.asarray(yvec, dtype=float).reshape(-1)
    if u.size != params.N:
        raise ValueError(f"expected {params.N} coordinates, got {u.size}")
    r = float(_norm(u))
    if r == 0.0:
        raise ValueError("kernel singularity")
    return r ** (params.alpha - params.N)


def _kernel_xy(x: np.ndarray, ys: np.ndarray, params: KernelParams) -> np.ndarray:
    u = (x[None, :] - ys).reshape(-1)
    return _norm(u) ** (params.alpha - params.N)


def default_rel_step(order: int) -> float:
    return max(1e-4, np.finfo(float).eps ** (1.0 / (order + 2)))


def fd_derivative(x, yvec, beta: Sequence[int], params: KernelParams, step: float) -> float:
    """Central-difference d^beta/dy K(x, y_1..y_m); ``beta`` indexes the flattened y."""
    x = np.asarray(x, float).reshape(params.n)
    y0 = np.asarray(yvec, float).reshape(params.m, params.n)
    beta = [int(b) for b in beta]
    active = [(c, b) for c, b in enumerate(beta) if b]
    total = 0.0
    if not active:
        return float(_kernel_xy(x, y0, params))
    stencils = [list(_STENCILS[b].items()) for _, b in active]
    for combo in product(*stencils):
        shift = np.zeros(params.N)
        weight = 1.0
        for (c, _), (off, w) in zip(active, combo):
            shift[c] = off * step
            weight *= w
        total += weight * float(_kernel_xy(x, y0 + shift.reshape(params.m, params.n), params))
    return total / step ** sum(beta)


def kernel_derivative_check(params: KernelParams, beta: Sequence[int], samples,
                            rel_step: float | None = None) -> InequalityReport:
    """max over samples of |d^beta K| / |(x-y_1, ..., x-y_m)|^(alpha - mn - |beta|).

    ``samples`` is a sequence of (x, yvec) pairs.  The difference step is
    ``rel_step`` times the distance to the singularity; samples closer than ten
    steps to it are skipped and counted.
    """
    beta = tuple(int(b) for b in beta)
    if len(beta) != params.N:
        raise ValueError(f"multi-index must have {params.N} entries")
    order = sum(beta)
    if order > 4 or any(b > 4 for b in beta):
        raise ValueError("|beta| <= 4 only")
    rel = default_rel_step(order) if rel_step is None else rel_step
    best = (0.0, 0.0, 0.0)
    skipped = 0
    for x, yvec in samples:
        x = np.asarray(x, float).reshape(params.n)
        y = np.asarray(yvec, float).reshape(params.m, params.n)
        dist = float(_norm((x[None, :] - y).reshape(-1)))
        step = rel * dist
        if dist == 0.0 or dist < 10 * step:
            skipped += 1
            continue
        lhs = abs(fd_derivative(x, y, beta, params, step))
        rhs = dist ** (params.alpha - params.N - order)
        if lhs / rhs >= best[2]:
            best = (lhs, rhs, lhs / rhs)
    rep = InequalityReport.build("kernel_derivative", best[0], best[1],
                                 {"beta": list(beta), "m": params.m, "n": params.n,
                                  "alpha": params.alpha, "skipped": skipped, "rel_step": rel})
    if best[1] > 0:
        rep.ratio = best[2]
    return rep
