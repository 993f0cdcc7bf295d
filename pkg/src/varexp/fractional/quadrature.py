"""Cell integrals of homogeneous kernels near their singularity.

Both kernels used here, |u|^(alpha-N) and (sum_i |u_i|)^(alpha-N) on
u = (u_1, ..., u_m) in R^(mn), are homogeneous of degree alpha - N and even in
every coordinate.  A box touching the origin is split into orthant pieces with
the origin as a corner; the integral over a corner cube [0, s]^N is s^alpha
times the unit-cube value J, and J itself follows from self-similarity:
J = (integral over [0,1]^N minus [0,1/2]^N) / (1 - 2^-alpha).  Everything left
over is at positive distance from the origin and goes to adaptive
Gauss-Legendre.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

GL_ORDER = 8
SEPARATION = 2.0


def kernel_values(u: np.ndarray, alpha: float, m: int, n: int, kind: str) -> np.ndarray:
    """Kernel at rows of ``u`` (shape (..., m*n))."""
    N = m * n
    if kind == "euclid":
        r = np.sqrt(np.sum(u * u, axis=-1))
    elif kind == "sum":
        blocks = u.reshape(u.shape[:-1] + (m, n))
        r = np.sum(np.sqrt(np.sum(blocks * blocks, axis=-1)), axis=-1)
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    with np.errstate(divide="ignore"):
        return r ** (alpha - N)


@lru_cache(maxsize=None)
def _gl_rule(N: int, q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    pts = np.array(list(itertools.product(x, repeat=N)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=N))), axis=1)
    return pts, wts


def _dist_to_origin(lo: np.ndarray, hi: np.ndarray) -> float:
    d = np.where(lo > 0, lo, np.where(hi < 0, -hi, 0.0))
    return float(np.sqrt(np.sum(d * d)))


def smooth_box_integral(fn, lo, hi, q: int = GL_ORDER, sep: float = SEPARATION) -> float:
    """Adaptive tensor Gauss-Legendre for a box at positive distance from the origin."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    N = lo.size
    pts, wts = _gl_rule(N, q)
    total = 0.0
    stack = [(lo, hi)]
    batch_lo, batch_hi = [], []
    while stack:
        a, b = stack.pop()
        if np.any(b <= a):
            continue
        dist = _dist_to_origin(a, b)
        diam = float(np.sqrt(np.sum((b - a) ** 2)))
        if dist <= 0:
            raise ValueError("box touches the singularity")
        if dist >= sep * diam:
            batch_lo.append(a)
            batch_hi.append(b)
            continue
        mid = 0.5 * (a + b)
        for corner in itertools.product((0, 1), repeat=N):
            c = np.array(corner, dtype=bool)
            stack.append((np.where(c, mid, a), np.where(c, b, mid)))
    if batch_lo:
        A, B = np.array(batch_lo), np.array(batch_hi)
        half = 0.5 * (B - A)
        x = (A + B)[:, None, :] * 0.5 + half[:, None, :] * pts[None, :, :]
        vals = fn(x)
        total = float(np.sum(vals * wts[None, :] * np.prod(half, axis=1)[:, None]))
    return total


class SingularKernel:
    """Integrals of one homogeneous kernel over boxes in unit-lattice coordinates."""

    def __init__(self, alpha: float, m: int, n: int, kind: str = "euclid"):
        self.alpha, self.m, self.n, self.kind = float(alpha), int(m), int(n), kind
        self.N = self.m * self.n
        if not 0 < self.alpha:
            raise ValueError("homogeneity degree must exceed -N (alpha > 0)")
        self._J = None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return kernel_values(u, self.alpha, self.m, self.n, self.kind)

    @property
    def unit_corner(self) -> float:
        """Integral over [0, 1]^N."""
        if self._J is None:
            rest = 0.0
            for corner in itertools.product((0, 1), repeat=self.N):
                if not any(corner):
                    continue
                c = np.array(corner, dtype=bool)
                rest += smooth_box_integral(self, np.where(c, 0.5, 0.0), np.where(c, 1.0, 0.5))
            self._J = rest / (1.0 - 2.0 ** (-self.alpha))
        return self._J

    def corner_box(self, sides) -> float:
        """Integral over [0, s_1] x ... x [0, s_N] (origin at a corner)."""
        s = np.asarray(sides, float)
        if np.any(s <= 0):
            return 0.0
        smin = float(s.min())
        total = smin ** self.alpha * self.unit_corner
        for choice in itertools.product((0, 1), repeat=self.N):
            if not any(choice):
                continue
            c = np.array(choice, dtype=bool)
            lo = np.where(c, smin, 0.0)
            hi = np.where(c, s, smin)
            if np.any(hi <= lo):
                continue
            total += smooth_box_integral(self, lo, hi)
        return total

    def box(self, lo, hi) -> float:
        """Integral over an arbitrary box [lo, hi]."""
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        if _dist_to_origin(lo, hi) > 0:
            return smooth_box_integral(self, lo, hi)
        # origin in the closed box: split into orthant pieces, reflect each to [0, s]
        pieces = []
        for a, b in zip(lo, hi):
            parts = []
            if a < 0:
                parts.append(-a)
            if b > 0:
                parts.append(b)
            pieces.append(parts)
        return float(sum(self.corner_box(s) for s in itertools.product(*pieces)))


@lru_cache(maxsize=256)
def near_table(alpha: float, m: int, n: int, kind: str, frac: tuple[float, ...], reach: int):
    """Unit-lattice cell integrals around the singularity.

    Entry k (an integer vector in [-reach-1, reach+1]^N) is the integral of the
    kernel over the unit cell centered at k + frac, for cells whose center lies
    within Chebyshev distance reach + 1/2 of the origin; other entries are NaN.
    """
    sk = SingularKernel(alpha, m, n, kind)
    N = m * n
    span = 2 * reach + 3
    table = np.full((span,) * N, np.nan)
    fr = np.asarray(frac, float)
    for k in itertools.product(range(-reach - 1, reach + 2), repeat=N):
        t = np.asarray(k, float) + fr
        if np.max(np.abs(t)) > reach + 0.5 + 1e-12:
            continue
        table[tuple(np.asarray(k) + reach + 1)] = sk.box(t - 0.5, t + 0.5)
    table.setflags(write=False)
    return table
