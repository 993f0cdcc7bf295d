"""The multilinear fractional integral I_alpha and its commutators on grids.

Each input is reduced to the bounding block of its nonzero cells.  A cell
product at lattice offset t = (x - z)/h (in units of h, one entry per
coordinate of every factor) receives the weight h^alpha * K(t).  Near the
singularity (Chebyshev |t| <= reach + 1/2) that midpoint value is replaced by
the exact integral of K over the cell, taken from ``near_table``; with
``singular="skip"`` the cell containing the singularity is dropped instead.

Evaluation points are grouped by their fractional lattice offset.  Groups that
fill a block of lattice points are computed by convolution; scattered points
fall back to a direct sum over the product of supports.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import signal

from .. import geometry
from ..geometry import Grid, GridFunction
from .kernel import KernelParams
from .quadrature import kernel_values, near_table

FRAC_BITS = 30
SINGULAR_POLICIES = ("corrected", "skip")


def default_reach(N: int) -> int:
    return {1: 3, 2: 3, 3: 2}.get(N, 1)


class _Factor:
    """Bounding block of the nonzero cells of one input."""

    def __init__(self, f: GridFunction):
        nz = np.nonzero(f.values)
        self.h = f.h
        self.n = f.n
        if nz[0].size == 0:
            self.empty = True
            return
        self.empty = False
        start = np.array([a.min() for a in nz])
        stop = np.array([a.max() for a in nz]) + 1
        self.values = f.values[tuple(slice(a, b) for a, b in zip(start, stop))]
        lo = np.array([b[0] for b in f.box])
        self.origin = lo + (start + 0.5) * f.h  # midpoint of the first support cell
        self.shape = self.values.shape

    def centers(self) -> np.ndarray:
        axes = [o + np.arange(k) * self.h for o, k in zip(self.origin, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def lattice(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Integer part and snapped fractional part of (x - origin)/h."""
        s = (points - self.origin) / self.h
        a = np.round(s)
        frac = np.round((s - a) * 2.0 ** FRAC_BITS) / 2.0 ** FRAC_BITS
        return a.astype(np.int64), frac


def _weights(t_int: np.ndarray, frac: np.ndarray, params: KernelParams, kind: str,
             singular: str, reach: int) -> np.ndarray:
    """h-free weights K(t) with the near-cell correction, t = t_int + frac (last axis N)."""
    t = t_int + frac
    w = kernel_values(t, params.alpha, params.m, params.n, kind)
    cheb = np.max(np.abs(t), axis=-1)
    if singular == "skip":
        w = np.where(cheb < 0.5, 0.0, w)
        return w
    near = cheb <= reach + 0.5 + 1e-12
    if near.any():
        table = near_table(params.alpha, params.m, params.n, kind,
                           tuple(float(v) for v in frac), reach)
        idx = t_int[near] + reach + 1
        w = np.array(w, dtype=float, copy=True)
        w[near] = table[tuple(idx.T)]
    return w


def _points_of(xs) -> np.ndarray:
    if isinstance(xs, Grid):
        return xs.points()
    pts = np.asarray(xs, dtype=float)
    return pts.reshape(-1, 1) if pts.ndim <= 1 else pts


def _direct(factors, gates, pts, params, kind, singular, reach) -> np.ndarray:
    """Sum over the full product of supports, one evaluation point at a time."""
    m, n = params.m, params.n
    out = np.zeros(len(pts))
    idx_sets = [np.array(list(np.ndindex(*F.shape))) for F in factors]
    vals = [F.values.ravel() for F in factors]
    for p, x in enumerate(pts):
        ints, fracs = zip(*(F.lattice(x[None, :]) for F in factors))
        frac = np.concatenate([f[0] for f in fracs])
        mesh = np.meshgrid(*[np.arange(len(v)) for v in vals], indexing="ij")
        flat = [g.ravel() for g in mesh]
        t_int = np.concatenate([ints[i][0] - idx_sets[i][flat[i]] for i in range(m)], axis=-1)
        w = _weights(t_int, frac, params, kind, singular, reach)
        prod = np.ones_like(w)
        for i in range(m):
            prod = prod * vals[i][flat[i]]
        if gates is not None:
            j, bx, bz = gates
            prod = prod * (bx[p] - bz[flat[j]])
        out[p] = np.sum(w * prod)
    return out


def _lattice_block(factors, gates, a_lo, E, frac, params, kind, singular, reach, cvals=None):
    """Values on the block of lattice points a_lo + [0, E) (positions of factor 0)."""
    m, n = params.m, params.n
    E = tuple(int(e) for e in E)
    # offset of factor i's lattice against factor 0's, in whole cells
    shifts = [np.zeros(n, dtype=np.int64)] + [
        np.round((factors[0].origin - F.origin) / F.h).astype(np.int64) for F in factors[1:]]
    ranges = []
    for F, c in zip(factors, shifts):
        kmin = a_lo + c - (np.array(F.shape) - 1)
        K = np.array(E) + np.array(F.shape) - 1
        ranges.append((kmin, K))
    axes = []
    for kmin, K in ranges:
        axes += [kmin[d] + np.arange(K[d]) for d in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij", sparse=False)
    t_int = np.stack(mesh, axis=-1)
    W = _weights(t_int, frac, params, kind, singular, reach)
    del mesh, t_int

    if m == 1 and gates is None:
        if geometry.bit_reproducible():
            return signal.convolve(W, factors[0].values, mode="valid", method="direct")
        return signal.fftconvolve(W, factors[0].values, mode="valid")

    j = 0 if gates is None else gates[0]
    Fj = factors[j]
    # contract every factor other than j by convolution along its axes
    D = W
    for i in range(m - 1, -1, -1):
        if i == j:
            continue
        ax = tuple(range(i * n, (i + 1) * n))
        kern = factors[i].values.reshape((1,) * (i * n) + factors[i].shape + (1,) * ((m - 1 - i) * n))
        method = "direct" if geometry.bit_reproducible() else "auto"
        D = signal.convolve(D, kern, mode="valid", method=method) if method == "direct" else \
            signal.fftconvolve(D, kern, mode="valid", axes=ax)
    # D is indexed by (k_j, a' for each contracted factor); the contracted axes all carry a'
    Ksh = D.shape[j * n:(j + 1) * n]
    other = [i for i in range(m) if i != j]
    Sj = np.array(Fj.shape)
    a_idx = np.stack(np.meshgrid(*[np.arange(e) for e in E], indexing="ij"), -1).reshape(-1, n)
    i_idx = np.array(list(np.ndindex(*Fj.shape))).reshape(-1, n)
    k_idx = a_idx[:, None, :] + (Sj - 1) - i_idx[None, :, :]
    index = []
    for i in range(m):
        src = k_idx if i == j else np.broadcast_to(a_idx[:, None, :], k_idx.shape)
        index += [src[..., d] for d in range(n)]
    G = D[tuple(index)]
    fv = Fj.values.ravel()[None, :]
    if gates is not None:
        _, bx, bz = gates
        G = G * (bx.reshape(-1)[:, None] - bz[None, :])
    del Ksh, other
    return np.sum(G * fv, axis=1).reshape(E)


def _evaluate(fs, params, xs, kind, singular, reach, gate=None, method="auto"):
    if singular not in SINGULAR_POLICIES:
        raise ValueError(f"singular policy must be one of {SINGULAR_POLICIES}")
    if len(fs) != params.m:
        raise ValueError(f"expected {params.m} functions, got {len(fs)}")
    h = fs[0].h
    for f in fs:
        if f.n != params.n:
            raise ValueError("function dimension does not match params.n")
        if abs(f.h - h) > 1e-12 * h:
            raise ValueError("all inputs must share the cell size h")
    reach = default_reach(params.N) if reach is None else int(reach)
    pts = _points_of(xs)
    out = np.zeros(len(pts))
    factors = [_Factor(f) for f in fs]
    if any(F.empty for F in factors) or len(pts) == 0:
        return out
    n = params.n
    gates = None
    if gate is not None:
        b, j = gate
        bz_all = b.sample(factors[j].centers())
        bx_all = b.sample(pts)

    ints, fracs = zip(*(F.lattice(pts) for F in factors))
    frac_all = np.concatenate(fracs, axis=1)
    keys, inverse = np.unique(frac_all, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for g, frac in enumerate(keys):
        sel = np.nonzero(inverse == g)[0]
        a = ints[0][sel]
        a_lo, a_hi = a.min(axis=0), a.max(axis=0)
        E = a_hi - a_lo + 1
        block = int(np.prod(E))
        use_lattice = method == "lattice" or (
            method == "auto" and params.m <= 2 and block <= 8 * len(sel) and len(sel) > 4)
        if gate is not None:
            gates_sel = (gate[1], bx_all[sel], bz_all)
        else:
            gates_sel = None
        if use_lattice:
            if gate is not None:
                # b at every lattice point of the block, scattered from the selected points
                bx_block = np.zeros(tuple(E))
                bx_block[tuple((a - a_lo).T)] = bx_all[sel]
                gates_blk = (gate[1], bx_block, bz_all)
            else:
                gates_blk = None
            vals = _lattice_block(factors, gates_blk, a_lo, E, frac, params, kind, singular, reach)
            out[sel] = vals[tuple((a - a_lo).T)]
        else:
            out[sel] = _direct(factors, gates_sel, pts[sel], params, kind, singular, reach)
    out *= h ** params.alpha
    return out


def _wrap(xs, vals):
    if isinstance(xs, Grid):
        return GridFunction(xs, vals.reshape(xs.shape))
    return vals


def apply_Ialpha(fs: Sequence[GridFunction], params: KernelParams, xs, kernel: str = "euclid",
                 singular: str = "corrected", reach: int | None = None, method: str = "auto"):
    """I_alpha(f_1, ..., f_m) at the points ``xs`` (a Grid or an array of points).

    ``kernel="sum"`` swaps in (sum_i |x - y_i|)^(alpha - mn), the form used by
    the commutator.  Returns a GridFunction when ``xs`` is a Grid.
    """
    return _wrap(xs, _evaluate(list(fs), params, xs, kernel, singular, reach, method=method))


def apply_commutator(b: GridFunction, fs: Sequence[GridFunction], j: int, params: KernelParams, xs,
                     kernel: str = "sum", singular: str = "corrected", reach: int | None = None,
                     method: str = "auto"):
    """[b, I_alpha]_j: the kernel integral weighted by b(x) - b(y_j).

    ``j`` is 0-based.  b is evaluated piecewise constantly at x and at the
    midpoints of the cells of factor j, so a constant b gives exactly zero.
    """
    if not 0 <= j < params.m:
        raise ValueError(f"commutator index j={j} out of range for m={params.m}")
    return _wrap(xs, _evaluate(list(fs), params, xs, kernel, singular, reach, gate=(b, j), method=method))
