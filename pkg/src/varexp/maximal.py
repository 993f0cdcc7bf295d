"""Fractional, vector-valued and grand maximal operators on uniform grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import integrate as sp_integrate
from scipy import ndimage
from scipy.special import gamma

from .exponent import ExponentField, holder_scale
from .geometry import Cube, Grid, GridFunction
from .norms import luxemburg_norm
from .report import InequalityReport


def dyadic_scales(grid: Grid) -> tuple[float, ...]:
    """Side lengths h, 2h, 4h, ... up to the largest box side."""
    top = max(grid.shape)
    out, k = [], 1
    while True:
        out.append(k * grid.h)
        if k >= top:
            break
        k *= 2
    return tuple(out)


@dataclass(frozen=True)
class MaximalConfig:
    alpha: float = 0.0
    scales: tuple[float, ...] | None = None
    centered: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.scales is not None:
            s = tuple(sorted(float(x) for x in self.scales))
            if not s or s[0] <= 0:
                raise ValueError("scale set must be nonempty and positive")
            object.__setattr__(self, "scales", s)

    def cell_counts(self, grid: Grid) -> list[int]:
        scales = self.scales if self.scales is not None else dyadic_scales(grid)
        ks = sorted({max(1, int(round(s / grid.h))) for s in scales})
        if self.centered:
            ks = sorted({k if k % 2 else k + 1 for k in ks})
        return ks


def _window_sums(a: np.ndarray, k: int) -> np.ndarray:
    """Sums over all k-cell windows meeting the array (zero padding), per axis."""
    w = a
    for ax in range(a.ndim):
        pad = [(0, 0)] * a.ndim
        pad[ax] = (k - 1, k - 1)
        w = sliding_window_view(np.pad(w, pad), k, axis=ax).sum(axis=-1)
    return w


def _max_containing(w: np.ndarray, k: int) -> np.ndarray:
    """For each cell, the max over the k-cell windows that contain it."""
    for ax in range(w.ndim):
        w = sliding_window_view(w, k, axis=ax).max(axis=-1)
    return w


def frac_maximal(f: GridFunction, cfg: MaximalConfig = MaximalConfig()) -> GridFunction:
    """M_alpha f at each cell: max over windows Q containing the cell of |Q|^(alpha/n-1) int_Q |f|.

    Windows are unions of whole cells with side lengths from the configured
    scale set; alpha = 0 is the Hardy-Littlewood maximal function.
    """
    n = f.n
    if cfg.alpha >= n:
        raise ValueError("alpha must lie in [0, n)")
    a = np.abs(f.values)
    dv = f.grid.cell_volume
    out = np.zeros_like(a)
    for k in cfg.cell_counts(f.grid):
        vol = (k * f.h) ** n
        weight = vol ** (cfg.alpha / n - 1.0) * dv
        if k == 1:
            best = a
        else:
            w = _window_sums(a, k)
            if cfg.centered:
                r = k // 2
                best = w[tuple(slice(r, r + s) for s in a.shape)]
            else:
                best = _max_containing(w, k)
        np.maximum(out, weight * best, out=out)
    return f.with_values(out)


def claim_check(y, r: float, alpha: float, xs=None, cells_per_side: int = 16,
                extent: float = 8.0) -> InequalityReport:
    """max over x of r^n/(r+|x-y|)^(n-alpha) divided by M_alpha chi_{Q(y,r)}(x).

    The computation runs on a grid of spacing r/cells_per_side over the cube of
    half-width extent*r about y, so it is exactly scale-covariant in r.  ``xs``
    (optional) selects evaluation points; the cells containing them are used.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    n = y.size
    if not r > 0:
        raise ValueError("r must be positive")
    if not 0 <= alpha < n:
        raise ValueError("alpha must lie in [0, n)")
    if cells_per_side % 2:
        raise ValueError("cells_per_side must be even so Q(y, r) is cell aligned")
    h = r / cells_per_side
    half = math.ceil(extent * cells_per_side) * h
    grid = Grid(tuple((c - half, c + half) for c in y), h)
    chi = GridFunction.indicator(grid, Cube(tuple(y), r))
    M = frac_maximal(chi, MaximalConfig(alpha)).values.ravel()
    pts = grid.points()
    if xs is not None:
        idx, inside = grid.cell_index(np.asarray(xs, dtype=float).reshape(-1, n))
        if not inside.all():
            raise ValueError("evaluation points outside the claim grid")
        flat = np.ravel_multi_index(tuple(idx.T), grid.shape)
        pts, M = pts[flat], M[flat]
    dist = np.linalg.norm(pts - y, axis=-1)
    lhs = r ** n / (r + dist) ** (n - alpha)
    ratios = lhs / M
    i = int(np.argmax(ratios))
    rep = InequalityReport.build("claim", float(lhs[i]), float(M[i]),
                                 {"y": y.tolist(), "r": r, "alpha": alpha, "points": int(len(pts))})
    rep.ratio = float(ratios[i])
    return rep


def _lq_combine(values: Sequence[np.ndarray], lq: float) -> np.ndarray:
    return np.sum([np.abs(v) ** lq for v in values], axis=0) ** (1.0 / lq)


def vector_fs_check(fs: Sequence[GridFunction], p: ExponentField, alpha: float, lq: float,
                    scales: Sequence[float] | None = None) -> InequalityReport:
    """|| ||{M_alpha f_i}||_lq ||_q against || ||{f_i}||_lq ||_p, 1/q = 1/p - alpha/n."""
    if lq <= 1:
        raise ValueError("the sequence exponent must exceed 1")
    if not fs:
        raise ValueError("need at least one function")
    n = fs[0].n
    q = holder_scale([p], alpha, n)
    cfg = MaximalConfig(alpha, tuple(scales) if scales is not None else None)
    mf = [frac_maximal(f, cfg).values for f in fs]
    lhs = luxemburg_norm(fs[0].with_values(_lq_combine(mf, lq)), q)
    rhs = luxemburg_norm(fs[0].with_values(_lq_combine([f.values for f in fs], lq)), p)
    return InequalityReport.build("fefferman_stein", lhs, rhs,
                                  {"alpha": alpha, "lq": lq, "family": len(fs), "h": fs[0].h})


# -- grand maximal operator ----------------------------------------------------

def _unit_ball_mass(n: int, k: int) -> float:
    """int_{R^n} (1-|x|^2)_+^k dx."""
    return math.pi ** (n / 2) * gamma(k + 1) / gamma(k + 1 + n / 2)


@dataclass(frozen=True)
class Bump:
    """Radial spline psi(x) = c (1-|x|^2)_+^k normalized to unit integral."""

    n: int
    k: int

    @property
    def coef(self) -> float:
        return 1.0 / _unit_ball_mass(self.n, self.k)

    def __call__(self, *coords) -> np.ndarray:
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        return self.coef * np.clip(1.0 - r2, 0.0, None) ** self.k

    def reference(self, cells: int = 400) -> GridFunction:
        grid = Grid(((-1.5, 1.5),) * self.n, 3.0 / cells)
        return GridFunction.from_callable(grid, self)


def _radial_integral(b: Bump) -> float:
    sphere = 2 * math.pi ** (b.n / 2) / gamma(b.n / 2)
    val, _ = sp_integrate.quad(lambda r: b.coef * (1 - r * r) ** b.k * r ** (b.n - 1), 0.0, 1.0,
                               epsabs=1e-14, epsrel=1e-13)
    return sphere * val


def _fd_derivative(vals: np.ndarray, beta: tuple[int, ...], step: float) -> np.ndarray:
    d = vals
    for ax, order in enumerate(beta):
        for _ in range(order):
            d = np.gradient(d, step, axis=ax, edge_order=2)
    return d


def _multi_indices(n: int, N: int):
    for beta in np.ndindex(*(N + 1,) * n):
        if sum(beta) <= N:
            yield tuple(int(b) for b in beta)


def bump_seminorm(b: Bump, N: int, nodes: int | None = None) -> float:
    """sum over |beta| <= N of sup (1+|x|)^N |d^beta psi|, by finite differences."""
    nodes = nodes or (4001 if b.n == 1 else 241)
    ax = np.linspace(-1.2, 1.2, nodes)
    step = ax[1] - ax[0]
    mesh = np.meshgrid(*([ax] * b.n), indexing="ij")
    vals = b(*mesh)
    weight = (1.0 + np.sqrt(sum(g ** 2 for g in mesh))) ** N
    return float(sum(np.max(weight * np.abs(_fd_derivative(vals, beta, step)))
                     for beta in _multi_indices(b.n, N)))


@dataclass
class BumpDictionary:
    """Finite family of normalized bumps and dilation scales standing in for F_N.

    ``certify`` checks each unit integral (to 1e-8) and records the weighted
    derivative seminorm of order N; ``grand_maximal`` refuses uncertified
    dictionaries.
    """

    bumps: list[Bump]
    scales: tuple[float, ...]
    N: int
    certificate: dict | None = field(default=None)

    @classmethod
    def default(cls, n: int, scales: Sequence[float], d: int = 0) -> "BumpDictionary":
        N = n + d + 2
        bumps = [Bump(n, N + 1 + i) for i in range(3)]
        return cls(bumps, tuple(sorted(float(t) for t in scales)), N).certify()

    @classmethod
    def for_grid(cls, grid: Grid, d: int = 0, min_cells: int = 2) -> "BumpDictionary":
        scales, t = [], min_cells * grid.h
        while t <= max(hi - lo for lo, hi in grid.box) / 2 + 1e-12:
            scales.append(t)
            t *= 2
        return cls.default(grid.n, scales, d)

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.get("ok", False)

    def certify(self) -> "BumpDictionary":
        integrals = [_radial_integral(b) for b in self.bumps]
        seminorms = [bump_seminorm(b, self.N) for b in self.bumps]
        ok = all(abs(v - 1.0) <= 1e-8 for v in integrals) and all(math.isfinite(s) for s in seminorms)
        self.certificate = {"ok": bool(ok), "integrals": integrals, "seminorms": seminorms, "N": self.N}
        return self

    def to_dict(self) -> dict:
        return {
            "n": self.bumps[0].n if self.bumps else None,
            "bumps": [{"k": b.k} for b in self.bumps],
            "scales": list(self.scales),
            "N": self.N,
            "certificate": self.certificate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BumpDictionary":
        bumps = [Bump(int(d["n"]), int(b["k"])) for b in d["bumps"]]
        return cls(bumps, tuple(d["scales"]), int(d["N"]), d.get("certificate"))


def _bump_kernel(b: Bump, t: float, grid: Grid) -> np.ndarray:
    reach = int(math.floor(t / grid.h))
    offs = np.arange(-reach, reach + 1) * grid.h / t
    mesh = np.meshgrid(*([offs] * grid.n), indexing="ij")
    return b(*mesh) * (grid.h / t) ** grid.n


def grand_maximal(f: GridFunction, dictionary: BumpDictionary) -> GridFunction:
    """max over bumps psi and scales t of |psi_t * f|, by direct grid convolution."""
    if not dictionary.certified:
        raise ValueError("bump dictionary is not certified")
    out = np.zeros(f.grid.shape)
    for b in dictionary.bumps:
        for t in dictionary.scales:
            kern = _bump_kernel(b, t, f.grid)
            conv = ndimage.convolve(f.values, kern, mode="constant", cval=0.0)
            np.maximum(out, np.abs(conv), out=out)
    return f.with_values(out)


def hardy_norm(f: GridFunction, p: ExponentField, dictionary: BumpDictionary) -> float:
    """||grand_maximal(f)||_p: a lower-bound proxy for the H^p(.) norm."""
    return luxemburg_norm(grand_maximal(f, dictionary), p)
