"""Pointwise decay checks for atoms and the end-to-end boundedness ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..atoms import B_WEIGHTED, Atom, AtomicSum, assemble, chi_norm, sequence_norm
from ..exponent import ExponentField, holder_scale
from ..geometry import Grid, GridFunction, default_kappa, region_EA
from ..norms import bmo_norm, luxemburg_norm
from ..report import InequalityReport
from .kernel import KernelParams
from .operators import apply_commutator, apply_Ialpha


@dataclass(frozen=True)
class DecayCheckConfig:
    """Index subset A (0-based), moment degree d, dimension n and the dilation kappa of Q*."""

    A: tuple[int, ...]
    d: int
    n: int = 1
    kappa: float | None = None

    def __post_init__(self):
        A = tuple(sorted(set(int(j) for j in self.A)))
        if not A:
            raise ValueError("A must be nonempty")
        object.__setattr__(self, "A", A)
        if self.d < 0:
            raise ValueError("the decay estimate needs d >= 0")

    @property
    def theta(self) -> float:
        return (self.n + (self.d + 1) / len(self.A)) / self.n

    def s_exponents(self, ps: Sequence[ExponentField], alpha: float) -> list[ExponentField]:
        """s_j with 1/s_j = 1/p_j - (alpha/|A|)/n."""
        return [holder_scale([p], alpha / len(self.A), self.n) for p in ps]


def _violations(x: np.ndarray, atoms: Sequence[Atom], cfg: DecayCheckConfig, kappa: float) -> list[str]:
    pred = region_EA([a.cube for a in atoms], cfg.A, kappa)
    if pred(x[None, :])[0]:
        return []
    out = []
    for j, Q in enumerate(pred.stars):
        inside = bool(Q.contains(x[None, :])[0])
        if j in cfg.A and inside:
            out.append(f"x lies inside Q*_{j} although {j} is in A")
        if j not in cfg.A and not inside:
            out.append(f"x lies outside Q*_{j} although {j} is not in A")
    return out


def decay_rhs(x: np.ndarray, atoms: Sequence[Atom], cfg: DecayCheckConfig, alpha: float,
              chi_norms: Sequence[float] | None = None) -> float:
    """Product over cubes of |Q|^(1+(d+1)/(n|A|)) / (|x-z|+l)^e, e reduced by alpha/|A| on A."""
    n = atoms[0].cube.n
    k = len(cfg.A)
    total = 1.0
    for j, a in enumerate(atoms):
        Q = a.cube
        e = n + (cfg.d + 1) / k - (alpha / k if j in cfg.A else 0.0)
        r = float(np.linalg.norm(x - np.asarray(Q.center))) + Q.side
        factor = Q.volume ** (1 + (cfg.d + 1) / (n * k)) / r ** e
        if chi_norms is not None:
            factor /= chi_norms[j]
        total *= factor
    return total


def decay_bound_check(atoms: Sequence[Atom], cfg: DecayCheckConfig, params: KernelParams, xs,
                      ps: Sequence[ExponentField] | None = None, seed: int | None = None) -> InequalityReport:
    """Empirical constant max_x |I_alpha(a_1..a_m)(x)| / RHS(x) over points of E_A.

    Plain atoms use the bare decay factors; b-weighted atoms additionally
    divide each factor by ||chi_Q||_{p_j}, which needs ``ps``.
    """
    if len(atoms) != params.m:
        raise ValueError(f"expected {params.m} atoms")
    if any(a.d < cfg.d for a in atoms):
        raise ValueError("atom degree below the configured d")
    if cfg.n != params.n:
        raise ValueError("config dimension does not match params.n")
    if max(cfg.A) >= params.m:
        raise ValueError("A is not a subset of the factor indices")
    pts = np.asarray(xs, dtype=float).reshape(-1, params.n)
    kappa = default_kappa(params.n) if cfg.kappa is None else cfg.kappa
    for x in pts:
        bad = _violations(x, atoms, cfg, kappa)
        if bad:
            raise ValueError(f"x={x.tolist()} not in E_A: " + "; ".join(bad))
    weighted = all(a.flavor == B_WEIGHTED for a in atoms)
    if any(a.flavor == B_WEIGHTED for a in atoms) and not weighted:
        raise ValueError("mixed atom flavors")
    norms = None
    if weighted:
        if ps is None or len(ps) != params.m:
            raise ValueError("b-weighted atoms need one exponent field per factor")
        norms = [chi_norm(a.cube, p, a.grid) for a, p in zip(atoms, ps)]
    lhs = np.abs(apply_Ialpha([a.values for a in atoms], params, pts))
    rhs = np.array([decay_rhs(x, atoms, cfg, params.alpha, norms) for x in pts])
    ratios = lhs / rhs
    i = int(np.argmax(ratios))
    rep = InequalityReport.build("decay_weighted" if weighted else "decay_plain", float(lhs[i]), float(rhs[i]),
                                 {"A": list(cfg.A), "d": cfg.d, "kappa": kappa, "points": len(pts),
                                  "theta": cfg.theta, "alpha": params.alpha}, seed)
    rep.ratio = float(ratios[i])
    return rep


def theorem_ratio(sums: Sequence[AtomicSum], ps: Sequence[ExponentField], params: KernelParams,
                  xs: Grid | None = None, commutator: tuple[GridFunction, int] | None = None,
                  seed: int | None = None) -> InequalityReport:
    """||I_alpha(f)||_q (or the commutator) over the product of atomic sequence norms.

    f_j = assemble(sums[j]); q comes from 1/q = sum 1/p_j - alpha/n.  The
    commutator case multiplies the right side by the dyadic BMO seminorm of b.
    LHS norms are taken on ``xs`` (default: the grid of the first sum).
    """
    if len(sums) != params.m or len(ps) != params.m:
        raise ValueError(f"need {params.m} sums and exponent fields")
    params.require_theorem_range()
    q = holder_scale(ps, params.alpha, params.n)
    xs = sums[0].grid if xs is None else xs
    fs = [assemble(s) for s in sums]
    config = {"m": params.m, "n": params.n, "alpha": params.alpha, "atoms": [len(s.terms) for s in sums]}
    if commutator is not None:
        b, j = commutator
        if any(s.terms and s.flavor != B_WEIGHTED for s in sums):
            raise ValueError("the commutator case needs b-weighted atoms")
        out = apply_commutator(b, fs, j, params, xs)
        bmo = bmo_norm(b)
        rhs = bmo * math.prod(sequence_norm(s, p, normalized=True) for s, p in zip(sums, ps))
        config.update({"j": j, "bmo": bmo})
        name = "commutator_theorem"
    else:
        out = apply_Ialpha(fs, params, xs)
        rhs = math.prod(sequence_norm(s, p, normalized=(s.flavor == B_WEIGHTED)) for s, p in zip(sums, ps))
        name = "theorem"
    lhs = luxemburg_norm(out, q)
    if rhs == 0 and lhs > 0:
        raise ValueError("norm proxy degenerate")
    return InequalityReport.build(name, lhs, rhs, config, seed)
