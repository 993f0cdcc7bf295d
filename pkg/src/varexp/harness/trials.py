"""One function per check type: (params, seed, scale, resolution, shift) -> trial outcome.

Every trial is a pure function of its arguments.  Outcomes are dicts with
``lhs``, ``rhs``, ``ratio`` and optionally ``ok`` (a per-trial contract such
as a two-sided sandwich), ``degenerate`` and ``extra``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .. import atoms as at
from ..exponent import ExponentField, check_log_holder, classify_log_holder
from ..geometry import Cube, Grid, GridFunction, random_piecewise, region_EA
from ..maximal import claim_check, vector_fs_check
from ..norms import (duality_lower_bound, generalized_holder_check, holder_pair_check,
                     luxemburg_norm, modular)
from ..fractional.checks import DecayCheckConfig, decay_bound_check, theorem_ratio
from ..fractional.kernel import KernelParams, kernel_derivative_check
from ..fractional.operators import apply_Ialpha

TRIALS: dict[str, Callable] = {}


def trial(name: str):
    def deco(fn):
        TRIALS[name] = fn
        return fn
    return deco


def _out(lhs, rhs, ratio=None, ok=None, degenerate=False, **extra) -> dict:
    if ratio is None:
        ratio = lhs / rhs if rhs else (0.0 if lhs == 0 else math.inf)
    return {"lhs": float(lhs), "rhs": float(rhs), "ratio": float(ratio), "ok": ok,
            "degenerate": bool(degenerate), "extra": extra}


def exponent_from_spec(spec, n: int = 1) -> ExponentField:
    """Build an exponent from a scenario spec.

    A bare number is a constant.  ``{"kind": "sin", "base": b, "amp": a}``
    gives b + a*sin(x_1) on [-L, L]^n (L a multiple of pi, so the tail value
    b joins continuously); ``{"kind": "jump", ...}`` is the step fixture.
    """
    if isinstance(spec, (int, float)):
        return ExponentField.constant(float(spec), n)
    kind = spec["kind"]
    if kind == "constant":
        return ExponentField.constant(float(spec["value"]), n)
    if kind == "sin":
        L = float(spec.get("half_width", 64 * math.pi))
        nodes = int(spec.get("nodes", 8001))
        base, amp, freq = float(spec["base"]), float(spec["amp"]), float(spec.get("freq", 1.0))
        return ExponentField.from_callable(lambda *x: base + amp * np.sin(freq * x[0]),
                                           ((-L, L),) * n, nodes if n == 1 else int(spec.get("nodes", 257)),
                                           base)
    if kind == "jump":
        return jump_exponent(int(spec.get("nodes", 33)), float(spec.get("left", 2.0)),
                             float(spec.get("right", 2.5)))
    raise ValueError(f"unknown exponent kind {kind!r}")


def jump_exponent(nodes: int, left: float = 2.0, right: float = 2.5) -> ExponentField:
    """Step from ``left`` to ``right`` at 0 on [-1/2, 1/2], tail at the midpoint value."""
    return ExponentField.from_callable(lambda x: np.where(x < 0, left, right), ((-0.5, 0.5),), nodes,
                                       0.5 * (left + right))


def _unit_grid(cells: int, n: int = 1, half: float = 2.0) -> Grid:
    return Grid(((-half, half),) * n, 2 * half / cells)


# -- norms -------------------------------------------------------------------

@trial("luxemburg")
def t_luxemburg(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    p = float(params["p"])
    grid = _unit_grid(resolution, params.get("n", 1))
    f = random_piecewise(grid, params.get("pieces", 16), rng)
    norm = luxemburg_norm(f, ExponentField.constant(p, grid.n))
    exact = (np.sum(np.abs(f.values) ** p) * grid.cell_volume) ** (1 / p)
    tol = params.get("rtol", 1e-6)
    return _out(norm, exact, ok=abs(norm - exact) <= tol * exact)


@trial("unit_ball")
def t_unit_ball(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    grid = _unit_grid(resolution, 1, params.get("half", 3.0))
    f = random_piecewise(grid, params.get("pieces", 16), rng)
    p = exponent_from_spec(params["p"])
    norm = luxemburg_norm(f, p)
    rho = modular(f * (1.0 / norm), p).value
    tol = params.get("tol", 1e-4)
    return _out(rho, 1.0, ok=abs(rho - 1.0) <= tol, norm=norm)


def _exponent_for_seed(params, seed, n=1):
    specs = params["exponents"]
    return exponent_from_spec(specs[seed % len(specs)], n)


@trial("holder")
def t_holder(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    grid = _unit_grid(resolution, 1, params.get("half", 3.0))
    p = _exponent_for_seed(params, seed)
    f = random_piecewise(grid, params.get("pieces", 16), rng)
    g = random_piecewise(grid, params.get("pieces", 16), rng)
    rep = holder_pair_check(f, g, p)
    return _out(rep.lhs, rep.rhs, rep.ratio, ok=rep.ratio <= 1 + params.get("tol", 1e-6))


@trial("duality")
def t_duality(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    grid = _unit_grid(resolution, 1, params.get("half", 3.0))
    p = _exponent_for_seed(params, seed)
    f = random_piecewise(grid, params.get("pieces", 16), rng)
    rep = duality_lower_bound(f, p, params.get("g_trials", 8), seed)
    nf, upper = rep.rhs, rep.config["upper"]
    ok = nf - params.get("lower_tol", 1e-3) <= rep.lhs <= upper + params.get("upper_tol", 1e-6)
    return _out(rep.lhs, nf, ok=ok, upper=upper, witness=rep.config["witness"])


@trial("generalized_holder")
def t_generalized_holder(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    grid = _unit_grid(resolution, 1, params.get("half", 3.0))
    ps = [exponent_from_spec(s) for s in params["exponents"]]
    fs = [random_piecewise(grid, params.get("pieces", 16), rng) for _ in ps]
    rep = generalized_holder_check(fs, ps)
    return _out(rep.lhs, rep.rhs, rep.ratio)


# -- atoms -------------------------------------------------------------------

@trial("atoms")
def t_atoms(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    n = params.get("n", 1)
    grid = _unit_grid(resolution, n)
    k = int(rng.integers(params.get("min_cells", 8), params.get("max_cells", 33)))
    c = [(int(rng.integers(-resolution // 4, resolution // 4)) + (k % 2) / 2) * grid.h for _ in range(n)]
    Q = Cube(tuple(c), k * grid.h)
    worst, ok = 0.0, True
    tol = params.get("tol", at.MOMENT_TOL)
    for d in params.get("degrees", [0, 1, 2]):
        if params.get("flavor", at.PLAIN) == at.PLAIN:
            a = at.make_atom(Q, d, seed, grid)
            res = a.certificate["moment_residuals"]
        else:
            b = GridFunction.from_callable(grid, lambda *x: np.sin(x[0]))
            p = exponent_from_spec(params.get("p", 2.0), n)
            a = at.make_b_atom(Q, d, b, p, seed)
            res = a.certificate["moment_residuals"] + a.certificate["b_moment_residuals"]
        worst = max([worst] + [abs(r) for r in res])
        ok &= at.certificate_ok(a.certificate, tol)
    return _out(worst, tol, ok=bool(ok))


# -- fractional ----------------------------------------------------------------

@trial("riesz_oracle")
def t_riesz_oracle(params, seed, scale, resolution, shift):
    """I_{1/2} chi_[0,1] at x = 1/2 against 2*sqrt(2), with h = 1/resolution."""
    grid = Grid(((-1.0, 2.0),), 1.0 / resolution)
    f = GridFunction.indicator(grid, Cube((0.5,), 1.0))
    val = float(apply_Ialpha([f], KernelParams(1, 1, 0.5), np.array([[0.5]]),
                             singular=params.get("singular", "corrected"))[0])
    exact = 2 * math.sqrt(2)
    tol = params["tolerances"][str(resolution)]
    return _out(val, exact, ok=abs(val - exact) <= tol * exact)


def _derivative_samples(params, seed, scale):
    m, n = params["m"], params["n"]
    rng = np.random.default_rng(seed)
    k = params.get("samples", 200)
    x = rng.normal(size=(k, n))
    y = x[:, None, :] + rng.normal(size=(k, m, n)) * rng.uniform(0.2, 3.0, size=(k, 1, 1))
    return [(scale * xi, scale * yi) for xi, yi in zip(x, y)]


@trial("kernel_derivative")
def t_kernel_derivative(params, seed, scale, resolution, shift):
    kp = KernelParams(params["m"], params["n"], params["alpha"])
    samples = _derivative_samples(params, seed, scale)
    worst = None
    for beta in params["betas"]:
        rep = kernel_derivative_check(kp, beta, samples)
        if worst is None or rep.ratio > worst.ratio:
            worst = rep
    ok = None
    if "expect" in params:
        ok = abs(worst.ratio - params["expect"]) <= params.get("tol", 1e-6)
    return _out(worst.lhs, worst.rhs, worst.ratio, ok=ok, beta=worst.config["beta"],
                skipped=worst.config["skipped"])


def _b_of(t: float, shift: float):
    return lambda *x: np.sin((x[0] - shift) / t)


def _decay_config(params, seed, t):
    rng = np.random.default_rng(seed)
    h = params.get("h", 1.0 / 32)
    lo, hi = params.get("min_cells", 8), params.get("max_cells", 32)
    half = params.get("half", 16.0)
    grid = Grid(((-half * t, half * t),), h * t)
    cubes = []
    for _ in range(2):
        k = int(rng.integers(lo, hi + 1))
        c = (int(rng.integers(-3 * hi, 3 * hi)) + (k % 2) / 2) * h
        cubes.append(Cube((c * t,), k * h * t))
    return grid, cubes


@trial("decay")
def t_decay(params, seed, scale, resolution, shift):
    """Atom decay empirical constant for m = 2, n = 1 over all index sets A."""
    t = float(scale)
    d = params["d"]
    kp = KernelParams(2, 1, params.get("alpha", 0.5))
    grid, cubes = _decay_config(params, seed, t)
    ps = None
    if params.get("flavor", at.PLAIN) == at.PLAIN:
        atoms = [at.make_atom(Q, d, seed * 7 + j, grid) for j, Q in enumerate(cubes)]
    else:
        b = GridFunction.from_callable(grid, _b_of(t, 0.0))
        p = exponent_from_spec(params.get("p", 2.0))
        ps = [p, p]
        atoms = [at.make_b_atom(Q, d, b, p, seed * 7 + j) for j, Q in enumerate(cubes)]
    cand = grid.points()[:: params.get("stride", 5)]
    best = None
    for A in ((0,), (1,), (0, 1)):
        xs = cand[region_EA(cubes, A)(cand)]
        if not len(xs):
            continue
        pick = np.random.default_rng(seed + len(A) + 10 * A[0]).choice(len(xs), min(4, len(xs)), replace=False)
        rep = decay_bound_check(atoms, DecayCheckConfig(A, d), kp, xs[np.sort(pick)], ps, seed)
        if best is None or rep.ratio > best.ratio:
            best = rep
    return _out(best.lhs, best.rhs, best.ratio, A=best.config["A"])


def _theorem_inputs(params, seed, t, shift, b_weighted):
    rng = np.random.default_rng(seed)
    L, cells = params.get("half", 4.0), params.get("cells", 512)
    h = 2 * L / cells
    grid = Grid(((-L * t + shift, L * t + shift),), h * t)
    ev = Grid(grid.box, params.get("eval_factor", 2) * h * t)
    p = exponent_from_spec(params["p"])
    if params.get("b_const") is None:
        b = GridFunction.from_callable(grid, _b_of(t, shift))
    else:
        b = GridFunction(grid, np.full(grid.shape, float(params["b_const"])))
    sums = []
    lo, hi = params.get("min_cells", 16), params.get("max_cells", 64)
    for j in range(2):
        k = int(rng.integers(lo, hi + 1))
        c = (int(rng.integers(-cells // 8, cells // 8)) + (k % 2) / 2) * h
        Q = Cube((c * t + shift,), k * h * t)
        d = params.get("d", 0)
        a = at.make_b_atom(Q, d, b, p, seed * 7 + j) if b_weighted else at.make_atom(Q, d, seed * 7 + j, grid)
        sums.append(at.AtomicSum(grid, [(float(rng.uniform(0.5, 1.5)), a)]))
    return sums, ev, b, p


@trial("theorem")
def t_theorem(params, seed, scale, resolution, shift):
    sums, ev, _, p = _theorem_inputs(params, seed, float(scale), float(shift), False)
    rep = theorem_ratio(sums, [p, p], KernelParams(2, 1, params.get("alpha", 0.5)), ev, seed=seed)
    return _out(rep.lhs, rep.rhs, rep.ratio, degenerate=rep.degenerate)


@trial("commutator_theorem")
def t_commutator_theorem(params, seed, scale, resolution, shift):
    sums, ev, b, p = _theorem_inputs(params, seed, float(scale), float(shift), True)
    kp = KernelParams(2, 1, params.get("alpha", 0.5))
    rep = theorem_ratio(sums, [p, p], kp, ev, commutator=(b, params.get("j", 0)), seed=seed)
    if params.get("b_const") is not None:
        # vanishing commutator: compare the LHS with the size of the input
        size = math.prod(at.assemble(s).sup() for s in sums) * abs(params["b_const"])
        tol = params.get("vanish_tol", 1e-12)
        return _out(rep.lhs, size, ok=rep.lhs <= tol * size, degenerate=rep.degenerate)
    return _out(rep.lhs, rep.rhs, rep.ratio, degenerate=rep.degenerate)


@trial("fefferman_stein")
def t_fefferman_stein(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    grid = _unit_grid(resolution, 1, params.get("half", 4.0))
    p = exponent_from_spec(params["p"])
    fs = [random_piecewise(grid, params.get("pieces", 16), rng) for _ in range(params.get("family", 8))]
    rep = vector_fs_check(fs, p, params["alpha"], params.get("lq", 2.0))
    return _out(rep.lhs, rep.rhs, rep.ratio)


@trial("claim")
def t_claim(params, seed, scale, resolution, shift):
    rng = np.random.default_rng(seed)
    n = params.get("n", 1)
    y = rng.uniform(-5, 5, size=n)
    r = float(rng.uniform(0.1, 2.0)) * scale
    rep = claim_check(y, r, params["alpha"], cells_per_side=params.get("cells_per_side", 16),
                      extent=params.get("extent", 8.0))
    return _out(rep.lhs, rep.rhs, rep.ratio, ok=math.isfinite(rep.ratio), y=y.tolist(), r=r)


@trial("lh_validate")
def t_lh_validate(params, seed, scale, resolution, shift):
    """Classify one exponent family across refinements against the expected verdict."""
    fixture = params["fixture"]
    nodes = params["nodes"]
    if fixture == "constant":
        fields = [ExponentField.constant(float(params.get("value", 2.0)), 1) for _ in nodes]
    elif fixture == "jump":
        fields = [jump_exponent(k) for k in nodes]
    else:
        fields = [exponent_from_spec(dict(params["spec"], nodes=k)) for k in nodes]
    rep = classify_log_holder(fields, params.get("threshold", 100.0))
    c = [r.C_local for r in rep.reports]
    expect = params["expect"]
    if expect == "pass":
        ok = rep.passed and all(r.C_local == 0 and r.C_decay == 0 for r in rep.reports) \
            if fixture == "constant" else rep.passed
    else:
        ok = (not rep.passed) and rep.diverging and all(b > a for a, b in zip(c, c[1:]))
    return _out(c[-1], c[0], ok=bool(ok), C_local=c, growth=list(rep.growth), diverging=rep.diverging)


__all__ = ["TRIALS", "exponent_from_spec", "jump_exponent", "check_log_holder"]
