"""Moment-cancelling atoms built by projection, atomic sums and their sequence norms.

Atoms are constructed, never extracted from a given distribution: seeded
random values on the cube are projected onto the orthogonal complement of
the monomials of degree <= d (and, for b-weighted atoms, of b times those
monomials) in the discrete inner product of the grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg

from .exponent import ExponentField
from .geometry import Cube, Grid, GridFunction
from .norms import luxemburg_norm

MOMENT_TOL = 1e-9
MAX_RETRIES = 8
PLAIN = "plain"
B_WEIGHTED = "b_weighted"


def multi_indices(n: int, d: int) -> list[tuple[int, ...]]:
    """All multi-indices beta in N^n with |beta| <= d, graded order."""
    if d < 0:
        return []
    out = [b for b in np.ndindex(*(d + 1,) * n) if sum(b) <= d]
    return sorted((tuple(int(x) for x in b) for b in out), key=lambda b: (sum(b), b[::-1]))


def scaled_monomials(points: np.ndarray, cube: Cube, d: int) -> np.ndarray:
    """Columns ((x - z)/l)^beta, |beta| <= d, at the given points."""
    u = (points - np.asarray(cube.center)) / cube.side
    betas = multi_indices(points.shape[1], d)
    if not betas:
        return np.zeros((len(points), 0))
    return np.stack([np.prod(u ** np.asarray(b), axis=1) for b in betas], axis=1)


@dataclass
class Atom:
    cube: Cube
    values: GridFunction
    d: int
    flavor: str = PLAIN
    certificate: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.values.grid

    def to_dict(self, values_ref: str | None = None) -> dict:
        out = {"cube": self.cube.to_dict(), "d": self.d, "flavor": self.flavor,
               "certificate": self.certificate}
        if values_ref is None:
            out["values"] = self.values.to_dict()
        else:
            out["values-ref"] = values_ref
        return out


def _cells(grid: Grid, cube: Cube, d: int):
    mask = grid.cube_mask(cube)
    per_axis = [int(mask.any(axis=tuple(a for a in range(grid.n) if a != ax)).sum())
                for ax in range(grid.n)]
    if min(per_axis) < max(d + 2, 1):
        raise ValueError(f"insufficient resolution for degree {d}: cube spans {per_axis} cells")
    return mask, grid.points()[mask.ravel()]


def _moment_residuals(vals: np.ndarray, cols: np.ndarray, dv: float, scale: float) -> list[float]:
    return [abs(math.fsum(vals * cols[:, i])) * dv / scale for i in range(cols.shape[1])]


def certify(values: GridFunction, cube: Cube, d: int, b: GridFunction | None = None) -> dict:
    """Independent re-check of support and (b-weighted) moment conditions.

    Residuals are |int a ((x-z)/l)^beta| / (sup|a| |Q|), and for b-weighted atoms
    additionally |int a b ((x-z)/l)^beta| / (sup|a| |Q| sup_Q|b|), each summed
    with correctly rounded summation.
    """
    grid = values.grid
    mask = grid.cube_mask(cube)
    outside = float(np.max(np.abs(values.values[~mask]))) if (~mask).any() else 0.0
    pts = grid.points()[mask.ravel()]
    a = values.values[mask]
    sup = float(np.max(np.abs(a))) if a.size else 0.0
    scale = max(sup, np.finfo(float).tiny) * cube.volume
    cols = scaled_monomials(pts, cube, d)
    cert = {
        "support_leak": outside,
        "sup": sup,
        "moment_residuals": _moment_residuals(a, cols, grid.cell_volume, scale),
    }
    if b is not None:
        bq = b.values[mask]
        bsup = max(float(np.max(np.abs(bq))) if bq.size else 0.0, np.finfo(float).tiny)
        cert["b_moment_residuals"] = _moment_residuals(a, cols * bq[:, None], grid.cell_volume, scale * bsup)
    return cert


def certificate_ok(cert: dict, tol: float = MOMENT_TOL) -> bool:
    res = list(cert.get("moment_residuals", [])) + list(cert.get("b_moment_residuals", []))
    return (cert.get("support_leak", 0.0) == 0.0 and all(r <= tol for r in res)
            and cert.get("size_slack", 0.0) >= -1e-12)


def _project_out(v: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return v
    for _ in range(2):
        v = v - basis @ (basis.T @ v)
    return v


def _random_projected(npts: int, basis: np.ndarray, seed: int) -> np.ndarray:
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng(seed + attempt)
        v0 = rng.uniform(-1.0, 1.0, npts)
        v = _project_out(v0, basis)
        if np.max(np.abs(v)) > 1e-8 * np.max(np.abs(v0)):
            return v
    raise ValueError(f"projection annihilated the random values for {MAX_RETRIES} seeds")


def _range_basis(cols: np.ndarray) -> np.ndarray:
    if cols.shape[1] == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    keep = s > s[0] * 1e-13
    return u[:, keep]


def make_atom(cube: Cube, d: int, seed: int, grid: Grid) -> Atom:
    """Plain atom: sup|a| = 1 on Q, zero outside, moments up to degree d vanish."""
    if d < -1:
        raise ValueError("degree must be >= -1")
    mask, pts = _cells(grid, cube, d)
    cols = scaled_monomials(pts, cube, d)
    v = _random_projected(len(pts), _range_basis(cols), seed)
    vals = np.zeros(grid.shape)
    vals[mask] = v / np.max(np.abs(v))
    f = GridFunction(grid, vals)
    cert = certify(f, cube, d)
    cert["size_slack"] = 1.0 - cert["sup"]
    cert["seed"] = seed
    return Atom(cube, f, d, PLAIN, cert)


def chi_norm(cube: Cube, p: ExponentField, grid: Grid) -> float:
    """||chi_Q||_p(.) on the grid (cells fully inside Q)."""
    return luxemburg_norm(GridFunction.indicator(grid, cube), p)


def make_b_atom(cube: Cube, d: int, b: GridFunction, p: ExponentField, seed: int,
                rcond: float = 1e-6) -> Atom:
    """(p(.), b, d, inf)-atom: plain and b-weighted moments vanish, sup|a| = 1/||chi_Q||_p.

    Constraint columns whose pivoted-QR diagonal falls below ``rcond`` times the
    leading one (Gram condition number above rcond**-2) are reported as dropped.
    """
    grid = b.grid
    mask, pts = _cells(grid, cube, d)
    mono = scaled_monomials(pts, cube, d)
    cols = np.hstack([mono, mono * b.values[mask][:, None]])
    dropped: list[int] = []
    if cols.shape[1]:
        _, r, piv = scipy.linalg.qr(cols, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        lead = diag[0] if diag.size and diag[0] > 0 else 1.0
        dropped = sorted(int(piv[i]) for i in range(len(diag)) if diag[i] <= rcond * lead)
    v = _random_projected(len(pts), _range_basis(cols), seed)
    size = 1.0 / chi_norm(cube, p, grid)
    vals = np.zeros(grid.shape)
    vals[mask] = v / np.max(np.abs(v)) * size
    f = GridFunction(grid, vals)
    cert = certify(f, cube, d, b)
    cert["size_slack"] = size - cert["sup"]
    cert["dropped_constraints"] = dropped
    cert["seed"] = seed
    return Atom(cube, f, d, B_WEIGHTED, cert)


@dataclass
class AtomicSum:
    grid: Grid
    terms: list[tuple[float, Atom]] = field(default_factory=list)

    def __post_init__(self):
        flavors = {a.flavor for _, a in self.terms}
        if len(flavors) > 1:
            raise ValueError("all atoms of a sum must share a flavor")
        for lam, a in self.terms:
            if lam < 0:
                raise ValueError("coefficients must be nonnegative")
            if a.grid != self.grid:
                raise ValueError("atom lives on a different grid")

    @property
    def flavor(self) -> str | None:
        return self.terms[0][1].flavor if self.terms else None

    def __or__(self, other: "AtomicSum") -> "AtomicSum":
        return AtomicSum(self.grid, self.terms + other.terms)

    def scaled(self, c: float) -> "AtomicSum":
        return AtomicSum(self.grid, [(c * lam, a) for lam, a in self.terms])


def assemble(s: AtomicSum) -> GridFunction:
    """Pointwise sum of lambda_j a_j."""
    out = np.zeros(s.grid.shape)
    for lam, a in s.terms:
        out = out + lam * a.values.values
    return GridFunction(s.grid, out)


def sequence_norm(s: AtomicSum, p: ExponentField, exponent: float | None = None,
                  normalized: bool = False) -> float:
    """Luxemburg norm of the atomic aggregate (sum_j (lambda_j chi_Qj / w_j)^s)^(1/s).

    normalized=True: w_j = ||chi_Qj||_p and s = p^- (the b-atom space norm).
    normalized=False: w_j = 1 and s = ``exponent`` (default p^-).
    """
    if not s.terms:
        return 0.0
    sexp = p.p_minus if (normalized or exponent is None) else float(exponent)
    if sexp <= 0:
        raise ValueError("aggregation exponent must be positive")
    acc = np.zeros(s.grid.shape)
    for lam, a in s.terms:
        chi = s.grid.cube_mask(a.cube).astype(float)
        w = chi_norm(a.cube, p, s.grid) if normalized else 1.0
        acc += (abs(lam) * chi / w) ** sexp
    return luxemburg_norm(GridFunction(s.grid, acc ** (1.0 / sexp)), p)


# -- files -----------------------------------------------------------------------

def save_atom(atom: Atom, path: str | Path) -> Path:
    path = Path(path)
    values_path = path.with_name(path.stem + ".values.json")
    values_path.write_text(json.dumps(atom.values.to_dict()))
    path.write_text(json.dumps(atom.to_dict(values_ref=values_path.name), indent=1))
    return path


def load_atom(path: str | Path) -> Atom:
    path = Path(path)
    doc = json.loads(path.read_text())
    if "values-ref" in doc:
        values = GridFunction.from_dict(json.loads((path.parent / doc["values-ref"]).read_text()))
    else:
        values = GridFunction.from_dict(doc["values"])
    return Atom(Cube.from_dict(doc["cube"]), values, int(doc["d"]), doc["flavor"], doc["certificate"])


def save_atomic_sum(s: AtomicSum, directory: str | Path, stem: str = "atom") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    terms = []
    for i, (lam, a) in enumerate(s.terms):
        name = f"{stem}_{i}.json"
        save_atom(a, directory / name)
        terms.append({"lambda": lam, "atom": name})
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps({"grid": s.grid.to_dict(), "flavor": s.flavor, "terms": terms}, indent=1))
    return manifest


def load_atomic_sum(manifest: str | Path) -> AtomicSum:
    manifest = Path(manifest)
    doc = json.loads(manifest.read_text())
    grid = Grid(tuple(tuple(b) for b in doc["grid"]["box"]), doc["grid"]["h"])
    terms = [(float(t["lambda"]), load_atom(manifest.parent / t["atom"])) for t in doc["terms"]]
    return AtomicSum(grid, terms)


def random_sum(grid: Grid, cubes: Sequence[Cube], d: int, seed: int, rng: np.random.Generator,
               b: GridFunction | None = None, p: ExponentField | None = None) -> AtomicSum:
    """Atomic sum with coefficients uniform in [0.5, 1.5] and seeded atoms on ``cubes``."""
    terms = []
    for i, Q in enumerate(cubes):
        lam = float(rng.uniform(0.5, 1.5))
        if b is None:
            terms.append((lam, make_atom(Q, d, seed * 101 + i, grid)))
        else:
            terms.append((lam, make_b_atom(Q, d, b, p, seed * 101 + i)))
    return AtomicSum(grid, terms)
