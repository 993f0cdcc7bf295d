import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from varexp import geometry
from varexp.geometry import (Cube, Grid, GridFunction, default_kappa, dilate, integrate,
                             nonempty_subsets, random_piecewise, region_EA)


def test_dilate_identity_and_default_kappa():
    Q = Cube((0.5,), 1.0)
    assert dilate(Q, 1.0) == Q
    assert dilate(Cube((0.0,), 1.0), default_kappa(1)).side == 2.0


def test_dilate_composes_and_keeps_center():
    Q = Cube((0.3, -1.2), 0.7)
    a, b = dilate(dilate(Q, 2), 3), dilate(Q, 6)
    assert a.center == Q.center == b.center
    assert math.isclose(a.side, b.side, rel_tol=1e-15)


def test_dilate_rejects_nonpositive():
    with pytest.raises(ValueError):
        dilate(Cube((0.0,), 1.0), 0.0)


def test_cube_is_closed():
    Q = Cube((0.0,), 2.0)
    assert Q.contains([[1.0], [-1.0], [0.0]]).all()
    assert not Q.contains([[1.0000001]]).any()


def test_region_single_cube_is_complement():
    Q = Cube((0.0,), 1.0)
    pred = region_EA([Q], [0])
    xs = np.linspace(-3, 3, 601)[:, None]
    assert np.array_equal(pred(xs), ~dilate(Q, 2.0).contains(xs))


def test_region_two_cubes_definition():
    Q1, Q2 = Cube((0.0,), 1.0), Cube((3.0,), 1.0)
    pred = region_EA([Q1, Q2], [0])
    assert pred(np.array([[3.2]]))[0]      # in Q2* but not in Q1*
    assert not pred(np.array([[0.2]]))[0]  # inside Q1*


def test_region_empty_A_rejected():
    with pytest.raises(ValueError):
        region_EA([Cube((0.0,), 1.0)], [])


@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 2.0)), min_size=1, max_size=3))
def test_regions_partition(cubes):
    cubes = [Cube((x, y), s) for x, y, s in cubes]
    ax = np.linspace(-6, 6, 41)
    pts = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    counts = np.zeros(len(pts), dtype=int)
    for A in nonempty_subsets(len(cubes)):
        counts += region_EA(cubes, A)(pts)
    in_all = np.all([dilate(Q, default_kappa(2)).contains(pts) for Q in cubes], axis=0)
    assert np.all(counts + in_all == 1)


def test_integrate_oracles():
    grid = Grid(((0.0, 2.0), (0.0, 1.5)), 0.25)
    assert integrate(GridFunction.from_callable(grid, lambda x, y: np.ones_like(x))) == pytest.approx(3.0, abs=1e-14)
    assert integrate(GridFunction.zeros(grid)) == 0.0
    g1 = Grid(((0.0, 1.0),), 1 / 1024)
    # midpoint rule is exact for linear integrands
    assert abs(integrate(GridFunction.from_callable(g1, lambda x: x)) - 0.5) <= 1e-6


@given(st.integers(0, 10_000), st.floats(-5, 5), st.floats(-5, 5))
def test_integrate_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    grid = Grid(((-1.0, 1.0),), 1 / 64)
    f, g = random_piecewise(grid, 8, rng), random_piecewise(grid, 16, rng)
    err = abs(integrate(f * a + g * b) - a * integrate(f) - b * integrate(g))
    assert err <= 1e-12 * (abs(a) * f.sup() + abs(b) * g.sup()) * grid.volume + 1e-300


def test_bit_reproducible_sum_matches():
    grid = Grid(((0.0, 1.0),), 1 / 256)
    f = random_piecewise(grid, 16, np.random.default_rng(3))
    plain = integrate(f)
    geometry.set_bit_reproducible(True)
    try:
        exact = integrate(f)
    finally:
        geometry.set_bit_reproducible(False)
    assert exact == pytest.approx(plain, rel=1e-13)
    assert exact == math.fsum(f.values.ravel()) * grid.cell_volume


def test_grid_validation_and_points():
    with pytest.raises(ValueError):
        Grid(((0.0, 1.0),), 0.3)
    grid = Grid(((0.0, 1.0), (0.0, 0.5)), 0.25)
    assert grid.shape == (4, 2)
    pts = grid.points()
    assert pts.shape == (8, 2)
    assert np.allclose(pts[0], [0.125, 0.125])


def test_cube_mask_selects_whole_cells():
    grid = Grid(((0.0, 1.0),), 0.125)
    mask = grid.cube_mask(Cube((0.5,), 0.5))
    assert mask.sum() == 4
    assert grid.axes()[0][mask].min() == pytest.approx(0.3125)


def test_gridfunction_sample_zero_outside():
    grid = Grid(((0.0, 1.0),), 0.5)
    f = GridFunction(grid, [2.0, 3.0])
    assert np.array_equal(f.sample([[0.1], [0.9], [1.5], [-0.1]]), [2.0, 3.0, 0.0, 0.0])


def test_gridfunction_json_roundtrip():
    grid = Grid(((0.0, 1.0), (0.0, 1.0)), 0.25)
    f = random_piecewise(grid, 2, np.random.default_rng(0))
    g = GridFunction.from_dict(json.loads(json.dumps(f.to_dict())))
    assert g.grid == f.grid and np.array_equal(g.values, f.values)


def test_gridfunction_rejects_nonfinite():
    with pytest.raises(ValueError):
        GridFunction(Grid(((0.0, 1.0),), 0.5), [1.0, np.nan])


def test_random_piecewise_refines_exactly():
    coarse = random_piecewise(Grid(((0.0, 1.0),), 1 / 16), 4, np.random.default_rng(7))
    fine = random_piecewise(Grid(((0.0, 1.0),), 1 / 32), 4, np.random.default_rng(7))
    assert np.array_equal(np.repeat(coarse.values, 2), fine.values)
    assert integrate(coarse) == pytest.approx(integrate(fine), rel=1e-14)
