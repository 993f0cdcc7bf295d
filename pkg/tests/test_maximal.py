import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from varexp.exponent import ExponentField
from varexp.geometry import Cube, Grid, GridFunction, random_piecewise
from varexp.maximal import (Bump, BumpDictionary, MaximalConfig, claim_check, frac_maximal, grand_maximal,
                            hardy_norm, vector_fs_check)

G = Grid(((-4.0, 4.0),), 1 / 64)
CHI = GridFunction.indicator(G, Cube((0.5,), 1.0))


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5])
def test_maximal_of_indicator_on_cube(alpha):
    m = frac_maximal(CHI, MaximalConfig(alpha))
    inside = G.cube_mask(Cube((0.5,), 1.0))
    assert np.allclose(m.values[inside], 1.0, rtol=1e-12)


def test_hardy_littlewood_tail_point():
    m = frac_maximal(CHI)
    assert m.sample([[2 - G.h / 2]])[0] == pytest.approx(0.5, rel=0.05)


def test_maximal_zero_and_config_errors():
    assert frac_maximal(GridFunction.zeros(G)).sup() == 0.0
    with pytest.raises(ValueError):
        MaximalConfig(-0.1)
    with pytest.raises(ValueError):
        MaximalConfig(0.0, scales=())
    with pytest.raises(ValueError):
        frac_maximal(CHI, MaximalConfig(1.0))


def test_maximal_dominates_function():
    f = random_piecewise(G, 16, np.random.default_rng(4))
    assert np.all(frac_maximal(f).values >= np.abs(f.values) - 1e-12)


def test_claim_scale_invariant():
    a = claim_check([0.3], 1.0, 0.5)
    b = claim_check([0.3 * 3], 3.0, 0.5)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-12)
    assert 0 < a.ratio < np.inf


def test_claim_errors():
    with pytest.raises(ValueError):
        claim_check([0.0], 0.0, 0.5)
    with pytest.raises(ValueError):
        claim_check([0.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        claim_check([0.0], 1.0, 0.5, cells_per_side=15)
    with pytest.raises(ValueError):
        claim_check([0.0], 1.0, 0.5, xs=[[100.0]])


def test_fefferman_stein_examples():
    p = ExponentField.constant(2.0)
    zero = vector_fs_check([GridFunction.zeros(G)], p, 0.0, 2.0)
    assert zero.lhs == 0.0
    rep = vector_fs_check([CHI, CHI * 2.0], p, 0.0, 2.0)
    assert rep.lhs >= rep.rhs and np.isfinite(rep.ratio)
    with pytest.raises(ValueError):
        vector_fs_check([CHI], p, 0.0, 1.0)
    with pytest.raises(ValueError):
        vector_fs_check([], p, 0.0, 2.0)


def test_dictionary_certificate_and_roundtrip():
    d = BumpDictionary.default(1, [0.25, 0.5])
    assert d.certified
    assert all(abs(v - 1) <= 1e-8 for v in d.certificate["integrals"])
    d2 = BumpDictionary.from_dict(json.loads(json.dumps(d.to_dict())))
    assert d2 == d
    raw = BumpDictionary([Bump(1, 4)], (0.5,), 3)
    with pytest.raises(ValueError):
        grand_maximal(CHI, raw)


def test_bump_reference_integral():
    assert Bump(2, 5).reference(300).integrate() == pytest.approx(1.0, rel=1e-3)


def test_grand_maximal_of_constant():
    one = GridFunction.from_callable(G, lambda x: np.ones_like(x))
    d = BumpDictionary.default(1, [0.25, 0.5])
    g = grand_maximal(one, d)
    assert g.sample([[0.0]])[0] == pytest.approx(1.0, rel=1e-3)


def test_grand_maximal_translation():
    d = BumpDictionary.default(1, [0.125, 0.25])
    f = GridFunction.indicator(G, Cube((0.0,), 0.5))
    g = GridFunction.indicator(G, Cube((0.0 + 10 * G.h,), 0.5))
    a, b = grand_maximal(f, d).values, grand_maximal(g, d).values
    assert np.allclose(a[100:-100], b[110:-90], atol=1e-14)


@given(st.integers(0, 2**31 - 1), st.floats(0.1, 10))
def test_hardy_norm_homogeneous(seed, c):
    d = BumpDictionary.default(1, [0.25])
    f = random_piecewise(G, 8, np.random.default_rng(seed))
    p = ExponentField.constant(2.0)
    assert hardy_norm(f * c, p, d) == pytest.approx(c * hardy_norm(f, p, d), rel=1e-8)


def test_hardy_norm_of_bump_dominates_l2_fraction():
    d = BumpDictionary.default(1, [0.125, 0.25, 0.5])
    f = GridFunction.from_callable(G, lambda x: Bump(1, 6)(x / 0.5))
    p = ExponentField.constant(2.0)
    assert hardy_norm(GridFunction.zeros(G), p, d) == 0.0
    assert hardy_norm(f, p, d) >= 0.5 * np.sqrt(np.sum(f.values ** 2) * G.h)


@given(st.integers(0, 2**31 - 1), st.floats(-8, 8), st.sampled_from([0.0, 0.5]))
def test_maximal_homogeneous_and_monotone(seed, c, alpha):
    rng = np.random.default_rng(seed)
    g = random_piecewise(G, 16, rng)
    f = g.with_values(g.values * rng.uniform(0, 1, G.shape))
    cfg = MaximalConfig(alpha)
    assert np.allclose(frac_maximal(g * c, cfg).values, abs(c) * frac_maximal(g, cfg).values, rtol=1e-12, atol=0)
    assert np.all(frac_maximal(f, cfg).values <= frac_maximal(g, cfg).values * (1 + 1e-12))
