import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from varexp.exponent import ExponentField, r_p
from varexp.geometry import Cube, Grid, GridFunction, random_piecewise
from varexp.norms import (bmo_norm, duality_lower_bound, duality_witness, generalized_holder_check,
                          holder_pair_check, luxemburg_norm, modular)
from varexp.report import InequalityReport

# continuous oracle: quad for the modular, brentq for lambda (computed once, frozen)
LUX_X_2PX = 0.6308956505289967
MOD_2CHI_2PX = 4 / math.log(2)

UNIT = Grid(((0.0, 1.0),), 1 / 1024)
WIDE = Grid(((-1.0, 2.0),), 1 / 256)
P_2PX = ExponentField.from_callable(lambda x: 2 + x, ((0.0, 1.0),), 65, 2.5)
P_SIN = ExponentField.from_callable(lambda x: 2 + 0.5 * np.sin(x), ((-4 * math.pi, 4 * math.pi),), 801, 2.0)


def chi(grid, lo, hi):
    return GridFunction.indicator(grid, Cube(((lo + hi) / 2,), hi - lo))


def test_modular_indicator_is_measure():
    assert modular(chi(WIDE, 0.0, 1.0), P_SIN).value == pytest.approx(1.0, abs=1e-13)


def test_modular_zero():
    assert modular(GridFunction.zeros(WIDE), P_SIN).value == 0.0


def test_modular_analytic():
    f = GridFunction.from_callable(UNIT, lambda x: np.full_like(x, 2.0))
    assert modular(f, P_2PX).value == pytest.approx(MOD_2CHI_2PX, abs=1e-4)


def test_norm_constant_exponent_closed_form():
    f = chi(WIDE, 0.0, 0.5) * -3.0
    assert luxemburg_norm(f, ExponentField.constant(3.0)) == pytest.approx(3 * 0.5 ** (1 / 3), rel=1e-9)


def test_norm_of_unit_indicator_is_one():
    assert luxemburg_norm(chi(WIDE, 0.0, 1.0), P_SIN) == pytest.approx(1.0, rel=1e-9)


def test_norm_against_continuous_oracle():
    f = GridFunction.from_callable(UNIT, lambda x: x)
    assert luxemburg_norm(f, P_2PX) == pytest.approx(LUX_X_2PX, rel=1e-4)


def test_norm_zero_function():
    assert luxemburg_norm(GridFunction.zeros(WIDE), P_SIN) == 0.0


def test_norm_bracket_condition():
    f = random_piecewise(WIDE, 12, np.random.default_rng(1))
    lam = luxemburg_norm(f, P_SIN)
    assert modular(f * (1 / lam), P_SIN).value <= 1.0
    assert modular(f * (1 / (lam * (1 - 1e-9))), P_SIN).value >= 1.0 - 1e-8


def test_holder_examples():
    f = chi(WIDE, 0.0, 1.0)
    rep = holder_pair_check(f, GridFunction.zeros(WIDE), P_SIN)
    assert rep.lhs == 0.0 and rep.ratio == 0.0
    rep = holder_pair_check(f, f, ExponentField.constant(2.0))
    assert rep.ratio == pytest.approx(1.0, rel=1e-9)


def test_duality_examples():
    rep = duality_lower_bound(GridFunction.zeros(WIDE), P_SIN, 4)
    assert rep.lhs == 0.0
    f = chi(WIDE, 0.0, 1.0)
    g = duality_witness(f, ExponentField.constant(2.0))
    assert np.allclose(g.values, f.values)
    fx = GridFunction.from_callable(UNIT, lambda x: x)
    rep = duality_lower_bound(fx, P_2PX, 16, seed=3)
    assert rep.rhs - 1e-3 <= rep.lhs <= r_p(P_2PX) * rep.rhs + 1e-6


def test_generalized_holder_examples():
    f = chi(WIDE, 0.0, 1.0)
    p2 = ExponentField.constant(2.0)
    assert generalized_holder_check([f, GridFunction.zeros(WIDE)], [p2, p2]).ratio == 0.0
    assert generalized_holder_check([f, f], [p2, p2]).ratio == pytest.approx(1.0, rel=1e-9)


def test_bmo_examples():
    assert bmo_norm(GridFunction.from_callable(WIDE, lambda x: np.full_like(x, 4.0))) == 0.0
    b = GridFunction.from_callable(UNIT, lambda x: x)
    assert bmo_norm(b) == pytest.approx(0.25, rel=1e-12)
    assert bmo_norm(b, [Cube((0.5,), 1.0)]) == pytest.approx(0.25, rel=1e-12)
    with pytest.raises(ValueError):
        bmo_norm(b, [])


def test_bmo_log_two_resolutions():
    vals = []
    for h in (1 / 256, 1 / 512):
        g = Grid(((-1.0, 1.0),), h)
        vals.append(bmo_norm(GridFunction.from_callable(g, lambda x: np.log(np.maximum(np.abs(x), h)))))
    assert all(math.isfinite(v) for v in vals)
    assert abs(vals[1] / vals[0] - 1) <= 0.10


def test_report_json_roundtrip():
    rep = holder_pair_check(chi(WIDE, 0.0, 1.0), chi(WIDE, 0.5, 1.5), P_SIN)
    assert InequalityReport.from_dict(json.loads(json.dumps(rep.to_dict()))) == rep


seeds = st.integers(0, 2**31 - 1)


@given(seeds, st.floats(-50, 50).filter(lambda c: abs(c) > 1e-3))
def test_homogeneity(seed, c):
    f = random_piecewise(WIDE, 12, np.random.default_rng(seed))
    assert luxemburg_norm(f * c, P_SIN) == pytest.approx(abs(c) * luxemburg_norm(f, P_SIN), rel=1e-8)


@given(seeds)
def test_unit_ball(seed):
    f = random_piecewise(WIDE, 12, np.random.default_rng(seed))
    assert abs(modular(f * (1 / luxemburg_norm(f, P_SIN)), P_SIN).value - 1) <= 1e-4


@given(seeds)
def test_monotone(seed):
    rng = np.random.default_rng(seed)
    g = random_piecewise(WIDE, 12, rng)
    f = g.with_values(g.values * rng.uniform(0, 1, WIDE.shape))
    assert luxemburg_norm(f, P_SIN) <= luxemburg_norm(g, P_SIN) + 1e-10


@given(seeds, st.sampled_from([1.5, 2.0, 3.0]))
def test_constant_exponent_consistency(seed, q):
    f = random_piecewise(WIDE, 12, np.random.default_rng(seed))
    exact = (np.sum(np.abs(f.values) ** q) * WIDE.h) ** (1 / q)
    assert luxemburg_norm(f, ExponentField.constant(q)) == pytest.approx(exact, rel=1e-6)


@given(seeds)
def test_holder_bound(seed):
    rng = np.random.default_rng(seed)
    f, g = random_piecewise(WIDE, 12, rng), random_piecewise(WIDE, 24, rng)
    assert holder_pair_check(f, g, P_SIN).ratio <= 1 + 1e-6


@given(seeds, st.floats(-10, 10), st.floats(-10, 10))
def test_bmo_shift_and_scale(seed, shift, c):
    b = random_piecewise(WIDE, 24, np.random.default_rng(seed))
    base = bmo_norm(b)
    shifted = bmo_norm(b.with_values(b.values + shift))
    assert shifted == pytest.approx(base, rel=1e-12, abs=1e-12 * (1 + abs(shift)))
    assert bmo_norm(b * c) == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-300)
