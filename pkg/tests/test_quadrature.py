import math

import numpy as np
import pytest
from scipy import integrate

from varexp.fractional.quadrature import SingularKernel, kernel_values, near_table, smooth_box_integral


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9])
def test_one_dimensional_boxes(alpha):
    sk = SingularKernel(alpha, 1, 1)
    assert sk.unit_corner == pytest.approx(1 / alpha, rel=1e-10)
    assert sk.box([-1.0], [2.0]) == pytest.approx((1 + 2 ** alpha) / alpha, rel=1e-10)
    exact = ((3.0 ** alpha) - (1.0 ** alpha)) / alpha
    assert sk.box([1.0], [3.0]) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_euclid_unit_corner_against_polar(alpha):
    polar, _ = integrate.quad(lambda t: 2 * (1 / math.cos(t)) ** alpha / alpha, 0, math.pi / 4, epsabs=1e-13)
    assert SingularKernel(alpha, 2, 1).unit_corner == pytest.approx(polar, rel=1e-9)


def test_sum_kernel_unit_corner_closed_form():
    a = 1.5
    exact = (2 ** a - 2) / ((a - 1) * a)
    assert SingularKernel(a, 2, 1, "sum").unit_corner == pytest.approx(exact, rel=1e-9)


def test_smooth_box_against_dblquad():
    f = lambda y, x: (x * x + y * y) ** ((0.5 - 2) / 2)  # noqa: E731
    ref, _ = integrate.dblquad(f, 1.0, 2.0, 0.5, 1.5, epsabs=1e-13, epsrel=1e-12)
    val = smooth_box_integral(lambda u: kernel_values(u, 0.5, 2, 1, "euclid"), [1.0, 0.5], [2.0, 1.5])
    assert val == pytest.approx(ref, rel=1e-10)


def test_smooth_box_rejects_singularity():
    with pytest.raises(ValueError):
        smooth_box_integral(lambda u: kernel_values(u, 0.5, 1, 1, "euclid"), [-1.0], [1.0])


def test_near_table_is_additive():
    alpha, reach, frac = 0.5, 2, (0.25,)
    table = near_table(alpha, 1, 1, "euclid", frac, reach)
    whole = SingularKernel(alpha, 1, 1).box([-reach - 0.25], [reach + 0.75])
    assert np.nansum(table) == pytest.approx(whole, rel=1e-10)
    assert np.isnan(table[0]) and np.isnan(table[-1])


def test_near_table_2d_symmetric():
    t = near_table(1.5, 2, 1, "euclid", (0.0, 0.0), 1)
    core = t[1:-1, 1:-1]
    assert np.allclose(core, core.T) and np.allclose(core, core[::-1, ::-1])


def test_kernel_values_errors():
    with pytest.raises(ValueError):
        kernel_values(np.ones((1, 1)), 0.5, 1, 1, "cosine")
    with pytest.raises(ValueError):
        SingularKernel(0.0, 1, 1)
