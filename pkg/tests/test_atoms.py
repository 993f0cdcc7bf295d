import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from varexp.atoms import (AtomicSum, assemble, certificate_ok, certify, chi_norm, load_atomic_sum, make_atom,
                          make_b_atom, multi_indices, random_sum, save_atomic_sum, sequence_norm)
from varexp.exponent import ExponentField
from varexp.geometry import Cube, Grid, GridFunction

G = Grid(((-2.0, 2.0),), 1 / 64)
G2 = Grid(((-1.0, 1.0), (-1.0, 1.0)), 1 / 16)
Q = Cube((0.5,), 1.0)
P = ExponentField.constant(2.0)


def haar(grid, cube):
    x = grid.axes()[0]
    z, l = cube.center[0], cube.side
    return GridFunction(grid, np.where((x > z - l / 2) & (x < z), 1.0, np.where((x > z) & (x < z + l / 2), -1.0, 0.0)))


def test_multi_indices():
    assert multi_indices(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert multi_indices(1, -1) == []
    assert len(multi_indices(3, 2)) == 10


def test_haar_certificate():
    cert = certify(haar(G, Q), Q, 0)
    assert cert["moment_residuals"] == [0.0]
    assert certificate_ok(cert)
    cert1 = certify(haar(G, Q), Q, 1)
    assert cert1["moment_residuals"][1] == pytest.approx(0.25, rel=1e-12)
    assert not certificate_ok(cert1)


def test_support_leak_detected():
    f = haar(G, Q)
    assert not certificate_ok(certify(f, Cube((0.25,), 0.5), 0))


@pytest.mark.parametrize("d", [-1, 0, 1, 2])
def test_plain_atoms(d):
    a = make_atom(Q, d, 7, G)
    assert certificate_ok(a.certificate)
    assert np.max(np.abs(a.values.values)) == pytest.approx(1.0)
    # recheck with exact summation, independent of the builder
    x = G.axes()[0]
    for k in range(d + 1):
        mom = math.fsum(a.values.values * ((x - 0.5) ** k)) * G.h
        assert abs(mom) <= 1e-9


def test_atom_2d():
    a = make_atom(Cube((0.0, 0.0), 1.0), 2, 3, G2)
    assert certificate_ok(a.certificate)


def test_insufficient_resolution():
    with pytest.raises(ValueError, match="insufficient resolution"):
        make_atom(Cube((0.0,), 2 * G.h), 2, 0, G)


def test_b_atom_with_linear_b_is_plain_degree_one():
    b = GridFunction.from_callable(G, lambda x: x)
    a = make_b_atom(Q, 0, b, P, 11)
    assert certificate_ok(a.certificate)
    assert certificate_ok(certify(a.values, Q, 1))
    assert np.max(np.abs(a.values.values)) == pytest.approx(1 / chi_norm(Q, P, G))


def test_b_atom_constant_b_drops_redundant_constraint():
    b = GridFunction.from_callable(G, lambda x: np.full_like(x, 3.0))
    a = make_b_atom(Q, 0, b, P, 1)
    assert len(a.certificate["dropped_constraints"]) == 1
    assert certificate_ok(a.certificate)


def test_chi_norm_constant_exponent():
    assert chi_norm(Q, ExponentField.constant(3.0), G) == pytest.approx(1.0)
    assert chi_norm(Cube((0.0,), 0.5), ExponentField.constant(2.0), G) == pytest.approx(math.sqrt(0.5))


def test_sequence_norm_examples():
    a = make_atom(Q, 0, 0, G)
    assert sequence_norm(AtomicSum(G, []), P) == 0.0
    assert sequence_norm(AtomicSum(G, [(2.0, a)]), P) == pytest.approx(2.0)
    far = make_atom(Cube((-1.0,), 1.0), 0, 1, G)
    s = AtomicSum(G, [(1.0, a), (1.0, far)])
    assert sequence_norm(s, P, exponent=2.0) == pytest.approx(math.sqrt(2.0))
    assert sequence_norm(AtomicSum(G, [(2.0, a)]), P, normalized=True) == pytest.approx(2.0)


def test_sum_validation():
    a = make_atom(Q, 0, 0, G)
    with pytest.raises(ValueError):
        AtomicSum(G, [(-1.0, a)])
    with pytest.raises(ValueError):
        AtomicSum(G2, [(1.0, a)])
    b = make_b_atom(Q, 0, GridFunction.from_callable(G, np.sin), P, 0)
    with pytest.raises(ValueError):
        AtomicSum(G, [(1.0, a), (1.0, b)])


def test_roundtrip_files(tmp_path):
    rng = np.random.default_rng(0)
    s = random_sum(G, [Q, Cube((-1.0,), 0.5)], 1, 5, rng)
    back = load_atomic_sum(save_atomic_sum(s, tmp_path))
    assert np.array_equal(assemble(back).values, assemble(s).values)
    assert [lam for lam, _ in back.terms] == [lam for lam, _ in s.terms]
    assert back.terms[0][1].certificate == s.terms[0][1].certificate


@given(st.integers(0, 2**31 - 1), st.floats(0, 5), st.floats(0, 5))
def test_assemble_linear(seed, c1, c2):
    rng = np.random.default_rng(seed)
    s1 = random_sum(G, [Q], 0, seed % 1000, rng)
    s2 = random_sum(G, [Cube((-1.0,), 1.0)], 1, seed % 1000, rng)
    lhs = assemble(s1.scaled(c1) | s2.scaled(c2)).values
    rhs = c1 * assemble(s1).values + c2 * assemble(s2).values
    assert np.allclose(lhs, rhs, atol=1e-12)


@given(st.integers(0, 10**6), st.sampled_from([0, 1, 2]))
def test_atoms_always_certified(seed, d):
    assert certificate_ok(make_atom(Q, d, seed, G).certificate)
