import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sumset_lab import GroupSubset, is_in_strict_coset, make_group
from sumset_lab.correlation import (
    JointDistribution,
    ace_correlation,
    avoidance_coupling,
    conditional_pair,
    is_rho_one,
    maximal_correlation_pair,
    rho,
    top_singular_pair,
)
from sumset_lab.errors import InvalidConditioningError, InvalidInputError, ShapeError

from conftest import abelian_groups


def Z(orders, members):
    g = make_group(orders)
    return g, GroupSubset.from_elements(g, members)


def test_coupling_examples():
    g, Z0 = Z([2], [0, 1])
    P = avoidance_coupling(g, Z0, 2)
    assert all(P.mass(u, v) == Fraction(1, 4) for u in range(2) for v in range(2))
    g, Z0 = Z([2], [0])
    P = avoidance_coupling(g, Z0, 2)
    assert P.mass(0, 0) == P.mass(1, 1) == Fraction(1, 2) and P.mass(0, 1) == 0
    g, Z0 = Z([3], [0, 1])
    P = avoidance_coupling(g, Z0, 2)
    support = {(u, v) for u in range(3) for v in range(3) if (u + v) % 3 in (0, 1)}
    for u, v in itertools.product(range(3), repeat=2):
        assert P.mass(u, v) == (Fraction(1, 6) if (u, v) in support else 0)
    with pytest.raises(InvalidInputError):
        avoidance_coupling(g, GroupSubset.from_elements(g, []), 2)


def test_coupling_general_mass(rng):
    for g in abelian_groups(6):
        members = [int(z) for z in np.flatnonzero(rng.random(g.order) < 0.5)] or [0]
        Z0 = GroupSubset.from_elements(g, members)
        P = avoidance_coupling(g, Z0, 3)
        expect = Fraction(1, g.order ** 2 * len(Z0))
        nz = P.weights[P.weights > 0]
        assert len(nz) == g.order ** 2 * len(Z0)
        assert all(Fraction(int(w), P.total) == expect for w in nz)


def test_distribution_validation():
    with pytest.raises(InvalidInputError):
        JointDistribution([[0, 0], [0, 0]])
    with pytest.raises(InvalidInputError):
        JointDistribution([[1, -1], [1, 1]])
    with pytest.raises(InvalidInputError):
        JointDistribution.from_masses([[0.5, 0.25], [0.0, 0.0]])
    P = JointDistribution.from_masses([[Fraction(1, 3), Fraction(1, 6)], [0.25, 0.25]])
    assert P.marginal(0) == [Fraction(1, 2), Fraction(1, 2)]
    assert P.marginal(1) == [Fraction(7, 12), Fraction(5, 12)]


def test_rho_examples():
    prod = JointDistribution(np.outer([1, 2, 3], [1, 1, 4]))
    assert maximal_correlation_pair(prod).value <= 1e-9
    diag = JointDistribution(np.eye(2, dtype=np.int64))
    w = maximal_correlation_pair(diag)
    assert abs(w.value - 1) <= 1e-9
    assert np.ptp(w.lam) > 0 and np.ptp(w.sigma) > 0
    g, Z0 = Z([4], [0, 2])
    assert abs(rho(avoidance_coupling(g, Z0, 2)).value - 1) <= 1e-9
    assert is_rho_one(avoidance_coupling(g, Z0, 2))


def test_rho_multi():
    cube = JointDistribution(np.ones((2, 3, 2), dtype=np.int64))
    assert rho(cube).value <= 1e-9
    g, Z0 = Z([2], [0])
    assert abs(rho(avoidance_coupling(g, Z0, 3)).value - 1) <= 1e-9
    P = JointDistribution([[3, 1], [1, 3]])
    assert rho(P).value == maximal_correlation_pair(P).value
    with pytest.raises(ShapeError):
        rho(JointDistribution([1, 2]))


def test_witness_is_unit_variance_and_achieves_value(rng):
    for _ in range(20):
        P = JointDistribution(rng.integers(0, 5, size=(4, 3)) + (rng.random((4, 3)) < 0.5))
        w = maximal_correlation_pair(P)
        if w.value < 1e-6:
            continue
        m = P.masses()
        pu, pv = m.sum(axis=1), m.sum(axis=0)
        assert abs(pu @ w.lam) < 1e-9 and abs(pv @ w.sigma) < 1e-9
        assert abs(pu @ w.lam ** 2 - 1) < 1e-9 and abs(pv @ w.sigma ** 2 - 1) < 1e-9
        assert abs(w.lam @ m @ w.sigma - w.value) < 1e-9


def test_top_singular_is_one(rng):
    for _ in range(20):
        P = JointDistribution(rng.integers(1, 9, size=(3, 5)))
        s, u, v, ru, rv = top_singular_pair(P)
        assert abs(s - 1) <= 1e-12
        assert np.allclose(np.abs(u), ru, atol=1e-12) and np.allclose(np.abs(v), rv, atol=1e-12)


def test_is_rho_one_examples():
    v = is_rho_one(JointDistribution(np.eye(2, dtype=np.int64)))
    assert v.rho_one and v.components == (((0,), (0,)), ((1,), (1,)))
    assert not is_rho_one(JointDistribution(np.ones((2, 2), dtype=np.int64)))


def test_is_rho_one_labels_agree_on_support(rng):
    for _ in range(30):
        w = rng.integers(0, 3, size=(4, 4)) * (rng.random((4, 4)) < 0.4)
        if w.sum() == 0:
            continue
        P = JointDistribution(w)
        v = is_rho_one(P)
        spectral = maximal_correlation_pair(P).value
        assert v.rho_one == (abs(1 - spectral) <= 1e-9)
        for a, b in zip(*np.nonzero(w)):
            assert v.lam[a] == v.sigma[b]


def test_coupling_rho_one_iff_coset():
    for g in abelian_groups(6):
        for bits in range(1, 1 << g.order):
            Z0 = GroupSubset(g, bits)
            P = avoidance_coupling(g, Z0, 2)
            assert bool(is_rho_one(P)) == is_in_strict_coset(g, Z0).in_strict_coset


def test_translation_invariance(rng):
    for g in abelian_groups(8):
        members = [int(z) for z in np.flatnonzero(rng.random(g.order) < 0.5)] or [0]
        Z0 = GroupSubset.from_elements(g, members)
        base = rho(avoidance_coupling(g, Z0, 2)).value
        for t in range(g.order):
            shifted = Z0.translate(g.neg(t))
            assert abs(rho(avoidance_coupling(g, shifted, 2)).value - base) <= 1e-9


def test_conditional_pair():
    P = JointDistribution([[1, 2], [3, 4]])
    assert conditional_pair(P) == P
    g, Z0 = Z([3], [0, 1])
    P3 = avoidance_coupling(g, Z0, 3)
    assert conditional_pair(P3, (1,)) == avoidance_coupling(g, GroupSubset.from_elements(g, [2, 0]), 2)
    with pytest.raises(ShapeError):
        conditional_pair(P3)
    Q = JointDistribution(np.stack([np.ones((2, 2), dtype=np.int64), np.zeros((2, 2), dtype=np.int64)], axis=2))
    with pytest.raises(InvalidConditioningError):
        conditional_pair(Q, (1,))


def test_conditioning_preserves_rho_below_one():
    for g in abelian_groups(6):
        for bits in range(1, 1 << g.order):
            Z0 = GroupSubset(g, bits)
            if is_in_strict_coset(g, Z0).in_strict_coset:
                continue
            P = avoidance_coupling(g, Z0, 3)
            for x in range(g.order):
                assert not is_rho_one(conditional_pair(P, (x,)))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 5), st.data())
def test_ace_agrees_with_spectral(a, b, data):
    w = np.array(data.draw(st.lists(st.integers(1, 20), min_size=a * b, max_size=a * b))).reshape(a, b)
    P = JointDistribution(w)
    assert abs(ace_correlation(P) - maximal_correlation_pair(P).value) <= 1e-6
