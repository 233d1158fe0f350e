import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sumset_lab import (
    CombinerTable,
    GroupSubset,
    TensorSet,
    avoids,
    cylinder,
    density,
    generic_avoids,
    generic_image,
    make_group,
    restrict,
    sumset,
)
from sumset_lab import setfile
from sumset_lab.errors import InvalidInputError, ShapeError

from conftest import random_set


def prefix_zero(X, n):
    return TensorSet.from_predicate(X, n, lambda p: p[:, 0] == 0)


def test_density_examples():
    assert density(TensorSet.full(3, 2)) == 1
    assert density(TensorSet.empty(3, 2)) == 0
    E = prefix_zero(2, 3)
    # enumeration: points with x_1 = 0
    members = [p for p in itertools.product(range(2), repeat=3) if p[0] == 0]
    assert E.cardinality == len(members) == 4
    assert density(E) == Fraction(1, 2)


def test_index_width_cap():
    with pytest.raises(ShapeError):
        TensorSet.empty(2, 31)
    with pytest.raises(ShapeError):
        TensorSet.empty(3, 0)


def test_restrict_examples():
    r = restrict(TensorSet.full(2, 3), [1, 2], (0, 1))
    assert r == TensorSet.full(2, 1)
    assert restrict(prefix_zero(2, 2), [1], (1,)).is_empty()
    r = restrict(prefix_zero(2, 2), [2], (0,))
    assert r == TensorSet.from_indices(2, 1, [0])
    assert density(r) == Fraction(1, 2)
    E = prefix_zero(2, 2)
    assert restrict(E, [], ()) is E


def test_restrict_errors():
    E = TensorSet.full(3, 2)
    with pytest.raises(InvalidInputError):
        restrict(E, [3], (0,))
    with pytest.raises(InvalidInputError):
        restrict(E, [1], (3,))
    with pytest.raises(InvalidInputError):
        restrict(E, [1, 1], (0, 0))


def test_restrict_matches_pointwise_definition(rng):
    for _ in range(20):
        E = random_set(rng, 3, 4)
        I = (2, 4)
        for y in itertools.product(range(3), repeat=2):
            fiber = restrict(E, I, y)
            for rest in itertools.product(range(3), repeat=2):
                point = (rest[0], y[0], rest[1], y[1])
                assert (rest in fiber) == (point in E)


def test_cylinder_examples():
    C = cylinder(TensorSet.from_indices(3, 1, [2]), [1], 2)
    assert C == TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 2)
    assert density(C) == Fraction(1, 3)
    assert cylinder(TensorSet.empty(3, 1), [2], 3).is_empty()
    assert cylinder(TensorSet.full(3, 2), [1, 3], 3) == TensorSet.full(3, 3)
    with pytest.raises(ShapeError):
        cylinder(TensorSet.full(3, 2), [1], 3)


def test_cylinder_restrict_roundtrip(rng):
    for _ in range(30):
        Ep = random_set(rng, 3, 2)
        I = tuple(sorted(rng.choice(np.arange(1, 5), size=2, replace=False).tolist()))
        C = cylinder(Ep, I, 4)
        assert density(C) == density(Ep)
        for y in Ep.points():
            assert restrict(C, I, tuple(y)) == TensorSet.full(3, 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 3), st.integers(1, 4), st.data())
def test_total_probability(X, n, data):
    bits = data.draw(st.lists(st.booleans(), min_size=X ** n, max_size=X ** n))
    E = TensorSet(X, n, bits)
    k = data.draw(st.integers(0, n - 1))
    I = sorted(data.draw(st.permutations(range(1, n + 1)))[:k])
    avg = sum((density(restrict(E, I, y)) for y in itertools.product(range(X), repeat=k)), Fraction(0))
    assert avg / X ** k == density(E)


def brute_sumset(g, sets):
    n = sets[0].n
    pts = [[tuple(p) for p in E.points()] for E in sets]
    out = set()
    for combo in itertools.product(*pts):
        s = tuple(0 for _ in range(n))
        for p in combo:
            s = tuple(g.add(a, b) for a, b in zip(s, p))
        out.add(s)
    return TensorSet.from_points(g.order, out, n)


def test_sumset_examples():
    g = make_group([3])
    zero = TensorSet.from_indices(3, 2, [0])
    assert sumset(g, [zero, zero]) == zero
    assert sumset(g, [TensorSet.from_indices(3, 1, [0]), TensorSet.from_indices(3, 1, [1])]) == TensorSet.from_indices(3, 1, [1])
    E = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 2)
    F = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 0)
    assert sumset(g, [E, F]) == brute_sumset(g, [E, F]) == E


def test_sumset_against_enumeration(rng):
    for orders in ([2, 2], [4], [2, 3]):
        g = make_group(orders)
        for _ in range(5):
            sets = [random_set(rng, g.order, 2, 0.15) for _ in range(2)]
            assert sumset(g, sets) == brute_sumset(g, sets)


def test_sumset_symmetric_and_monotone(rng):
    g = make_group([5])
    for _ in range(10):
        E, F = random_set(rng, 5, 2, 0.2), random_set(rng, 5, 2, 0.2)
        assert sumset(g, [E, F]) == sumset(g, [F, E])
        sub = E & random_set(rng, 5, 2, 0.5)
        assert sumset(g, [sub, F]) <= sumset(g, [E, F])


def test_sumset_shape_error():
    g = make_group([3])
    with pytest.raises(ShapeError):
        sumset(g, [TensorSet.full(3, 2), TensorSet.full(3, 3)])
    with pytest.raises(ShapeError):
        sumset(g, [TensorSet.full(2, 2)])


def test_avoids_examples():
    g = make_group([3])
    Z0 = GroupSubset.from_elements(g, [0, 1])
    E = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 2)
    F = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 0)
    assert avoids(g, [E, F], Z0)
    assert not avoids(g, [TensorSet.full(3, 2)] * 2, GroupSubset.from_elements(g, [1]))
    assert avoids(g, [TensorSet.empty(3, 2), TensorSet.full(3, 2)], Z0)


def test_avoids_matches_sumset(rng):
    g = make_group([2, 2])
    Z0 = GroupSubset.from_elements(g, [0, 3])
    for _ in range(20):
        sets = [random_set(rng, 4, 2, 0.2) for _ in range(2)]
        S = sumset(g, sets)
        from sumset_lab.tensor_sets import zero_power_mask

        hit = bool((S.bits & zero_power_mask(g, Z0, 2)).any())
        assert avoids(g, sets, Z0) == (not hit)


def test_generic_avoids_addition_specialises():
    g = make_group([3])
    f = CombinerTable.addition(g)
    E = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 2)
    F = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 0)
    assert generic_avoids(f, E, F, [0, 1]) == avoids(g, [E, F], GroupSubset.from_elements(g, [0, 1]))
    assert generic_image(f, E, F) == sumset(g, [E, F])


def test_generic_avoids_min_table():
    # 0-indexed min on {0,1,2,3}; A = B = {0,1,2}
    f = CombinerTable.minimum(4)
    A = TensorSet.from_indices(4, 1, [0, 1, 2])
    for n in (1, 2):
        E = F = TensorSet.from_predicate(4, n, lambda p: (p <= 2).all(axis=1))
        # top symbol alone: min(A x B) never reaches 3
        assert generic_avoids(f, E, F, [3])
        # top half {2, 3}: min(2, 2) = 2 lands in it
        assert not generic_avoids(f, E, F, [2, 3])
    assert generic_avoids(f, TensorSet.empty(4, 2), TensorSet.full(4, 2), [0])
    del A


def test_generic_avoids_brute_force(rng):
    f = CombinerTable(rng.integers(0, 3, size=(3, 2)), 3)
    for _ in range(30):
        E, F = random_set(rng, 3, 2, 0.3), random_set(rng, 2, 2, 0.3)
        Z0 = [0]
        brute = not any(all(f(x[i], y[i]) in Z0 for i in range(2)) for x in E.points() for y in F.points())
        assert generic_avoids(f, E, F, Z0) == brute
        assert generic_avoids(f, E, F, Z0) == (not (generic_image(f, E, F).bits & TensorSet.from_predicate(3, 2, lambda p: (p == 0).all(axis=1)).bits).any())


@pytest.mark.parametrize("fmt", setfile.FORMATS)
def test_setfile_roundtrip(rng, fmt):
    for X, n in ((2, 1), (3, 3), (5, 2), (2, 10)):
        E = random_set(rng, X, n)
        text = setfile.dumps(E, fmt)
        assert setfile.loads(text) == E
        assert setfile.dumps(setfile.loads(text), fmt) == text


def test_setfile_hex_layout():
    E = TensorSet.from_indices(3, 2, [0, 8])
    assert setfile.dumps(E, "hexbits") == "alphabet 3\nn 2\nhexbits\n0101\n"


@pytest.mark.parametrize("text", [
    "alphabet 3\nn 2\nindices\n9\n",
    "alphabet 3\nn 2\nhexbits\nff03\n",
    "alphabet 3\nn 2\nhexbits\nzz\n",
    "alphabet x\nn 2\nindices\n",
    "alphabet 3\nn 2\nbogus\n",
    "alphabet 3\n",
])
def test_setfile_rejects(text):
    with pytest.raises(InvalidInputError):
        setfile.loads(text)
