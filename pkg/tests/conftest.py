import itertools

import numpy as np
import pytest

from sumset_lab import TensorSet, make_group

# every multiset of cyclic orders >= 2 with product <= bound
def abelian_groups(bound):
    out = []

    def rec(prefix, start, prod):
        if prefix:
            out.append(tuple(prefix))
        for m in range(start, bound + 1):
            if prod * m <= bound:
                rec(prefix + [m], m, prod * m)

    rec([], 2, 1)
    return [make_group(o) for o in out]


def decode(orders, n, index):
    """Point index of G^n -> list of n digit tuples, pure python."""
    G = 1
    for m in orders:
        G *= m
    coords = []
    for _ in range(n):
        index, a = divmod(index, G)
        digits = []
        for m in reversed(orders):
            a, v = divmod(a, m)
            digits.append(v)
        coords.append(tuple(reversed(digits)))
    return list(reversed(coords))


def brute_count(g, sets, z0_members):
    """Enumerate prod E_i and count tuples whose coordinatewise sum lies in Z0^n."""
    orders = g.orders
    n = sets[0].n
    z0 = {tuple(g.decode(z)) for z in z0_members}
    decoded = [[decode(orders, n, int(i)) for i in E.indices()] for E in sets]
    count = 0
    for combo in itertools.product(*decoded):
        ok = True
        for c in range(n):
            s = tuple(sum(pt[c][f] for pt in combo) % orders[f] for f in range(len(orders)))
            if s not in z0:
                ok = False
                break
        count += ok
    return count


def random_set(rng, X, n, p=None):
    p = rng.random() if p is None else p
    return TensorSet(X, n, rng.random(X ** n) < p)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
