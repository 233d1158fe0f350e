import json
from fractions import Fraction

import numpy as np
import pytest

from sumset_lab import GroupSubset, TensorSet, avoids, cylinder, make_group
from sumset_lab.structure import (
    StructureCertificate,
    StructureParams,
    empirical_count_ratio,
    extract_structure,
    replay_contradiction,
    verify_certificate,
)
from sumset_lab.errors import InvalidInputError
from sumset_lab.regularity import is_pseudorandom

from conftest import random_set


def worked_example():
    g = make_group([3])
    Z0 = GroupSubset.from_elements(g, [0, 1])
    E = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 2)
    F = TensorSet.from_predicate(3, 2, lambda p: p[:, 0] == 0)
    return g, Z0, [E, F], StructureParams(0.1, 1, 0.1)


def test_worked_example():
    g, Z0, sets, params = worked_example()
    cert = extract_structure(g, Z0, sets, params)
    assert cert.coords == (1,)
    assert cert.primes == (TensorSet.from_indices(3, 1, [2]), TensorSet.from_indices(3, 1, [0]))
    assert cert.error_masses == (0, 0)
    assert cert.avoidance_on_I and not cert.sparse_branch
    report = verify_certificate(g, Z0, sets, cert)
    assert report.passed and report.consistent
    assert report.lines()[-1] == "PASS"


def test_params():
    p = StructureParams(0.1, 1, 0.1)
    assert p.alpha == Fraction(1, 20) and p.eps == Fraction(1, 10)
    assert StructureParams.from_json(p.to_json()) == p
    with pytest.raises(InvalidInputError):
        StructureParams(0, 1, 0.1)
    with pytest.raises(InvalidInputError):
        StructureParams(1.5, 1, 0.1)


def test_sparse_branch():
    g = make_group([3])
    Z0 = GroupSubset.from_elements(g, [0])
    sets = [TensorSet.full(3, 2), TensorSet.empty(3, 2), TensorSet.empty(3, 2)]
    cert = extract_structure(g, Z0, sets, StructureParams(0.1, 1, 0.1))
    assert cert.sparse_branch and cert.coords == (1,)
    assert cert.primes == (TensorSet.full(3, 1), TensorSet.empty(3, 1), TensorSet.full(3, 1))
    assert cert.error_masses == (0, 0, 0)
    assert cert.avoidance_on_I
    assert verify_certificate(g, Z0, sets, cert).passed


def test_sparse_branch_always_valid(rng):
    g = make_group([2, 2])
    Z0 = GroupSubset.from_elements(g, [1, 2])
    eps = Fraction(1, 4)
    for _ in range(20):
        sets = [random_set(rng, 4, 2, 0.15), random_set(rng, 4, 2)]
        cert = extract_structure(g, Z0, sets, StructureParams(eps, 1, 0.1))
        if cert.sparse_branch:
            rep = verify_certificate(g, Z0, sets, cert)
            assert rep.passed and rep.consistent


def test_tampered_certificate_fails():
    g, Z0, sets, params = worked_example()
    cert = extract_structure(g, Z0, sets, params)
    full = TensorSet.full(3, 1)
    bad = StructureCertificate(cert.coords, (full, full), cert.error_masses, True, False, params)
    rep = verify_certificate(g, Z0, sets, bad)
    assert not rep.avoidance_ok and not rep.passed and not rep.consistent
    assert rep.lines()[-1] == "FAIL"
    # error masses are recomputed, not trusted
    empty = TensorSet.empty(3, 1)
    bad = StructureCertificate(cert.coords, (empty, cert.primes[1]), (0, 0), True, False, params)
    rep = verify_certificate(g, Z0, sets, bad)
    assert rep.error_masses[0] == Fraction(1, 3) and not rep.error_ok[0] and not rep.consistent


def test_eps_one_passes_error_checks():
    g, Z0, sets, params = worked_example()
    empty = TensorSet.empty(3, 1)
    cert = StructureCertificate((1,), (empty, empty), (Fraction(1, 3), Fraction(1, 3)), True, False, params)
    rep = verify_certificate(g, Z0, sets, cert, eps=1)
    assert all(rep.error_ok) and rep.passed


def test_json_golden():
    g, Z0, sets, params = worked_example()
    cert = extract_structure(g, Z0, sets, params)
    golden = {
        "I": [1],
        "primes": ["alphabet 3\nn 1\nindices\n2\n", "alphabet 3\nn 1\nindices\n0\n"],
        "error_masses": ["0/1", "0/1"],
        "avoidance_on_I": True,
        "sparse_branch": False,
        "params": {"eps": "1/10", "r": 1, "beta": "1/10", "alpha": "1/20"},
    }
    assert json.loads(cert.dumps()) == golden
    back = StructureCertificate.loads(cert.dumps())
    assert back == cert
    assert back.dumps() == cert.dumps()


def planted(rng, g, Z0, n, d):
    """Cylinders over a random I0 whose bases avoid Z0 on I0."""
    G = g.order
    k = int(rng.integers(1, n + 1))
    I0 = tuple(sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist()))
    while True:
        bases = [random_set(rng, G, k, 0.5) for _ in range(d)]
        if all(not b.is_empty() for b in bases) and avoids(g, bases, Z0):
            break
        # thin the last base until the family avoids
        for _ in range(20):
            pts = bases[-1].indices()
            if len(pts) == 0:
                break
            bases[-1] = bases[-1] - TensorSet.from_indices(G, k, [pts[rng.integers(len(pts))]])
            if avoids(g, bases, Z0):
                break
        if all(not b.is_empty() for b in bases) and avoids(g, bases, Z0):
            break
    return [cylinder(b, I0, n) for b in bases]


def test_planted_instances(rng):
    for orders in ([2], [3], [4], [2, 2]):
        g = make_group(orders)
        Z0 = GroupSubset.from_elements(g, [1])
        for _ in range(4):
            sets = planted(rng, g, Z0, 3, 2)
            cert = extract_structure(g, Z0, sets, StructureParams(0.1, 3, 0.1))
            rep = verify_certificate(g, Z0, sets, cert)
            assert rep.consistent and rep.passed


def test_self_consistency(rng):
    g = make_group([3])
    Z0 = GroupSubset.from_elements(g, [0, 1])
    for _ in range(15):
        sets = [random_set(rng, 3, 3), random_set(rng, 3, 3)]
        cert = extract_structure(g, Z0, sets, StructureParams(0.2, 1, 0.2))
        assert verify_certificate(g, Z0, sets, cert).consistent


def test_empirical_ratio_examples(rng):
    g = make_group([3])
    Z0 = GroupSubset.from_elements(g, [0, 1])
    assert empirical_count_ratio(g, Z0, [TensorSet.full(3, 3)] * 2) == 1
    assert empirical_count_ratio(g, Z0, [TensorSet.full(3, 3), TensorSet.empty(3, 3)]) == 0
    found = 0
    for _ in range(200):
        E, F = random_set(rng, 3, 3, 0.6), random_set(rng, 3, 3, 0.6)
        if not (E.cardinality >= 14 and F.cardinality >= 14):
            continue
        if is_pseudorandom(E, 1, 0.2) and is_pseudorandom(F, 1, 0.2):
            found += 1
            assert empirical_count_ratio(g, Z0, [E, F]) > 0
    assert found > 0


def test_replay_locates_kept_fibers():
    g, Z0, sets, params = worked_example()
    cert = extract_structure(g, Z0, sets, params)
    assert replay_contradiction(g, Z0, sets, cert) is None
    # random dense sets that hit Z0: a forged certificate with full primes
    full = TensorSet.full(3, 1)
    forged = StructureCertificate((1,), (full, full), (0, 0), False, False, params)
    dense = [TensorSet.full(3, 2), TensorSet.full(3, 2)]
    rep = replay_contradiction(g, Z0, dense, forged)
    assert rep is not None and rep.ratio > 0 and not rep.globally_avoids
    # globally avoiding inputs with a forged certificate: the fibers witness nothing
    rep = replay_contradiction(g, Z0, sets, forged)
    assert rep.globally_avoids and rep.ratio == 0
