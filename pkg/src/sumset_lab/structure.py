"""Structure extraction: low-dimensional cylinders approximating sumset-avoiding sets.

The pipeline regularises all sets on a common coordinate set ``I``, keeps
for each set the fibers over ``I`` that are pseudorandom and of density
strictly above ``eps/2``, and reports the exact error masses together with
whether the kept fibers' sumset avoids ``Z0^I``.  The pseudorandomness
parameters ``r`` and ``beta`` are supplied by the caller, so the avoidance
conclusion is checked, never assumed.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import setfile
from ._rational import as_fraction, format_fraction
from .counting import count_tuples_into, empirical_count_ratio, tuple_space_size
from .errors import InvalidInputError
from .groups import FiniteAbelianGroup, GroupSubset
from .regularity import DecompositionResult, RegularityParams, decompose, scan_fibers
from .tensor_sets import (
    TensorSet,
    _check_group_family,
    avoids,
    cylinder,
    density,
    index_digits,
    normalize_coords,
    restrict,
)

__all__ = [
    "StructureParams",
    "StructureCertificate",
    "VerificationReport",
    "ContradictionReplay",
    "extract_structure",
    "verify_certificate",
    "empirical_count_ratio",
    "replay_contradiction",
]


@dataclass(frozen=True)
class StructureParams:
    eps: Fraction
    r: int
    beta: Fraction
    alpha: Fraction

    def __init__(self, eps, r: int, beta, alpha=None):
        eps = as_fraction(eps)
        if not 0 < eps <= 1:
            raise InvalidInputError(f"eps must lie in (0, 1], got {eps}")
        alpha = eps / 2 if alpha is None else as_fraction(alpha)
        if alpha <= 0:
            raise InvalidInputError("alpha must be positive")
        # validates r and beta
        RegularityParams(r, beta, alpha)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "beta", as_fraction(beta))
        object.__setattr__(self, "alpha", alpha)

    def regularity(self) -> RegularityParams:
        return RegularityParams(self.r, self.beta, self.alpha)

    def to_json(self) -> dict:
        return {
            "eps": format_fraction(self.eps),
            "r": self.r,
            "beta": format_fraction(self.beta),
            "alpha": format_fraction(self.alpha),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StructureParams":
        return cls(Fraction(obj["eps"]), int(obj["r"]), Fraction(obj["beta"]), Fraction(obj["alpha"]))


@dataclass(frozen=True)
class StructureCertificate:
    coords: tuple[int, ...]
    primes: tuple[TensorSet, ...]
    error_masses: tuple[Fraction, ...]
    avoidance_on_I: bool
    sparse_branch: bool
    params: StructureParams
    decomposition: DecompositionResult | None = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {
            "I": list(self.coords),
            "primes": [setfile.dumps(E) for E in self.primes],
            "error_masses": [format_fraction(m) for m in self.error_masses],
            "avoidance_on_I": self.avoidance_on_I,
            "sparse_branch": self.sparse_branch,
            "params": self.params.to_json(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "StructureCertificate":
        return cls(
            tuple(int(i) for i in obj["I"]),
            tuple(setfile.loads(s) for s in obj["primes"]),
            tuple(Fraction(m) for m in obj["error_masses"]),
            bool(obj["avoidance_on_I"]),
            bool(obj["sparse_branch"]),
            StructureParams.from_json(obj["params"]),
        )

    @classmethod
    def loads(cls, text: str) -> "StructureCertificate":
        return cls.from_json(json.loads(text))


def _error_mass(E: TensorSet, prime: TensorSet, coords) -> Fraction:
    return density(E - cylinder(prime, coords, E.n))


def extract_structure(
    g: FiniteAbelianGroup,
    Z0: GroupSubset,
    sets: Sequence[TensorSet],
    params: StructureParams,
) -> StructureCertificate:
    """Produce ``(I, E'_1..E'_d)`` with exact error masses and the avoidance verdict on ``I``.

    If some set has density at most ``eps`` the sparse branch applies: the
    first such set gets ``E' = ∅`` and the others get all of ``G^I`` with
    ``I = {1}``.
    """
    if len(Z0) == 0:
        raise InvalidInputError("Z0 must be non-empty")
    n = _check_group_family(g, sets)
    G = g.order
    sparse = [j for j, E in enumerate(sets) if density(E) <= params.eps]
    if sparse:
        j0 = sparse[0]
        coords = (1,)
        primes = tuple(TensorSet.empty(G, 1) if j == j0 else TensorSet.full(G, 1) for j in range(len(sets)))
        masses = tuple(_error_mass(E, P, coords) for E, P in zip(sets, primes))
        return StructureCertificate(coords, primes, masses, avoids(g, primes, Z0), True, params)

    dec = decompose(sets, params.regularity())
    coords = dec.coords
    axes = tuple(c - 1 for c in coords)
    primes = []
    for E in sets:
        scan = scan_fibers(E.cube, axes, params.r, params.beta)
        # strict > eps/2: counts / fiber_size > eps/2
        keep = scan.counts * 2 * params.eps.denominator > params.eps.numerator * scan.fiber_size
        for y in scan.witnesses:
            keep[y] = False
        primes.append(TensorSet(G, len(coords), keep))
    primes = tuple(primes)
    masses = tuple(_error_mass(E, P, coords) for E, P in zip(sets, primes))
    return StructureCertificate(coords, primes, masses, avoids(g, primes, Z0), False, params, dec)


@dataclass(frozen=True)
class VerificationReport:
    error_masses: tuple[Fraction, ...]
    error_ok: tuple[bool, ...]
    avoidance_ok: bool
    nonempty_I: bool
    consistent: bool

    @property
    def passed(self) -> bool:
        return all(self.error_ok) and self.avoidance_ok and self.nonempty_I

    def lines(self) -> list[str]:
        out = [f"error mass set {j}: {format_fraction(m)} {'ok' if ok else 'FAIL'}"
               for j, (m, ok) in enumerate(zip(self.error_masses, self.error_ok))]
        out.append(f"avoidance on I: {'ok' if self.avoidance_ok else 'FAIL'}")
        out.append(f"certificate fields consistent: {'yes' if self.consistent else 'no'}")
        out.append("PASS" if self.passed else "FAIL")
        return out


def verify_certificate(
    g: FiniteAbelianGroup,
    Z0: GroupSubset,
    sets: Sequence[TensorSet],
    cert: StructureCertificate,
    eps=None,
) -> VerificationReport:
    """Recompute every conclusion of a certificate from the raw sets."""
    n = _check_group_family(g, sets)
    eps = cert.params.eps if eps is None else as_fraction(eps)
    coords = normalize_coords(cert.coords, n)
    if len(cert.primes) != len(sets):
        raise InvalidInputError("certificate has the wrong number of sets")
    masses = tuple(_error_mass(E, P, coords) for E, P in zip(sets, cert.primes))
    error_ok = tuple(m <= eps for m in masses)
    avoid = avoids(g, list(cert.primes), Z0)
    consistent = masses == tuple(cert.error_masses) and avoid == cert.avoidance_on_I
    return VerificationReport(masses, error_ok, avoid, len(coords) > 0, consistent)


@dataclass(frozen=True)
class ContradictionReplay:
    """Kept fibers whose projected sum hits ``Z0^I``, with their joint count ratio."""

    assignments: tuple[tuple[int, ...], ...]
    ratio: Fraction
    globally_avoids: bool


def replay_contradiction(
    g: FiniteAbelianGroup,
    Z0: GroupSubset,
    sets: Sequence[TensorSet],
    cert: StructureCertificate,
) -> ContradictionReplay | None:
    """Locate kept fibers ``x'_j in E'_j`` with ``sum x'_j in Z0^I``.

    Returns ``None`` when the kept fibers avoid ``Z0^I``.  Otherwise the
    count ratio of the fibers over the complementary coordinates is
    reported.  A non-zero ratio exhibits tuples of the original sets summing
    into ``Z0^n``; a zero ratio while the inputs avoid globally means the
    supplied ``(r, beta)`` were too weak for those dense pseudorandom fibers.
    """
    n = _check_group_family(g, sets)
    coords = normalize_coords(cert.coords, n)
    k = len(coords)
    zmask = Z0.mask()
    members = [index_digits(g.order, k, P.indices()) for P in cert.primes]
    found = None
    for combo in itertools.product(*members):
        total = np.zeros(k, dtype=np.int64)
        for x in combo:
            total = g.add_table[total, x]
        if zmask[total].all():
            found = tuple(tuple(int(v) for v in x) for x in combo)
            break
    if found is None:
        return None
    if k == n:
        ratio = Fraction(1)
    else:
        fibers = [restrict(E, coords, y) for E, y in zip(sets, found)]
        ratio = empirical_count_ratio(g, Z0, fibers)
    return ContradictionReplay(found, ratio, avoids(g, list(sets), Z0))


def count_ratio_report(g, Z0, sets) -> dict:
    n = _check_group_family(g, sets)
    count = count_tuples_into(g, sets, Z0)
    space = tuple_space_size(g, Z0, n, len(sets))
    return {"count": count, "space": space, "ratio": format_fraction(Fraction(count, space))}
