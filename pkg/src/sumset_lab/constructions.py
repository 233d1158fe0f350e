"""Generators for the explicit example families.

Small instances are returned as materialised TensorSets.  Families whose
interesting regime needs large ``n`` are returned as :class:`ImplicitSet`
objects carrying a vectorised membership predicate and an exact
closed-form density; they materialise on demand when ``|X|^n`` is small.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from sympy import isprime

from ._rational import as_fraction
from .errors import InvalidConstructionError, InvariantViolation, ShapeError
from .groups import FiniteAbelianGroup, GroupSubset, QuotientMap, is_subgroup, quotient
from .tensor_sets import CombinerTable, TensorSet, all_points, avoids

MATERIALIZE_LIMIT = 1 << 20


@dataclass(frozen=True)
class ImplicitSet:
    """A subset of ``X^n`` described by a predicate and its exact density."""

    alphabet_size: int
    n: int
    kind: str
    params: dict
    predicate: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    density: Fraction

    def contains(self, point: Sequence[int]) -> bool:
        return bool(self.predicate(np.asarray([point], dtype=np.int64))[0])

    def materialize(self, limit: int = MATERIALIZE_LIMIT) -> TensorSet:
        if self.alphabet_size ** self.n > limit:
            raise ShapeError(f"{self.alphabet_size}^{self.n} points exceed the materialisation limit {limit}")
        return TensorSet.from_predicate(self.alphabet_size, self.n, self.predicate)


def _require_strict_subgroup(g: FiniteAbelianGroup, H: GroupSubset):
    if H.group != g or not is_subgroup(g, H):
        raise InvalidConstructionError("H is not a subgroup of G")
    if H.is_full():
        raise InvalidConstructionError("H must be a strict subgroup (H != G)")


def _project_points(qm: QuotientMap, n: int) -> np.ndarray:
    """Index in ``K^n`` of the image of every point of ``G^n``."""
    G, K = qm.group.order, qm.image.order
    digits = all_points(G, n)
    img = qm.table[digits]
    powers = K ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return img @ powers


def coset_counterexample(
    g: FiniteAbelianGroup,
    H: GroupSubset,
    x: int,
    E_K: TensorSet,
    F_K: TensorSet,
    Z0: GroupSubset | None = None,
) -> tuple[TensorSet, TensorSet]:
    """Full preimages of ``E_K, F_K ⊂ K^n`` under ``G^n -> (G/H)^n``.

    Requires ``Z0 ⊆ H + {x}`` (``Z0`` defaults to the whole coset) and that
    no pair of ``E_K x F_K`` sums to ``(κ, ..., κ)`` with ``κ = π(x)``.  The
    preimages then avoid ``Z0^n``; this is re-checked before returning.
    """
    _require_strict_subgroup(g, H)
    x = g.check(x)
    coset = H.translate(x)
    if Z0 is None:
        Z0 = coset
    if len(Z0) == 0:
        raise InvalidConstructionError("Z0 must be non-empty")
    if not Z0 <= coset:
        raise InvalidConstructionError("Z0 is not contained in H + {x}")
    qm = quotient(g, H)
    K = qm.image
    if E_K.alphabet_size != K.order or F_K.alphabet_size != K.order or E_K.n != F_K.n:
        raise InvalidConstructionError(f"E_K and F_K must be subsets of the same power of {K!r}")
    n = E_K.n
    kappa = GroupSubset.from_elements(K, [qm(x)])
    if not avoids(K, [E_K, F_K], kappa):
        raise InvalidConstructionError("E_K + F_K meets {kappa}^n")
    proj = _project_points(qm, n)
    E = TensorSet(g.order, n, E_K.bits[proj])
    F = TensorSet(g.order, n, F_K.bits[proj])
    if not avoids(g, [E, F], Z0):
        raise InvariantViolation("coset preimages do not avoid Z0^n")  # pragma: no cover
    return E, F


def level_set_family(
    g: FiniteAbelianGroup,
    H: GroupSubset,
    x: int,
    levels: Sequence[int],
    n: int,
) -> list[ImplicitSet]:
    """Preimages of the level sets ``{y in K^n : y_1 + ... + y_n = a_i}``.

    Needs ``a_1 + ... + a_d != n κ`` in ``K = G/H`` where ``κ = π(x)``.
    Each set has density exactly ``1/|K|``.
    """
    _require_strict_subgroup(g, H)
    qm = quotient(g, H)
    K = qm.image
    kappa = qm(g.check(x))
    levels = [K.check(a) for a in levels]
    total = 0
    for a in levels:
        total = K.add(total, a)
    n_kappa = 0
    for _ in range(n):
        n_kappa = K.add(n_kappa, kappa)
    if total == n_kappa:
        raise InvalidConstructionError(f"levels sum to n*kappa = {n_kappa} in K")
    table = qm.table
    add = K.add_table

    def make(a):
        def predicate(points, a=a):
            s = np.zeros(len(points), dtype=np.int64)
            for i in range(points.shape[1]):
                s = add[s, table[points[:, i]]]
            return s == a

        return ImplicitSet(g.order, n, "levelSet", {"level": a, "kappa": kappa, "quotient_orders": list(K.orders)},
                           predicate, Fraction(1, K.order))

    return [make(a) for a in levels]


def tribes(
    A: Iterable[int],
    B: Iterable[int],
    r: int,
    s: int,
    x_size: int,
    y_size: int,
    f: CombinerTable | None = None,
    Z0: Iterable[int] | None = None,
) -> tuple[ImplicitSet, ImplicitSet]:
    """AND-of-ORs set over ``X^n`` and OR-of-ANDs set over ``Y^n``, ``n = r s``.

    Block ``t`` (1-based) covers coordinates ``r(t-1)+1 .. rt``.  ``E`` asks
    every block to contain a coordinate in ``A``; ``F`` asks some block to
    lie entirely in ``B``.  When ``f`` and ``Z0`` are given the hypothesis
    ``f(A x B) ∩ Z0 = ∅`` is checked.
    """
    A, B = sorted(set(A)), sorted(set(B))
    if r < 1 or s < 1:
        raise InvalidConstructionError("r and s must be positive")
    if any(not 0 <= v < x_size for v in A) or any(not 0 <= v < y_size for v in B):
        raise InvalidConstructionError("A or B outside its alphabet")
    a, b = Fraction(len(A), x_size), Fraction(len(B), y_size)
    if a + b <= 1:
        raise InvalidConstructionError(f"|A|/|X| + |B|/|Y| = {a + b} must exceed 1")
    if (f is None) != (Z0 is None):
        raise InvalidConstructionError("give both f and Z0, or neither")
    if f is not None:
        if f.x_size != x_size or f.y_size != y_size:
            raise InvalidConstructionError("combiner does not match the alphabets")
        Z0 = set(Z0)
        if any(f(u, v) in Z0 for u in A for v in B):
            raise InvalidConstructionError("f(A x B) meets Z0")
    n = r * s
    in_a = np.zeros(x_size, dtype=bool)
    in_a[A] = True
    in_b = np.zeros(y_size, dtype=bool)
    in_b[B] = True

    def e_pred(points):
        return in_a[points].reshape(len(points), s, r).any(axis=2).all(axis=1)

    def f_pred(points):
        return in_b[points].reshape(len(points), s, r).all(axis=2).any(axis=1)

    params = {"A": A, "B": B, "r": r, "s": s}
    E = ImplicitSet(x_size, n, "tribes", params, e_pred, (1 - (1 - a) ** r) ** s)
    F = ImplicitSet(y_size, n, "tribes", params, f_pred, 1 - (1 - b ** r) ** s)
    return E, F


def tribes_parameters(a, b, eps) -> tuple[int, int]:
    """Block width ``r`` and block count ``s`` making both tribes sets eps-dense.

    ``r`` is the least integer with ``((1-a)/b)^r < eps`` and
    ``s = ceil(b^-r ln(1/eps))``.
    """
    a, b, eps = as_fraction(a), as_fraction(b), as_fraction(eps)
    if not (0 < a <= 1 and 0 < b <= 1):
        raise InvalidConstructionError("a and b must lie in (0, 1]")
    if a + b <= 1:
        raise InvalidConstructionError(f"a + b = {a + b} must exceed 1")
    if not 0 < eps < 1:
        raise InvalidConstructionError("eps must lie in (0, 1)")
    ratio = (1 - a) / b
    r = 1
    while ratio ** r >= eps:
        r += 1
    s = math.ceil(float(1 / b) ** r * math.log(1 / float(eps)))
    return r, max(s, 1)


def optimality_example(p: int, k: int, n: int) -> tuple[TensorSet, TensorSet, GroupSubset]:
    """``E = (Z_p^k minus {0,1}^k) x Z_p^{n-k}``, ``F = {0}^k x Z_p^{n-k}``, ``Z0 = {0,1}``."""
    if p < 3 or not isprime(p):
        raise InvalidConstructionError(f"p must be a prime >= 3, got {p}")
    if not 1 <= k <= n:
        raise ShapeError(f"need 1 <= k <= n, got k={k}, n={n}")
    from .groups import make_group

    g = make_group([p])
    head_binary = lambda pts: (pts[:, :k] <= 1).all(axis=1)  # noqa: E731
    E = TensorSet.from_predicate(p, n, lambda pts: ~head_binary(pts))
    F = TensorSet.from_predicate(p, n, lambda pts: (pts[:, :k] == 0).all(axis=1))
    Z0 = GroupSubset.from_elements(g, [0, 1])
    if not avoids(g, [E, F], Z0):
        raise InvariantViolation("optimality example fails to avoid {0,1}^n")  # pragma: no cover
    return E, F, Z0


def optimality_densities(p: int, k: int) -> tuple[Fraction, Fraction]:
    return 1 - Fraction(2, p) ** k, Fraction(1, p) ** k


def optimality_min_coords(p: int, k: int, eps) -> int:
    """Least ``|I|`` compatible with error mass at most eps on the optimality example.

    Any valid structure has ``E' != Z_p^I``, forcing an error mass of at
    least ``p^-|I| - (2/p)^k`` on ``E``.
    """
    eps = as_fraction(eps)
    floor = Fraction(2, p) ** k
    size = 0
    while Fraction(1, p ** size) - floor > eps:
        size += 1
    return max(size, 1)

