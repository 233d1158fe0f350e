"""Finite abelian groups given as direct products of cyclic groups.

Elements are dense indices ``0 .. |G|-1``.  An index is the mixed-radix
number whose digits are the cyclic components, the first factor being the
most significant digit.  Groups are never canonicalised: ``[2, 3]`` and
``[6]`` are different objects describing isomorphic groups.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidElementError,
    InvalidGroupError,
    InvalidInputError,
    InvalidSubgroupError,
)


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """The group Z_{m_1} x ... x Z_{m_t}.

    ``orders`` may be empty, which describes the trivial group; this only
    arises as the image of a full quotient.  Use :func:`make_group` for
    validated construction from user input.
    """

    orders: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        if any(m < 2 for m in self.orders):
            raise InvalidGroupError(f"cyclic factor orders must be >= 2, got {list(self.orders)}")

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        if not self.orders:
            return "FiniteAbelianGroup(trivial)"
        return "FiniteAbelianGroup(" + " x ".join(f"Z_{m}" for m in self.orders) + ")"

    @property
    def rank(self) -> int:
        return len(self.orders)

    @cached_property
    def _weights(self) -> tuple[int, ...]:
        w = []
        acc = 1
        for m in reversed(self.orders):
            w.append(acc)
            acc *= m
        return tuple(reversed(w))

    def check(self, a: int) -> int:
        if not isinstance(a, (int, np.integer)) or not 0 <= a < self.order:
            raise InvalidElementError(f"{a!r} is not an element index of {self!r}")
        return int(a)

    def encode(self, digits: Sequence[int]) -> int:
        if len(digits) != self.rank:
            raise InvalidElementError(f"expected {self.rank} digits, got {len(digits)}")
        idx = 0
        for g, m in zip(digits, self.orders):
            if not 0 <= g < m:
                raise InvalidElementError(f"digit {g} out of range for Z_{m}")
            idx = idx * m + int(g)
        return idx

    def decode(self, a: int) -> tuple[int, ...]:
        a = self.check(a)
        digits = []
        for m in reversed(self.orders):
            a, g = divmod(a, m)
            digits.append(g)
        return tuple(reversed(digits))

    @cached_property
    def digit_table(self) -> np.ndarray:
        """Array of shape ``(|G|, t)``; row ``a`` holds the digits of ``a``."""
        idx = np.arange(self.order)
        cols = [(idx // w) % m for w, m in zip(self._weights, self.orders)]
        if not cols:
            return np.zeros((1, 0), dtype=np.int64)
        return np.stack(cols, axis=1).astype(np.int64)

    def encode_digits(self, digits: np.ndarray) -> np.ndarray:
        """Vectorised inverse of :attr:`digit_table` along the last axis."""
        digits = np.asarray(digits, dtype=np.int64)
        return digits @ np.asarray(self._weights, dtype=np.int64) if self.rank else np.zeros(digits.shape[:-1], dtype=np.int64)

    @cached_property
    def add_table(self) -> np.ndarray:
        d = self.digit_table
        s = (d[:, None, :] + d[None, :, :]) % np.asarray(self.orders, dtype=np.int64)
        table = self.encode_digits(s)
        table.setflags(write=False)
        return table

    @cached_property
    def neg_table(self) -> np.ndarray:
        table = self.encode_digits((-self.digit_table) % np.asarray(self.orders, dtype=np.int64))
        table.setflags(write=False)
        return table

    def zero(self) -> int:
        return 0

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[self.check(a), self.check(b)])

    def neg(self, a: int) -> int:
        return int(self.neg_table[self.check(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def elements(self) -> range:
        return range(self.order)


def make_group(orders: Iterable[int]) -> FiniteAbelianGroup:
    """Build ``Z_{m_1} x ... x Z_{m_t}`` from a non-empty list of orders >= 2."""
    orders = list(orders)
    if not orders:
        raise InvalidGroupError("a group needs at least one cyclic factor")
    for m in orders:
        if int(m) != m or m < 2:
            raise InvalidGroupError(f"cyclic factor orders must be integers >= 2, got {orders}")
    return FiniteAbelianGroup(tuple(int(m) for m in orders))


def parse_group(text: str) -> FiniteAbelianGroup:
    """Parse ``"3"``, ``"2,2"`` or ``"2x3"`` into a group."""
    parts = [p for p in text.replace("x", ",").replace(" ", "").split(",") if p]
    try:
        return make_group(int(p) for p in parts)
    except ValueError as exc:
        if isinstance(exc, InvalidGroupError):
            raise
        raise InvalidGroupError(f"cannot parse group description {text!r}") from exc


@dataclass(frozen=True)
class GroupSubset:
    """A subset of a finite abelian group stored as an integer bitmask."""

    group: FiniteAbelianGroup
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.group.order:
            raise InvalidElementError("membership bits outside the group")

    @classmethod
    def from_elements(cls, group: FiniteAbelianGroup, elements: Iterable[int]) -> "GroupSubset":
        bits = 0
        for a in elements:
            bits |= 1 << group.check(a)
        return cls(group, bits)

    @classmethod
    def full(cls, group: FiniteAbelianGroup) -> "GroupSubset":
        return cls(group, (1 << group.order) - 1)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.group.order) if self.bits >> a & 1)

    def mask(self) -> np.ndarray:
        return np.array([bool(self.bits >> a & 1) for a in range(self.group.order)])

    def __contains__(self, a) -> bool:
        return 0 <= a < self.group.order and bool(self.bits >> a & 1)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __le__(self, other: "GroupSubset") -> bool:
        return self.bits & ~other.bits == 0

    def is_full(self) -> bool:
        return len(self) == self.group.order

    def translate(self, t: int) -> "GroupSubset":
        """``S + {t}``."""
        g = self.group
        return GroupSubset.from_elements(g, (g.add(a, t) for a in self.members))

    def differences(self) -> "GroupSubset":
        """``S - S``."""
        g = self.group
        return GroupSubset.from_elements(g, (g.sub(a, b) for a in self.members for b in self.members))

    def __repr__(self) -> str:
        return f"GroupSubset({self.group!r}, {set(self.members)})"


def subgroup_generated(g: FiniteAbelianGroup, S: GroupSubset) -> GroupSubset:
    """Smallest subgroup containing ``S``, by closure iteration."""
    members = {0}
    frontier = {0}
    gens = set(S.members)
    # negation closure is implied for finite groups, but adding it keeps the
    # iteration count small for large cyclic factors
    gens |= {g.neg(s) for s in gens}
    while frontier:
        new = set()
        for a in frontier:
            for s in gens:
                b = g.add(a, s)
                if b not in members:
                    members.add(b)
                    new.add(b)
        frontier = new
    return GroupSubset.from_elements(g, members)


def is_subgroup(g: FiniteAbelianGroup, H: GroupSubset) -> bool:
    if 0 not in H:
        return False
    mem = H.members
    return all(g.add(a, b) in H for a in mem for b in mem)


@dataclass(frozen=True)
class CosetVerdict:
    in_strict_coset: bool
    subgroup: GroupSubset
    shift: int

    def __bool__(self) -> bool:
        return self.in_strict_coset


def is_in_strict_coset(g: FiniteAbelianGroup, Z0: GroupSubset) -> CosetVerdict:
    """Decide whether ``Z0`` lies in ``H + {x}`` for a proper subgroup ``H``.

    The shift is ``z = min(Z0)``; ``H`` is the subgroup generated by
    ``Z0 - z``, which is the smallest subgroup having ``Z0`` inside one of
    its cosets.  The witness ``(H, z)`` is returned either way.
    """
    if len(Z0) == 0:
        raise InvalidInputError("Z0 must be non-empty")
    z = Z0.members[0]
    H = subgroup_generated(g, Z0.translate(g.neg(z)))
    return CosetVerdict(not H.is_full(), H, z)


@dataclass(frozen=True)
class QuotientMap:
    group: FiniteAbelianGroup
    subgroup: GroupSubset
    image: FiniteAbelianGroup
    table: np.ndarray = field(repr=False)

    def __call__(self, a: int) -> int:
        return int(self.table[self.group.check(a)])

    def preimage(self, k: int) -> GroupSubset:
        return GroupSubset.from_elements(self.group, np.flatnonzero(self.table == k).tolist())


def _diagonalize(rows: list[list[int]], ncols: int) -> tuple[list[int], list[list[int]]]:
    """Diagonalise an integer matrix by unimodular row/column operations.

    Returns the diagonal entries and the accumulated column transform ``V``
    so that ``U @ R @ V`` is diagonal.  Only ``V`` is needed by callers.
    """
    A = [list(r) for r in rows]
    V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    nrows = len(A)

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_col(dst, src, q):
        for row in A:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    diag = []
    for p in range(min(nrows, ncols)):
        while True:
            best = None
            for i in range(p, nrows):
                for j in range(p, ncols):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            i, j = best
            A[p], A[i] = A[i], A[p]
            if j != p:
                swap_cols(p, j)
            piv = A[p][p]
            for i in range(p + 1, nrows):
                q = A[i][p] // piv
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[p])]
            for j in range(p + 1, ncols):
                q = A[p][j] // piv
                if q:
                    add_col(j, p, q)
            if all(A[i][p] == 0 for i in range(p + 1, nrows)) and all(A[p][j] == 0 for j in range(p + 1, ncols)):
                break
        if best is None:
            break
        diag.append(abs(A[p][p]))
    return diag, V


def quotient(g: FiniteAbelianGroup, H: GroupSubset) -> QuotientMap:
    """Projection ``G -> G/H`` with ``G/H`` realised as a product of cyclic groups.

    The image is found by diagonalising the relation lattice spanned by the
    factor orders and the digit vectors of ``H``.
    """
    if H.group != g or not is_subgroup(g, H):
        raise InvalidSubgroupError(f"{H!r} is not a subgroup of {g!r}")
    t = g.rank
    rows = [[g.orders[i] if j == i else 0 for j in range(t)] for i in range(t)]
    rows += [list(g.decode(h)) for h in H.members if h != 0]
    diag, V = _diagonalize(rows, t)
    keep = [i for i, dv in enumerate(diag) if dv > 1]
    image = FiniteAbelianGroup(tuple(diag[i] for i in keep))
    if keep:
        Vk = np.array([[V[r][c] for c in keep] for r in range(t)], dtype=object)
        coords = (g.digit_table.astype(object) @ Vk)
        mods = np.array([diag[i] for i in keep], dtype=object)
        coords = (coords % mods).astype(np.int64)
        table = image.encode_digits(coords)
    else:
        table = np.zeros(g.order, dtype=np.int64)
    table.setflags(write=False)
    qm = QuotientMap(g, H, image, table)
    if image.order * len(H) != g.order or len(np.unique(table)) != image.order:
        raise InvalidSubgroupError("quotient construction failed")  # pragma: no cover
    return qm
