"""Exact subsets of product spaces X^n.

A point of X^n is the base-|X| integer whose most significant digit is
coordinate 1, so ``bits.reshape((|X|,) * n)`` is indexed by coordinates in
order and fixing a prefix of coordinates selects a contiguous block.
Coordinates are 1-based throughout the public API.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, ShapeError
from .groups import FiniteAbelianGroup, GroupSubset

MAX_INDEX_BITS = 30


def _check_size(alphabet_size: int, n: int) -> int:
    if alphabet_size < 1:
        raise ShapeError("alphabet must be non-empty")
    if n < 1:
        raise ShapeError("n must be at least 1")
    size = alphabet_size ** n
    if size > 1 << MAX_INDEX_BITS:
        raise ShapeError(f"|X|^n = {alphabet_size}^{n} exceeds the 2^{MAX_INDEX_BITS} materialisation cap")
    return size


class TensorSet:
    """Immutable bitset-backed subset of ``X^n``."""

    __slots__ = ("alphabet_size", "n", "bits")

    def __init__(self, alphabet_size: int, n: int, bits):
        size = _check_size(int(alphabet_size), int(n))
        bits = np.asarray(bits, dtype=bool).reshape(-1)
        if bits.size != size:
            raise ShapeError(f"expected {size} bits, got {bits.size}")
        if bits.flags.writeable:
            bits = bits.copy()
            bits.setflags(write=False)
        object.__setattr__(self, "alphabet_size", int(alphabet_size))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, key, value):
        raise AttributeError("TensorSet is immutable")

    # construction

    @classmethod
    def empty(cls, alphabet_size: int, n: int) -> "TensorSet":
        return cls(alphabet_size, n, np.zeros(_check_size(alphabet_size, n), dtype=bool))

    @classmethod
    def full(cls, alphabet_size: int, n: int) -> "TensorSet":
        return cls(alphabet_size, n, np.ones(_check_size(alphabet_size, n), dtype=bool))

    @classmethod
    def from_indices(cls, alphabet_size: int, n: int, indices: Iterable[int]) -> "TensorSet":
        size = _check_size(alphabet_size, n)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= size):
            raise InvalidInputError("point index out of range")
        bits = np.zeros(size, dtype=bool)
        bits[idx] = True
        return cls(alphabet_size, n, bits)

    @classmethod
    def from_points(cls, alphabet_size: int, points: Iterable[Sequence[int]], n: int) -> "TensorSet":
        pts = [tuple(p) for p in points]
        return cls.from_indices(alphabet_size, n, (point_index(alphabet_size, p) for p in pts))

    @classmethod
    def from_cube(cls, cube: np.ndarray) -> "TensorSet":
        cube = np.asarray(cube, dtype=bool)
        if cube.ndim < 1 or len(set(cube.shape)) != 1:
            raise ShapeError(f"cube must have equal side lengths, got {cube.shape}")
        return cls(cube.shape[0], cube.ndim, cube.reshape(-1))

    @classmethod
    def from_predicate(cls, alphabet_size: int, n: int, predicate: Callable[[np.ndarray], np.ndarray]) -> "TensorSet":
        """``predicate`` receives an ``(N, n)`` digit array and returns N booleans."""
        return cls(alphabet_size, n, predicate(all_points(alphabet_size, n)))

    # views

    @property
    def size(self) -> int:
        return self.bits.size

    @property
    def cube(self) -> np.ndarray:
        return self.bits.reshape((self.alphabet_size,) * self.n)

    @property
    def cardinality(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __len__(self) -> int:
        return self.cardinality

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def points(self) -> np.ndarray:
        """Digit array ``(|E|, n)`` of the members."""
        return index_digits(self.alphabet_size, self.n, self.indices())

    def __contains__(self, point) -> bool:
        if isinstance(point, (int, np.integer)):
            return 0 <= point < self.size and bool(self.bits[point])
        return bool(self.bits[point_index(self.alphabet_size, point)])

    def same_shape(self, other: "TensorSet") -> bool:
        return self.alphabet_size == other.alphabet_size and self.n == other.n

    def _require_same(self, other: "TensorSet"):
        if not self.same_shape(other):
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.alphabet_size, self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorSet):
            return NotImplemented
        return self.same_shape(other) and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.alphabet_size, self.n, self.bits.tobytes()))

    def __or__(self, other: "TensorSet") -> "TensorSet":
        self._require_same(other)
        return TensorSet(self.alphabet_size, self.n, self.bits | other.bits)

    def __and__(self, other: "TensorSet") -> "TensorSet":
        self._require_same(other)
        return TensorSet(self.alphabet_size, self.n, self.bits & other.bits)

    def __sub__(self, other: "TensorSet") -> "TensorSet":
        self._require_same(other)
        return TensorSet(self.alphabet_size, self.n, self.bits & ~other.bits)

    def __le__(self, other: "TensorSet") -> bool:
        self._require_same(other)
        return not np.any(self.bits & ~other.bits)

    def complement(self) -> "TensorSet":
        return TensorSet(self.alphabet_size, self.n, ~self.bits)

    def is_empty(self) -> bool:
        return not self.bits.any()

    def __repr__(self) -> str:
        return f"TensorSet(|X|={self.alphabet_size}, n={self.n}, |E|={self.cardinality})"


def point_index(alphabet_size: int, point: Sequence[int]) -> int:
    idx = 0
    for v in point:
        if not 0 <= v < alphabet_size:
            raise InvalidInputError(f"symbol {v} outside alphabet of size {alphabet_size}")
        idx = idx * alphabet_size + int(v)
    return idx


def index_digits(alphabet_size: int, n: int, indices) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    powers = alphabet_size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % alphabet_size


def all_points(alphabet_size: int, n: int) -> np.ndarray:
    return index_digits(alphabet_size, n, np.arange(alphabet_size ** n))


def normalize_coords(I: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate a 1-based coordinate set and return it sorted."""
    coords = tuple(sorted(int(i) for i in I))
    if len(set(coords)) != len(coords):
        raise InvalidInputError(f"repeated coordinate in {coords}")
    if coords and (coords[0] < 1 or coords[-1] > n):
        raise InvalidInputError(f"coordinates {coords} not within [1, {n}]")
    return coords


def complement_coords(I: Sequence[int], n: int) -> tuple[int, ...]:
    s = set(I)
    return tuple(i for i in range(1, n + 1) if i not in s)


def density(E: TensorSet) -> Fraction:
    return Fraction(E.cardinality, E.size)


def fiber_counts(cube: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Member counts of every fiber over the 0-based ``axes``.

    The result has one axis per entry of ``axes`` (in sorted order).
    """
    axes = tuple(sorted(axes))
    others = tuple(a for a in range(cube.ndim) if a not in axes)
    return cube.sum(axis=others, dtype=np.int64) if others else cube.astype(np.int64)


def restrict(E: TensorSet, I: Iterable[int], y: Sequence[int]) -> TensorSet:
    """The fiber ``E_{I->y}`` as a subset of ``X^{I^c}``.

    ``y`` lists symbols for the coordinates of ``I`` in increasing order.
    """
    I = normalize_coords(I, E.n)
    y = tuple(y)
    if len(y) != len(I):
        raise InvalidInputError(f"assignment {y} does not match coordinates {I}")
    if any(not 0 <= v < E.alphabet_size for v in y):
        raise InvalidInputError(f"assignment {y} has symbols outside the alphabet")
    if not I:
        return E
    if len(I) == E.n:
        raise InvalidInputError("restricting every coordinate leaves no free coordinates")
    index = [slice(None)] * E.n
    for i, v in zip(I, y):
        index[i - 1] = v
    return TensorSet.from_cube(E.cube[tuple(index)])


def cylinder(E_prime: TensorSet, I: Iterable[int], n: int) -> TensorSet:
    """``E' x X^{I^c}`` with the coordinates of ``E'`` placed at ``I``."""
    I = normalize_coords(I, n)
    if len(I) != E_prime.n:
        raise ShapeError(f"|I| = {len(I)} but E' has {E_prime.n} coordinates")
    X = E_prime.alphabet_size
    _check_size(X, n)
    shape = [1] * n
    for i in I:
        shape[i - 1] = X
    cube = np.broadcast_to(E_prime.cube.reshape(shape), (X,) * n)
    return TensorSet(X, n, np.ascontiguousarray(cube).reshape(-1))


def _check_group_family(g: FiniteAbelianGroup, sets: Sequence[TensorSet]) -> int:
    if not sets:
        raise ShapeError("need at least one set")
    n = sets[0].n
    for E in sets:
        if E.alphabet_size != g.order or E.n != n:
            raise ShapeError(f"set {E!r} is not a subset of {g!r}^{n}")
    return n


def group_cube_shape(g: FiniteAbelianGroup, n: int) -> tuple[int, ...]:
    """Shape under which a flat G^n array splits into one axis per cyclic factor."""
    return tuple(g.orders) * n


def translate_cube(cube: np.ndarray, g: FiniteAbelianGroup, n: int, point_digits: Sequence[int]) -> np.ndarray:
    """Shift a G^n array (in factor-axis shape) by a point given as factor digits."""
    return np.roll(cube, shift=tuple(point_digits), axis=tuple(range(cube.ndim)))


def point_factor_digits(g: FiniteAbelianGroup, n: int, index: int) -> list[int]:
    digits = index_digits(g.order, n, [index])[0]
    out: list[int] = []
    for a in digits:
        out.extend(g.digit_table[a].tolist())
    return out


def sumset(g: FiniteAbelianGroup, sets: Sequence[TensorSet]) -> TensorSet:
    """Exact coordinatewise sumset ``E_1 + ... + E_d`` in ``G^n``."""
    n = _check_group_family(g, sets)
    shape = group_cube_shape(g, n)
    acc = sets[0].bits.reshape(shape)
    for E in sets[1:]:
        if not acc.any() or E.is_empty():
            return TensorSet.empty(g.order, n)
        out = np.zeros(shape, dtype=bool)
        for idx in E.indices():
            out |= translate_cube(acc, g, n, point_factor_digits(g, n, int(idx)))
        acc = out
    return TensorSet(g.order, n, acc.reshape(-1))


def zero_power_mask(g: FiniteAbelianGroup, Z0: GroupSubset, n: int) -> np.ndarray:
    """Indicator of ``Z0^n`` as a flat array over ``G^n``."""
    base = Z0.mask()
    out = base
    for _ in range(n - 1):
        out = np.logical_and.outer(out, base).reshape(-1)
    return out


def avoids(g: FiniteAbelianGroup, sets: Sequence[TensorSet], Z0: GroupSubset, **count_options) -> bool:
    """True iff ``(E_1 + ... + E_d) ∩ Z0^n`` is empty."""
    from .counting import count_tuples_into

    _check_group_family(g, sets)
    if any(E.is_empty() for E in sets):
        return True
    return count_tuples_into(g, sets, Z0, **count_options) == 0


# generic combiners f: X x Y -> Z


@dataclass(frozen=True)
class CombinerTable:
    """A function ``f: X x Y -> Z`` given by its table."""

    table: np.ndarray
    codomain_size: int

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim != 2:
            raise ShapeError("combiner table must be two-dimensional")
        if t.size and (t.min() < 0 or t.max() >= self.codomain_size):
            raise InvalidInputError("combiner output outside the codomain")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def x_size(self) -> int:
        return self.table.shape[0]

    @property
    def y_size(self) -> int:
        return self.table.shape[1]

    def __call__(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    @classmethod
    def from_function(cls, x_size: int, y_size: int, z_size: int, f: Callable[[int, int], int]) -> "CombinerTable":
        return cls(np.array([[f(x, y) for y in range(y_size)] for x in range(x_size)]), z_size)

    @classmethod
    def addition(cls, g: FiniteAbelianGroup) -> "CombinerTable":
        return cls(np.asarray(g.add_table), g.order)

    @classmethod
    def minimum(cls, size: int) -> "CombinerTable":
        idx = np.arange(size)
        return cls(np.minimum.outer(idx, idx), size)


def _check_generic(f: CombinerTable, E: TensorSet, F: TensorSet):
    if E.alphabet_size != f.x_size or F.alphabet_size != f.y_size or E.n != F.n:
        raise ShapeError("sets do not match the combiner's domains")


def generic_avoids(f: CombinerTable, E: TensorSet, F: TensorSet, Z0: Iterable[int]) -> bool:
    """True iff no ``(x, y) in E x F`` has ``f(x_i, y_i) in Z0`` for every i.

    For each ``x`` the partners ``y`` hitting ``Z0^n`` form the product set
    ``prod_i {y : f(x_i, y) in Z0}``; the scan stops at the first ``x`` whose
    product set meets ``F``.
    """
    _check_generic(f, E, F)
    zmask = np.zeros(f.codomain_size, dtype=bool)
    zmask[list(Z0)] = True
    hits = zmask[f.table]  # hits[x, y]: f(x, y) in Z0
    partners = [np.flatnonzero(hits[x]) for x in range(f.x_size)]
    Fc = F.cube
    for point in E.points():
        lists = [partners[v] for v in point]
        if any(len(lst) == 0 for lst in lists):
            continue
        if Fc[np.ix_(*lists)].any():
            return False
    return True


def generic_image(f: CombinerTable, E: TensorSet, F: TensorSet) -> TensorSet:
    """``f^{⊗n}(E, F)`` as a subset of ``Z^n``, by brute force over ``E x F``."""
    _check_generic(f, E, F)
    n = E.n
    out = np.zeros(f.codomain_size ** n, dtype=bool)
    fp = F.points()
    if len(fp) == 0:
        return TensorSet(f.codomain_size, n, out)
    powers = f.codomain_size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for x in E.points():
        z = f.table[x[None, :], fp]
        out[z @ powers] = True
    return TensorSet(f.codomain_size, n, out)


def subsets_of_size(n: int, k: int):
    """1-based k-subsets of [n] in lexicographic order."""
    return itertools.combinations(range(1, n + 1), k)
