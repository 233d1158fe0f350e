"""Exact counting of d-tuples whose sum lands in ``Z0^n``.

Two independent routes compute ``|S ∩ (E_1 x ... x E_d)|``:

* ``transform``: a number-theoretic transform over ``G^n``.  Each cyclic
  factor of each coordinate is one axis; the transform is the tensor product
  of the length-m DFT matrices over ``Z_q`` for primes ``q ≡ 1 (mod lcm)``.
  The count is recovered exactly by CRT over enough primes to exceed ``|S|``.
* ``direct``: iterated convolution by explicit translates of the indicator
  arrays, with exact integer accumulation.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy import isprime
from sympy.ntheory import primitive_root

from .errors import CountOverflowError, ShapeError
from .groups import FiniteAbelianGroup, GroupSubset
from .tensor_sets import (
    TensorSet,
    _check_group_family,
    group_cube_shape,
    point_factor_digits,
    translate_cube,
    zero_power_mask,
)

# q < 2**24 keeps q*q*m below 2**63 for axis lengths up to 2**12.
PRIME_CEILING = 1 << 24
MAX_TRANSFORM_AXIS = 1 << 12
DEFAULT_MAX_BITS = 1024
DIRECT_THRESHOLD = 1 << 16

THREADS_ENV = "SUMSET_LAB_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def tuple_space_size(g: FiniteAbelianGroup, Z0: GroupSubset, n: int, d: int) -> int:
    """``|S| = |Z0|^n |G|^{n(d-1)}``."""
    return len(Z0) ** n * g.order ** (n * (d - 1))


@lru_cache(maxsize=None)
def _ntt_primes(L: int, count: int) -> tuple[tuple[int, int], ...]:
    """``count`` primes ``q ≡ 1 (mod L)`` below the ceiling, with a primitive L-th root."""
    out = []
    q = (PRIME_CEILING - 1) // L * L + 1
    while len(out) < count:
        if q <= L:
            raise CountOverflowError("ran out of transform primes for this group")
        if isprime(q):
            gen = primitive_root(q)
            out.append((q, pow(gen, (q - 1) // L, q)))
        q -= L
    return tuple(out)


def _dft_matrix(m: int, root_L: int, L: int, q: int, inverse: bool) -> np.ndarray:
    w = pow(root_L, L // m, q)
    if inverse:
        w = pow(w, q - 2, q)
    powers = np.array([pow(w, k, q) for k in range(m)], dtype=np.int64)
    jk = np.outer(np.arange(m), np.arange(m)) % m
    M = powers[jk]
    if inverse:
        M = M * pow(m, q - 2, q) % q
    return M


def _transform(a: np.ndarray, mats: dict[int, np.ndarray], axis_orders: Sequence[int], q: int) -> np.ndarray:
    for axis, m in enumerate(axis_orders):
        a = np.tensordot(mats[m], a, axes=([1], [axis])) % q
        a = np.moveaxis(a, 0, axis)
    return a


def _count_mod(q: int, root: int, L: int, arrays: list[np.ndarray], mask: np.ndarray, axis_orders) -> int:
    distinct = set(axis_orders)
    fwd = {m: _dft_matrix(m, root, L, q, inverse=False) for m in distinct}
    inv = {m: _dft_matrix(m, root, L, q, inverse=True) for m in distinct}
    acc = None
    for a in arrays:
        t = _transform(a.astype(np.int64), fwd, axis_orders, q)
        acc = t if acc is None else acc * t % q
    conv = _transform(acc, inv, axis_orders, q)
    return int(conv[mask].sum() % q)


def _count_transform(g, sets, Z0, n, bound, threads) -> int:
    shape = group_cube_shape(g, n)
    L = math.lcm(*g.orders)
    arrays = [E.bits.reshape(shape) for E in sets]
    mask = zero_power_mask(g, Z0, n).reshape(shape)
    nprimes = 1
    while True:
        primes = _ntt_primes(L, nprimes)
        if math.prod(q for q, _ in primes) > bound:
            break
        nprimes += 1

    def work(pr):
        return _count_mod(pr[0], pr[1], L, arrays, mask, shape)

    if threads > 1 and len(primes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            residues = list(pool.map(work, primes))
    else:
        residues = [work(pr) for pr in primes]
    # CRT
    x, M = 0, 1
    for (q, _), r in zip(primes, residues):
        t = (r - x) * pow(M, -1, q) % q
        x += M * t
        M *= q
    return x


def _count_direct(g, sets, Z0, n) -> int:
    shape = group_cube_shape(g, n)
    big = math.prod(len(E) for E in sets[:-1]) >= 1 << 62
    dtype = object if big else np.int64
    acc = sets[0].bits.reshape(shape).astype(dtype)
    for E in sets[1:]:
        out = np.zeros(shape, dtype=dtype)
        for idx in E.indices():
            out += translate_cube(acc, g, n, point_factor_digits(g, n, int(idx)))
        acc = out
    mask = zero_power_mask(g, Z0, n).reshape(shape)
    return int(acc[mask].sum())


def _choose_method(g, sets, n) -> str:
    if max(g.orders) > MAX_TRANSFORM_AXIS:
        return "direct"
    work = g.order ** n * sum(len(E) for E in sets[1:])
    return "direct" if work <= DIRECT_THRESHOLD else "transform"


def count_tuples_into(
    g: FiniteAbelianGroup,
    sets: Sequence[TensorSet],
    Z0: GroupSubset,
    method: str = "auto",
    threads: int | None = None,
    max_bits: int = DEFAULT_MAX_BITS,
) -> int:
    """Number of tuples ``(x^1..x^d) in E_1 x ... x E_d`` with sum in ``Z0^n``.

    ``method`` is ``"auto"``, ``"transform"`` or ``"direct"``.  Raises
    :class:`CountOverflowError` when ``|S|`` needs more than ``max_bits``.
    """
    n = _check_group_family(g, sets)
    if Z0.group != g:
        raise ShapeError("Z0 is not a subset of this group")
    bound = tuple_space_size(g, Z0, n, len(sets))
    if bound.bit_length() > max_bits:
        raise CountOverflowError(f"|S| needs {bound.bit_length()} bits, limit is {max_bits}")
    if len(Z0) == 0 or any(E.is_empty() for E in sets):
        return 0
    if method == "auto":
        method = _choose_method(g, sets, n)
    if method == "transform":
        if max(g.orders) > MAX_TRANSFORM_AXIS:
            raise ShapeError(f"cyclic factor above {MAX_TRANSFORM_AXIS} is too long for the transform")
        count = _count_transform(g, sets, Z0, n, bound, threads or default_threads())
    elif method == "direct":
        count = _count_direct(g, sets, Z0, n)
    else:
        raise ValueError(f"unknown counting method {method!r}")
    if count > bound:
        raise CountOverflowError("reconstructed count exceeds |S|")  # pragma: no cover
    return count


def empirical_count_ratio(g: FiniteAbelianGroup, Z0: GroupSubset, sets: Sequence[TensorSet], **options) -> Fraction:
    """``|S ∩ prod E_i| / |S|`` as an exact rational."""
    n = _check_group_family(g, sets)
    return Fraction(count_tuples_into(g, sets, Z0, **options), tuple_space_size(g, Z0, n, len(sets)))
