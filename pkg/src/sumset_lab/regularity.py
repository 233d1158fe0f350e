"""(r, beta)-pseudorandomness and the simultaneous energy-increment decomposition.

All densities, deviations and energies are exact rationals.  Internally
every scan works on the cube view of a set (one numpy axis per
coordinate) so that fibers over any coordinate set are obtained by
transposing and summing.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rational import as_fraction
from .errors import InvalidInputError, InvariantViolation, ShapeError
from .tensor_sets import TensorSet, normalize_coords

log = logging.getLogger(__name__)

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class Witness:
    """A restriction ``I -> y`` whose density deviates by more than beta."""

    coords: tuple[int, ...]
    assignment: tuple[int, ...]
    deviation: Fraction


@dataclass(frozen=True)
class PseudorandomnessVerdict:
    pseudorandom: bool
    witness: Witness | None = None

    def __bool__(self) -> bool:
        return self.pseudorandom


@dataclass(frozen=True)
class RegularityParams:
    r: int
    beta: Fraction
    alpha: Fraction

    def __init__(self, r: int, beta, alpha):
        if int(r) != r or r < 0:
            raise InvalidInputError(f"r must be a non-negative integer, got {r!r}")
        beta, alpha = as_fraction(beta), as_fraction(alpha)
        if beta <= 0 or alpha <= 0:
            raise InvalidInputError("beta and alpha must be positive")
        object.__setattr__(self, "r", int(r))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)


@dataclass
class FiberScan:
    """Per-fiber data for all ``y in X^I`` (flattened row-major over I)."""

    axes: tuple[int, ...]
    counts: np.ndarray
    fiber_size: int
    witnesses: dict[int, Witness] = field(default_factory=dict)

    @property
    def n_fibers(self) -> int:
        return self.counts.size

    def bad_fraction(self) -> Fraction:
        return Fraction(len(self.witnesses), self.n_fibers)

    def density(self, y: int) -> Fraction:
        return Fraction(int(self.counts[y]), self.fiber_size)


def scan_fibers(cube: np.ndarray, axes: Sequence[int], r: int, beta: Fraction) -> FiberScan:
    """Test every fiber over the 0-based ``axes`` for (r, beta)-pseudorandomness.

    For each fiber the first violating restriction is recorded, searching
    sub-coordinate sets of the free coordinates by size, then
    lexicographically, then assignments in row-major order.
    """
    n = cube.ndim
    X = cube.shape[0]
    axes = tuple(sorted(axes))
    free = tuple(a for a in range(n) if a not in axes)
    k, m = len(axes), len(free)
    arr = cube.transpose(axes + free).reshape((X ** k,) + (X,) * m)
    counts = arr.reshape(X ** k, -1).sum(axis=1, dtype=np.int64)
    fiber_size = X ** m
    scan = FiberScan(axes, counts, fiber_size)
    beta = as_fraction(beta)
    p, q = beta.numerator, beta.denominator
    limit = p * fiber_size
    wide = (q * fiber_size) >= _INT64_SAFE or limit >= _INT64_SAFE
    tot = counts.astype(object) if wide else counts
    unresolved = np.ones(X ** k, dtype=bool)
    for size in range(1, min(r, m) + 1):
        for J in itertools.combinations(range(m), size):
            drop = tuple(1 + j for j in range(m) if j not in J)
            sub = arr.sum(axis=drop, dtype=np.int64) if drop else arr.astype(np.int64)
            sub = sub.reshape(X ** k, X ** size)
            if wide:
                sub = sub.astype(object)
            dev_num = np.abs(sub * (X ** size) - tot[:, None])
            viol = dev_num * q > limit
            hit = viol.any(axis=1) & unresolved
            if not hit.any():
                continue
            first = viol.argmax(axis=1)
            coords = tuple(free[j] + 1 for j in J)
            for y in np.flatnonzero(hit):
                zi = int(first[y])
                z = tuple(int(v) for v in np.unravel_index(zi, (X,) * size))
                scan.witnesses[int(y)] = Witness(coords, z, Fraction(int(dev_num[y, zi]), fiber_size))
            unresolved &= ~hit
            if not unresolved.any():
                return scan
    return scan


def is_pseudorandom(E: TensorSet, r: int, beta) -> PseudorandomnessVerdict:
    """Exhaustive (r, beta)-pseudorandomness test of ``E``.

    The witness, if any, is the first violation in (|I|, I, y) order.
    """
    if r < 0:
        raise InvalidInputError("r must be non-negative")
    scan = scan_fibers(E.cube, (), r, as_fraction(beta))
    w = scan.witnesses.get(0)
    return PseudorandomnessVerdict(w is None, w)


def energy(E: TensorSet, I) -> Fraction:
    """Mean squared fiber density over ``y in X^I``."""
    I = normalize_coords(I, E.n)
    return _energy(E.cube, tuple(i - 1 for i in I))


def _energy(cube: np.ndarray, axes: tuple[int, ...]) -> Fraction:
    X, n = cube.shape[0], cube.ndim
    others = tuple(a for a in range(n) if a not in axes)
    counts = cube.sum(axis=others, dtype=np.int64) if others else cube.astype(np.int64)
    sq = sum(c * c for c in counts.reshape(-1).tolist())
    m = n - len(axes)
    return Fraction(sq, X ** len(axes) * X ** (2 * m))


def fiber_psr_fraction(E: TensorSet, I, r: int, beta) -> Fraction:
    """Fraction of ``y in X^I`` whose fiber is not (r, beta)-pseudorandom."""
    I = normalize_coords(I, E.n)
    return scan_fibers(E.cube, tuple(i - 1 for i in I), r, as_fraction(beta)).bad_fraction()


@dataclass(frozen=True)
class TraceStep:
    step: int
    coords: tuple[int, ...]
    energies: tuple[Fraction, ...]
    bad_fractions: tuple[Fraction, ...]
    trigger: int | None
    added: tuple[int, ...]
    forced: bool = False


@dataclass(frozen=True)
class DecompositionResult:
    coords: tuple[int, ...]
    trace: tuple[TraceStep, ...]
    fiber_report: tuple[Fraction, ...]
    exhausted: bool
    params: RegularityParams

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1


def step_bound(alphabet_size: int, d: int, params: RegularityParams) -> Fraction:
    """Upper bound on the number of iterations.

    Energies sum to at most ``max(d, 2)`` and every non-forced step adds at
    least ``|X|^-r alpha beta^2``; the forced first step adds one more.
    """
    inc = Fraction(1, alphabet_size ** params.r) * params.alpha * params.beta ** 2
    return max(d, 2) / inc + 1


def decompose(sets: Sequence[TensorSet], params: RegularityParams) -> DecompositionResult:
    """Find a non-empty ``I`` where every set has at most an alpha-fraction of bad fibers.

    Each iteration picks the first set whose bad-fiber fraction exceeds
    alpha, adds a witness coordinate set for every one of its bad fibers,
    and repeats.  The first iteration always runs; if it finds nothing to
    add it takes coordinate 1.
    """
    if not sets:
        raise ShapeError("decompose needs at least one set")
    X, n = sets[0].alphabet_size, sets[0].n
    for E in sets:
        if E.alphabet_size != X or E.n != n:
            raise ShapeError("all sets must share alphabet and dimension")
    cubes = [E.cube for E in sets]
    d = len(sets)
    bound = step_bound(X, d, params)
    inc = Fraction(1, X ** params.r) * params.alpha * params.beta ** 2

    axes: tuple[int, ...] = ()
    trace: list[TraceStep] = []
    prev_energies = None
    prev_trigger = None
    s = 0
    while True:
        scans = [scan_fibers(c, axes, params.r, params.beta) for c in cubes]
        energies = tuple(_energy(c, axes) for c in cubes)
        fractions = tuple(sc.bad_fraction() for sc in scans)
        if prev_energies is not None:
            for j, (a, b) in enumerate(zip(prev_energies, energies)):
                if b < a:
                    raise InvariantViolation(f"energy of set {j} decreased at step {s}")
            if prev_trigger is not None and energies[prev_trigger] - prev_energies[prev_trigger] < inc:
                raise InvariantViolation(f"energy increment of set {prev_trigger} below the guaranteed bound at step {s}")
        coords = tuple(a + 1 for a in axes)
        failing = [j for j, fr in enumerate(fractions) if fr > params.alpha]
        forced = s == 0
        if (not failing and not forced) or len(axes) == n:
            trace.append(TraceStep(s, coords, energies, fractions, None, ()))
            break
        if failing:
            trigger = failing[0]
            new = set()
            for w in scans[trigger].witnesses.values():
                new.update(c - 1 for c in w.coords)
        else:
            trigger = None
            new = {min(a for a in range(n) if a not in axes)}
        if len(new) > X ** len(axes) * params.r and trigger is not None:
            raise InvariantViolation("per-step growth exceeds |X|^|I_s| r")
        added = tuple(sorted(a + 1 for a in new))
        trace.append(TraceStep(s, coords, energies, fractions, trigger, added, forced))
        log.debug("step %d: I=%s trigger=%s added=%s", s, coords, trigger, added)
        axes = tuple(sorted(set(axes) | new))
        # the forced step carries no increment guarantee
        prev_trigger = None if (forced or trigger is None) else trigger
        prev_energies = energies
        s += 1
        if s > bound:
            raise InvariantViolation(f"iteration count {s} exceeds the bound {bound}")
    final = trace[-1]
    return DecompositionResult(final.coords, tuple(trace), final.bad_fractions, len(axes) == n, params)
