"""Joint distributions on finite product alphabets and their maximal correlation.

Distributions carry exact integer weights over a common total, so masses,
marginals and conditionals are exact rationals.  The correlation value is
computed in floating point (SVD), while the rho = 1 verdict is decided
exactly by connectivity of the support graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidConditioningError, InvalidInputError, ShapeError
from .groups import FiniteAbelianGroup, GroupSubset


class JointDistribution:
    """Distribution on ``Ω_1 x ... x Ω_d`` given by non-negative integer weights."""

    def __init__(self, weights):
        w = np.asarray(weights)
        if w.dtype == object:
            w = np.array(w.tolist(), dtype=np.int64)
        if not np.issubdtype(w.dtype, np.integer):
            raise InvalidInputError("weights must be integers; use from_masses for rationals")
        if w.ndim < 1:
            raise ShapeError("a distribution needs at least one coordinate")
        if (w < 0).any():
            raise InvalidInputError("weights must be non-negative")
        total = int(w.sum())
        if total == 0:
            raise InvalidInputError("distribution has no mass")
        g = math.gcd(*w.reshape(-1).tolist())
        w = (w // g).astype(np.int64)
        w.setflags(write=False)
        self.weights = w
        self.total = total // g

    @classmethod
    def from_masses(cls, masses) -> "JointDistribution":
        """Build from an array of Fractions (or floats) summing to 1."""
        arr = np.asarray(masses, dtype=object)
        fr = [Fraction(x) if not isinstance(x, float) else Fraction(repr(x)) for x in arr.reshape(-1)]
        if sum(fr) != 1:
            raise InvalidInputError(f"masses sum to {sum(fr)}, not 1")
        den = math.lcm(*(f.denominator for f in fr))
        return cls(np.array([int(f * den) for f in fr], dtype=np.int64).reshape(arr.shape))

    @property
    def arity(self) -> int:
        return self.weights.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.weights.shape

    def mass(self, *index) -> Fraction:
        return Fraction(int(self.weights[index]), self.total)

    def masses(self) -> np.ndarray:
        return self.weights / self.total

    def marginal(self, j: int) -> list[Fraction]:
        axes = tuple(a for a in range(self.arity) if a != j)
        m = self.weights.sum(axis=axes) if axes else self.weights
        return [Fraction(int(v), self.total) for v in m]

    def pair_view(self, j: int) -> "JointDistribution":
        """Coordinate ``j`` against all remaining coordinates flattened into one."""
        w = np.moveaxis(self.weights, j, 0)
        return JointDistribution(w.reshape(w.shape[0], -1))

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.shape == other.shape and self.total == other.total and bool(np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"JointDistribution(shape={self.shape}, total={self.total})"


@dataclass(frozen=True)
class CorrelationWitness:
    value: float
    lam: np.ndarray
    sigma: np.ndarray
    index: int = 0

    def __float__(self) -> float:
        return self.value


def avoidance_coupling(g: FiniteAbelianGroup, Z0: GroupSubset, d: int) -> JointDistribution:
    """Uniform distribution on d-tuples of ``G`` whose sum lies in ``Z0``."""
    if len(Z0) == 0:
        raise InvalidInputError("Z0 must be non-empty")
    if d < 1:
        raise InvalidInputError("d must be positive")
    sums = np.zeros((), dtype=np.int64)
    for _ in range(d):
        sums = g.add_table[sums]
    P = JointDistribution(Z0.mask()[sums].astype(np.int64))
    uniform = [Fraction(1, g.order)] * g.order
    if any(P.marginal(j) != uniform for j in range(d)):
        raise AssertionError("avoidance coupling must have uniform marginals")  # pragma: no cover
    return P


def _support(P: JointDistribution):
    w = P.weights.astype(float)
    pu, pv = w.sum(axis=1), w.sum(axis=0)
    ru, rv = np.flatnonzero(pu), np.flatnonzero(pv)
    return w[np.ix_(ru, rv)] / P.total, ru, rv


def _normalized_matrix(P: JointDistribution):
    Q, ru, rv = _support(P)
    pu, pv = Q.sum(axis=1), Q.sum(axis=0)
    B = Q / np.sqrt(np.outer(pu, pv))
    return B, pu, pv, ru, rv


def maximal_correlation_pair(P: JointDistribution) -> CorrelationWitness:
    """Maximal correlation of a two-coordinate distribution.

    The value is the second singular value of ``P(u,v)/sqrt(P_U(u) P_V(v))``
    restricted to the supports; ``lam`` and ``sigma`` are the matching
    singular vectors divided by the root marginals, extended by 0 off the
    supports.
    """
    if P.arity != 2:
        raise ShapeError("maximal_correlation_pair needs a distribution on two coordinates")
    B, pu, pv, ru, rv = _normalized_matrix(P)
    lam = np.zeros(P.shape[0])
    sigma = np.zeros(P.shape[1])
    if min(B.shape) < 2:
        return CorrelationWitness(0.0, lam, sigma)
    U, s, Vt = np.linalg.svd(B)
    value = float(min(max(s[1], 0.0), 1.0))
    lam[ru] = U[:, 1] / np.sqrt(pu)
    sigma[rv] = Vt[1, :] / np.sqrt(pv)
    return CorrelationWitness(value, lam, sigma)


def top_singular_pair(P: JointDistribution) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Top singular value and vectors of the normalised matrix, with root marginals."""
    B, pu, pv, _, _ = _normalized_matrix(P)
    U, s, Vt = np.linalg.svd(B)
    return float(s[0]), U[:, 0], Vt[0, :], np.sqrt(pu), np.sqrt(pv)


def ace_correlation(P: JointDistribution, seed: int = 0, tol: float = 1e-14, max_iter: int = 200_000) -> float:
    """Maximal correlation by alternating conditional expectations.

    Starting from a random centred ``lam``, alternate
    ``sigma <- E[lam(U) | V]`` and ``lam <- E[sigma(V) | U]`` with
    re-centring and unit-variance scaling until the covariance settles.
    """
    if P.arity != 2:
        raise ShapeError("ace_correlation needs a distribution on two coordinates")
    Q, _, _ = _support(P)
    pu, pv = Q.sum(axis=1), Q.sum(axis=0)
    if min(Q.shape) < 2:
        return 0.0
    rng = np.random.default_rng(seed)

    def normalize(f, p):
        f = f - p @ f
        var = p @ (f * f)
        return f / math.sqrt(var) if var > 1e-20 else None

    lam = normalize(rng.standard_normal(Q.shape[0]), pu)
    cov = 0.0
    for _ in range(max_iter):
        sigma = normalize((Q.T @ lam) / pv, pv)
        if sigma is None:
            return 0.0
        lam = normalize((Q @ sigma) / pu, pu)
        if lam is None:
            return 0.0
        new = float(lam @ Q @ sigma)
        if abs(new - cov) < tol:
            return new
        cov = new
    return cov


def rho(P: JointDistribution) -> CorrelationWitness:
    """Max over coordinates j of the maximal correlation of U_j against the rest."""
    if P.arity < 2:
        raise ShapeError("rho needs at least two coordinates")
    if P.arity == 2:
        return maximal_correlation_pair(P)
    best = None
    for j in range(P.arity):
        w = maximal_correlation_pair(P.pair_view(j))
        if best is None or w.value > best.value:
            best = CorrelationWitness(w.value, w.lam, w.sigma, j)
    return best


@dataclass(frozen=True)
class RhoOneVerdict:
    rho_one: bool
    components: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    lam: np.ndarray
    sigma: np.ndarray

    def __bool__(self) -> bool:
        return self.rho_one


def is_rho_one(P: JointDistribution) -> RhoOneVerdict:
    """Exact test of rho = 1 for a two-coordinate distribution.

    rho = 1 iff the bipartite support graph (symbols of U and of V, edges at
    positive-mass pairs) is disconnected.  ``lam`` and ``sigma`` label each
    symbol by its component, so ``lam(U) = sigma(V)`` almost surely; symbols
    outside the supports get 0.  ``components`` lists ``(U-symbols, V-symbols)``.
    """
    if P.arity != 2:
        raise ShapeError("is_rho_one needs a distribution on two coordinates")
    a, b = P.shape
    pu = P.weights.sum(axis=1)
    pv = P.weights.sum(axis=0)
    iu, iv = np.nonzero(P.weights)
    graph = coo_matrix((np.ones(len(iu)), (iu, a + iv)), shape=(a + b, a + b))
    _, labels = connected_components(graph, directed=False)
    lam = np.zeros(a)
    sigma = np.zeros(b)
    comps = {}
    for u in np.flatnonzero(pu):
        comps.setdefault(labels[u], ([], []))[0].append(int(u))
    for v in np.flatnonzero(pv):
        comps.setdefault(labels[a + v], ([], []))[1].append(int(v))
    ordered = sorted(comps.values(), key=lambda c: (c[0][:1], c[1][:1]))
    for k, (us, vs) in enumerate(ordered):
        lam[us] = k
        sigma[vs] = k
    return RhoOneVerdict(len(ordered) > 1, tuple((tuple(u), tuple(v)) for u, v in ordered), lam, sigma)


def conditional_pair(P: JointDistribution, fixed: Sequence[int] = ()) -> JointDistribution:
    """Distribution of the first two coordinates given values of coordinates 3..d."""
    fixed = tuple(int(x) for x in fixed)
    if len(fixed) != P.arity - 2:
        raise ShapeError(f"need {P.arity - 2} conditioning values, got {len(fixed)}")
    w = P.weights[(slice(None), slice(None)) + fixed]
    if w.sum() == 0:
        raise InvalidConditioningError(f"conditioning event {fixed} has zero mass")
    return JointDistribution(w)
