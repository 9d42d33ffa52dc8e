"""Orderings of component lifetimes and the relative quality functions.

Everything here is exact: probabilities are :class:`fractions.Fraction`
instances and no floating-point value is ever accepted.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import permutations
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptySetList,
    InvariantViolation,
    OutOfRange,
    SizeLimitExceeded,
    SubsetOutOfRange,
)
from .structure import from_mask, masks_of_size, to_mask

MAX_PERMUTATION_N = 8

_RATIONAL = re.compile(r"^\s*\d+\s*(/\s*\d+\s*)?$")


def as_fraction(value) -> Fraction:
    """Coerce an exact rational input; floats are refused."""
    if isinstance(value, bool):
        raise InvariantViolation("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        if not _RATIONAL.match(value):
            raise InvariantViolation(f"{value!r} is not an exact rational of the form 'p/q'")
        return Fraction(value.replace(" ", ""))
    raise InvariantViolation(
        f"probability {value!r} of type {type(value).__name__} is not exact; supply 'p/q' strings"
    )


def _subset_mask(subset, n: int) -> int:
    if isinstance(subset, (int, np.integer)) and not isinstance(subset, bool):
        raise SubsetOutOfRange("subsets must be iterables of components, not masks")
    return to_mask(subset, n, error=SubsetOutOfRange)


class PermutationModel:
    """Distribution over the orderings of the component lifetimes.

    ``probs[sigma]`` is ``Pr(T_sigma(1) < ... < T_sigma(n))`` where ``sigma`` is a
    tuple listing 1-indexed components from the first to fail to the last.
    Absent orderings have probability zero.
    """

    def __init__(self, n: int, probs: Mapping[Sequence[int], object]):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise OutOfRange(f"n must be a positive integer, got {n!r}")
        if n > MAX_PERMUTATION_N:
            raise SizeLimitExceeded(f"explicit permutation models are limited to n <= {MAX_PERMUTATION_N}")
        n = int(n)
        target = tuple(range(1, n + 1))
        clean: dict[tuple[int, ...], Fraction] = {}
        for key, value in probs.items():
            sigma = tuple(int(i) for i in key)
            if tuple(sorted(sigma)) != target:
                raise InvariantViolation(f"{key!r} is not a permutation of [1, {n}]")
            p = as_fraction(value)
            if p < 0:
                raise InvariantViolation(f"negative probability {p} for ordering {sigma}")
            if p:
                clean[sigma] = clean.get(sigma, Fraction(0)) + p
        total = sum(clean.values(), Fraction(0))
        if total != 1:
            raise InvariantViolation(f"ordering probabilities sum to {total}, not 1")
        self.n = n
        self.probs = clean

    def __repr__(self):
        return f"PermutationModel(n={self.n}, support={len(self.probs)})"

    def __eq__(self, other):
        if not isinstance(other, PermutationModel):
            return NotImplemented
        return self.n == other.n and self.probs == other.probs

    @cached_property
    def _chains(self) -> tuple[np.ndarray, list[Fraction]]:
        # row r, column s: mask of the s longest-lived components under ordering r
        sigmas = list(self.probs)
        chains = np.zeros((len(sigmas), self.n + 1), dtype=np.int64)
        for r, sigma in enumerate(sigmas):
            mask = 0
            for s, comp in enumerate(reversed(sigma), start=1):
                mask |= 1 << (comp - 1)
                chains[r, s] = mask
        return chains, [self.probs[s] for s in sigmas]


def uniform_model(n: int) -> PermutationModel:
    """All ``n!`` orderings equally likely (the i.i.d. / exchangeable case)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n!r}")
    if n > MAX_PERMUTATION_N:
        raise SizeLimitExceeded(f"explicit permutation models are limited to n <= {MAX_PERMUTATION_N}")
    p = Fraction(1, factorial(n))
    return PermutationModel(n, {sigma: p for sigma in permutations(range(1, n + 1))})


class QualityFunction:
    """Relative quality ``q(A)``: probability that the best ``|A|`` components are ``A``."""

    def __init__(self, n: int, values: Mapping[int, Fraction]):
        self.n = n
        self.values = dict(values)
        full = (1 << n) - 1
        self.values[0] = Fraction(1)
        self.values[full] = Fraction(1)

    def value(self, mask: int) -> Fraction:
        return self.values.get(mask, Fraction(0))

    def __call__(self, subset: Iterable[int]) -> Fraction:
        return self.value(_subset_mask(subset, self.n))

    def check(self) -> None:
        """Raise :class:`InvariantViolation` unless each cardinality layer sums to one."""
        for k in range(1, self.n):
            total = sum((self.value(m) for m in masks_of_size(self.n, k)), Fraction(0))
            if total != 1:
                raise InvariantViolation(f"q sums to {total} over subsets of size {k}", index=k)
        if any(v < 0 or v > 1 for v in self.values.values()):
            raise InvariantViolation("q values must lie in [0, 1]")


def uniform_quality(n: int) -> QualityFunction:
    """``q(A) = 1 / C(n, |A|)``; never builds a permutation model."""
    return _LayeredQuality(n)


class _LayeredQuality(QualityFunction):
    def __init__(self, n):
        self.n = n
        self.values = {}

    def value(self, mask: int) -> Fraction:
        return Fraction(1, comb(self.n, int(mask).bit_count()))


def q_from_model(model: PermutationModel) -> QualityFunction:
    chains, probs = model._chains
    values: dict[int, Fraction] = {}
    for r, p in enumerate(probs):
        for s in range(1, model.n):
            m = int(chains[r, s])
            values[m] = values.get(m, Fraction(0)) + p
    return QualityFunction(model.n, values)


class BivariateQuality:
    """Bivariate relative quality ``q(A, B)``.

    Subclasses implement :meth:`_nested_value` for nested pairs ``B <= A``
    with neither set empty nor full; the boundary conventions and the
    zero outside nested pairs are handled here.
    """

    n: int

    def value(self, a: int, b: int) -> Fraction:
        full = (1 << self.n) - 1
        if b == 0 or b == full:
            return self.marginal_value(a)
        if a == 0 or a == full:
            return self.marginal_value(b)
        if a & b == b:
            return self._nested_value(a, b)
        if a & b == a:
            return self._nested_value(b, a)
        return Fraction(0)

    def __call__(self, A: Iterable[int], B: Iterable[int]) -> Fraction:
        return self.value(_subset_mask(A, self.n), _subset_mask(B, self.n))

    def marginal_value(self, a: int) -> Fraction:
        full = (1 << self.n) - 1
        if a == 0 or a == full:
            return Fraction(1)
        return self._nested_value(a, a)

    def marginal(self) -> QualityFunction:
        """The univariate quality function ``q(A) = q(A, A)``."""
        values = {}
        for k in range(1, self.n):
            for m in masks_of_size(self.n, k):
                v = self.marginal_value(m)
                if v:
                    values[m] = v
        return QualityFunction(self.n, values)

    def _nested_value(self, outer: int, inner: int) -> Fraction:
        raise NotImplementedError

    @property
    def source(self) -> str:
        raise NotImplementedError


class ModelQuality(BivariateQuality):
    """``q(A, B)`` obtained by summing ordering probabilities.

    The table of nonzero nested pairs is built on the first query.
    """

    def __init__(self, model: PermutationModel):
        self.model = model
        self.n = model.n

    source = "model"

    @cached_property
    def _table(self) -> dict[tuple[int, int], Fraction]:
        chains, probs = self.model._chains
        n = self.n
        table: dict[tuple[int, int], Fraction] = {}
        for r, p in enumerate(probs):
            row = [int(x) for x in chains[r]]
            for i in range(1, n):
                for j in range(1, i + 1):
                    key = (row[i], row[j])
                    table[key] = table.get(key, Fraction(0)) + p
        return table

    def _nested_value(self, outer: int, inner: int) -> Fraction:
        return self._table.get((outer, inner), Fraction(0))


class UniformQuality(BivariateQuality):
    """Closed form ``q0`` valid when all orderings are equally likely."""

    def __init__(self, n: int):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise OutOfRange(f"n must be a positive integer, got {n!r}")
        self.n = int(n)

    source = "q0"

    def _nested_value(self, outer: int, inner: int) -> Fraction:
        return _chain_value(self.n, (outer.bit_count(), inner.bit_count()))


def q_bivariate_from_model(model: PermutationModel) -> BivariateQuality:
    return ModelQuality(model)


@lru_cache(maxsize=4096)
def _chain_value(n: int, sizes: tuple[int, ...]) -> Fraction:
    # sizes nonincreasing: (n - s1)! (s1 - s2)! ... s_m! / n!
    num = factorial(n - sizes[0])
    for big, small in zip(sizes, sizes[1:]):
        num *= factorial(big - small)
    num *= factorial(sizes[-1])
    return Fraction(num, factorial(n))


def q0(n: int, A: Iterable[int], B: Iterable[int]) -> Fraction:
    """Bivariate relative quality under equally likely orderings."""
    a, b = _subset_mask(A, n), _subset_mask(B, n)
    if a & b == b:
        return _chain_value(n, (a.bit_count(), b.bit_count()))
    if a & b == a:
        return _chain_value(n, (b.bit_count(), a.bit_count()))
    return Fraction(0)


def _chain_order(masks: Sequence[int]) -> list[int] | None:
    """Masks sorted into a decreasing chain, or None when they are not nested."""
    ordered = sorted(masks, key=lambda m: -m.bit_count())
    for big, small in zip(ordered, ordered[1:]):
        if big & small != small:
            return None
    return ordered


def q0_multi(n: int, sets: Sequence[Iterable[int]]) -> Fraction:
    """m-variate relative quality under equally likely orderings."""
    masks = [_subset_mask(s, n) for s in sets]
    if not masks:
        raise EmptySetList("at least one subset is required")
    chain = _chain_order(masks)
    if chain is None:
        return Fraction(0)
    return _chain_value(n, tuple(m.bit_count() for m in chain))


def q_multi_from_model(model: PermutationModel, sets: Sequence[Iterable[int]]) -> Fraction:
    """m-variate relative quality as a sum over ordering probabilities."""
    masks = [_subset_mask(s, model.n) for s in sets]
    if not masks:
        raise EmptySetList("at least one subset is required")
    return _model_multi_value(model, masks)


def _model_multi_value(model: PermutationModel, masks: Sequence[int]) -> Fraction:
    chains, probs = model._chains
    hit = np.ones(chains.shape[0], dtype=bool)
    for m in masks:
        hit &= chains[:, m.bit_count()] == m
    return sum((probs[r] for r in np.flatnonzero(hit)), Fraction(0))


def check_dimensions(*ns: int) -> int:
    if len(set(ns)) != 1:
        raise DimensionMismatch(f"component counts disagree: {ns}")
    return ns[0]


__all__ = [
    "MAX_PERMUTATION_N",
    "BivariateQuality",
    "ModelQuality",
    "PermutationModel",
    "QualityFunction",
    "UniformQuality",
    "as_fraction",
    "from_mask",
    "q0",
    "q0_multi",
    "q_bivariate_from_model",
    "q_from_model",
    "q_multi_from_model",
    "uniform_model",
    "uniform_quality",
]
