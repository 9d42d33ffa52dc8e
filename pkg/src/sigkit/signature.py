"""Univariate, joint and m-variate signatures in exact rational arithmetic.

Indexing follows the usual conventions: signatures are indexed by
``k = 1..n`` (the failure that kills the system) and tails by
``k = 0..n`` (the system survives beyond the k-th failure).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvariantViolation, SizeLimitExceeded
from .quality import (
    BivariateQuality,
    PermutationModel,
    QualityFunction,
    UniformQuality,
    _chain_value,
    _model_multi_value,
    as_fraction,
)
from .structure import StructureFunction

MAX_MULTI_ENTRIES = 1 << 20

_ZERO = Fraction(0)


def _fractions(values) -> tuple[Fraction, ...]:
    return tuple(as_fraction(v) for v in values)


@dataclass(frozen=True)
class SignatureVector:
    """``entries[k - 1]`` is the probability that the k-th failure kills the system."""

    entries: tuple[Fraction, ...]

    def __post_init__(self):
        entries = _fractions(self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise InvariantViolation("a signature needs at least one entry")
        for k, v in enumerate(entries, start=1):
            if v < 0:
                raise InvariantViolation(f"signature entry {k} is negative ({v})", index=k)
        if sum(entries, _ZERO) != 1:
            raise InvariantViolation(f"signature sums to {sum(entries, _ZERO)}, not 1")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> Fraction:
        if not 1 <= k <= self.n:
            raise IndexError(f"signature index {k} outside [1, {self.n}]")
        return self.entries[k - 1]

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class TailVector:
    """``entries[k]`` is the probability that the system outlives the k-th failure."""

    entries: tuple[Fraction, ...]

    def __post_init__(self):
        entries = _fractions(self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) < 2:
            raise InvariantViolation("a tail signature needs n + 1 >= 2 entries")
        if entries[0] != 1 or entries[-1] != 0:
            raise InvariantViolation("tail signature must start at 1 and end at 0")
        for k in range(1, len(entries)):
            if entries[k] > entries[k - 1]:
                raise InvariantViolation(f"tail signature increases at index {k}", index=k)

    @property
    def n(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, k: int) -> Fraction:
        if not 0 <= k <= self.n:
            raise IndexError(f"tail index {k} outside [0, {self.n}]")
        return self.entries[k]

    def __iter__(self):
        return iter(self.entries)


@dataclass(frozen=True)
class SignatureMatrix:
    """Joint signature; ``m[k, l]`` for ``k, l`` in ``1..n``."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(_fractions(r) for r in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InvariantViolation("joint signature must be a nonempty square matrix")
        for k, row in enumerate(rows, start=1):
            for l, v in enumerate(row, start=1):
                if v < 0:
                    raise InvariantViolation(f"joint signature entry ({k}, {l}) is negative", index=(k, l))
        total = sum((sum(r, _ZERO) for r in rows), _ZERO)
        if total != 1:
            raise InvariantViolation(f"joint signature sums to {total}, not 1")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, kl: tuple[int, int]) -> Fraction:
        k, l = kl
        if not (1 <= k <= self.n and 1 <= l <= self.n):
            raise IndexError(f"joint signature index {kl} outside [1, {self.n}]^2")
        return self.entries[k - 1][l - 1]

    def row_sums(self) -> SignatureVector:
        """Signature of the first system."""
        return SignatureVector(tuple(sum(r, _ZERO) for r in self.entries))

    def col_sums(self) -> SignatureVector:
        """Signature of the second system."""
        return SignatureVector(tuple(sum(c, _ZERO) for c in zip(*self.entries)))


@dataclass(frozen=True)
class TailMatrix:
    """Joint tail signature; ``m[k, l]`` for ``k, l`` in ``0..n``."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(_fractions(r) for r in self.entries)
        object.__setattr__(self, "entries", rows)
        size = len(rows)
        if size < 2 or any(len(r) != size for r in rows):
            raise InvariantViolation("joint tail must be a square matrix of order n + 1 >= 2")
        n = size - 1
        if rows[0][0] != 1:
            raise InvariantViolation("joint tail entry (0, 0) must be 1", index=(0, 0))
        for k in range(size):
            if rows[k][n] != 0 or rows[n][k] != 0:
                raise InvariantViolation("joint tail must vanish on the last row and column", index=(k, n))
        for k in range(size):
            for l in range(size):
                if (k and rows[k][l] > rows[k - 1][l]) or (l and rows[k][l] > rows[k][l - 1]):
                    raise InvariantViolation(f"joint tail increases at ({k}, {l})", index=(k, l))

    @property
    def n(self) -> int:
        return len(self.entries) - 1

    def __getitem__(self, kl: tuple[int, int]) -> Fraction:
        k, l = kl
        if not (0 <= k <= self.n and 0 <= l <= self.n):
            raise IndexError(f"joint tail index {kl} outside [0, {self.n}]^2")
        return self.entries[k][l]

    def first_tail(self) -> TailVector:
        """Column 0: tail signature of the first system."""
        return TailVector(tuple(r[0] for r in self.entries))

    def second_tail(self) -> TailVector:
        """Row 0: tail signature of the second system."""
        return TailVector(self.entries[0])


# --------------------------------------------------------------------------
# univariate


def _true_counts(phi: StructureFunction) -> np.ndarray:
    pc = _kernels.popcounts(phi.n)
    return np.bincount(pc[phi.table == 1], minlength=phi.n + 1)


def tail_signature(phi: StructureFunction, q: QualityFunction | None = None) -> TailVector:
    """Tail signature; the structure version when ``q`` is None."""
    n = phi.n
    if q is None:
        counts = _true_counts(phi)
        return TailVector(tuple(Fraction(int(counts[n - k]), comb(n, n - k)) for k in range(n + 1)))
    if q.n != n:
        raise DimensionMismatch(f"quality function has n={q.n}, system has n={n}")
    tail = []
    for k in range(n + 1):
        tail.append(sum((q.value(m) for m in phi.true_masks(n - k)), _ZERO))
    return _checked_tail(tail)


def _checked_tail(tail: list[Fraction]) -> TailVector:
    for k in range(1, len(tail)):
        if tail[k] > tail[k - 1]:
            raise InvariantViolation(f"signature entry {k} would be negative", index=k)
    return TailVector(tuple(tail))


def boland_signature(phi: StructureFunction) -> SignatureVector:
    """Structure signature of ``phi`` (i.i.d. or exchangeable lifetimes)."""
    return signature_from_tail(tail_signature(phi))


def probability_signature(phi: StructureFunction, q: QualityFunction) -> SignatureVector:
    """Probability signature of ``phi`` under relative quality function ``q``."""
    return signature_from_tail(tail_signature(phi, q))


def tail_from_signature(s: SignatureVector) -> TailVector:
    n = s.n
    return TailVector(tuple(sum(s.entries[k:], _ZERO) for k in range(n + 1)))


def signature_from_tail(t: TailVector) -> SignatureVector:
    e = t.entries
    return SignatureVector(tuple(e[k - 1] - e[k] for k in range(1, t.n + 1)))


# --------------------------------------------------------------------------
# joint


def _nested_partners(a: int, a_size: int, b_size: int, n: int):
    """Masks of size ``b_size`` that contain or are contained in ``a``."""
    if b_size <= a_size:
        bits = [1 << i for i in range(n) if a >> i & 1]
        for combo in combinations(bits, b_size):
            yield sum(combo)
    else:
        bits = [1 << i for i in range(n) if not a >> i & 1]
        for combo in combinations(bits, b_size - a_size):
            yield a | sum(combo)


def _generic_tail_row(k, phi1, phi2, q2, true1):
    n = phi1.n
    a_size = n - k
    t2 = phi2.table
    row = []
    for l in range(n + 1):
        b_size = n - l
        total = _ZERO
        for a in true1[a_size]:
            for b in _nested_partners(a, a_size, b_size, n):
                if t2[b]:
                    total += q2.value(a, b)
        row.append(total)
    return row


def joint_tail(
    phi1: StructureFunction,
    phi2: StructureFunction,
    q2: BivariateQuality,
    threads: int = 1,
) -> TailMatrix:
    """Joint tail signature ``P[k, l] = sum q(A, B) phi1(A) phi2(B)``.

    The double sum runs over ``|A| = n - k`` and ``|B| = n - l``; only nested
    pairs are visited since ``q`` vanishes elsewhere. Rows are independent
    and are spread over ``threads`` workers when ``threads > 1``; the result
    does not depend on the number of workers.
    """
    n = _common_n(phi1, phi2)
    if q2.n != n:
        raise DimensionMismatch(f"quality function has n={q2.n}, systems have n={n}")
    true1 = {size: phi1.true_masks(size) for size in range(n + 1)}
    ks = range(n + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda k: _generic_tail_row(k, phi1, phi2, q2, true1), ks))
    else:
        rows = [_generic_tail_row(k, phi1, phi2, q2, true1) for k in ks]
    return _checked_tail_matrix(rows)


def joint_structure_tail(phi1: StructureFunction, phi2: StructureFunction) -> TailMatrix:
    """Joint tail signature for equally likely orderings.

    ``q0`` depends only on the two cardinalities once the sets are nested, so
    each entry is ``q0(a, b)`` times the number of nested true pairs with
    those sizes. The counts come from a ranked subset-sum transform over the
    truth tables; no permutation model is ever built.
    """
    n = _common_n(phi1, phi2)
    below = _kernels.nested_pair_counts(phi1.table, phi2.table, n)  # B <= A
    above = _kernels.nested_pair_counts(phi2.table, phi1.table, n)  # A <= B
    rows = []
    for k in range(n + 1):
        a = n - k
        row = []
        for l in range(n + 1):
            b = n - l
            if b <= a:
                count = int(below[a, b])
                row.append(count * _chain_value(n, (a, b)) if count else _ZERO)
            else:
                count = int(above[b, a])
                row.append(count * _chain_value(n, (b, a)) if count else _ZERO)
        rows.append(row)
    return _checked_tail_matrix(rows)


def _checked_tail_matrix(rows) -> TailMatrix:
    n = len(rows) - 1
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            cell = rows[k - 1][l - 1] - rows[k][l - 1] - rows[k - 1][l] + rows[k][l]
            if cell < 0:
                raise InvariantViolation(f"joint signature entry ({k}, {l}) would be negative", index=(k, l))
    return TailMatrix(tuple(tuple(r) for r in rows))


def _common_n(*phis: StructureFunction) -> int:
    ns = {phi.n for phi in phis}
    if len(ns) != 1:
        raise DimensionMismatch(f"systems have different component counts: {sorted(ns)}")
    return ns.pop()


def joint_from_tail(t: TailMatrix) -> SignatureMatrix:
    e, n = t.entries, t.n
    return SignatureMatrix(
        tuple(
            tuple(e[k - 1][l - 1] - e[k][l - 1] - e[k - 1][l] + e[k][l] for l in range(1, n + 1))
            for k in range(1, n + 1)
        )
    )


def tail_from_joint(m: SignatureMatrix) -> TailMatrix:
    n = m.n
    # 2-D suffix sums over a zero-padded (n+1)x(n+1) grid
    grid = [[_ZERO] * (n + 2) for _ in range(n + 2)]
    for k in range(n, -1, -1):
        for l in range(n, -1, -1):
            cell = m.entries[k][l] if k < n and l < n else _ZERO
            # grid[k][l] = sum of p[i][j] for 0-based i >= k, j >= l
            grid[k][l] = cell + grid[k + 1][l] + grid[k][l + 1] - grid[k + 1][l + 1]
    return TailMatrix(tuple(tuple(grid[k][l] for l in range(n + 1)) for k in range(n + 1)))


def joint_signature(
    phi1: StructureFunction,
    phi2: StructureFunction,
    q2: BivariateQuality | None = None,
    threads: int = 1,
) -> SignatureMatrix:
    """Joint signature; the structure version when ``q2`` is None."""
    if q2 is None:
        return joint_from_tail(joint_structure_tail(phi1, phi2))
    return joint_from_tail(joint_tail(phi1, phi2, q2, threads=threads))


# --------------------------------------------------------------------------
# m systems


def multi_tail(phis: Sequence[StructureFunction], model: PermutationModel | None = None) -> np.ndarray:
    """m-variate tail signature as an object array of shape ``(n + 1,) * m``.

    Entry ``[k1, ..., km]`` sums ``q(A1, ..., Am) phi1(A1) ... phim(Am)`` over
    ``|Ai| = n - ki``. Only chains of nested sets contribute. With
    ``model=None`` the orderings are taken to be equally likely.
    """
    if not phis:
        raise DimensionMismatch("at least one structure function is required")
    n = _common_n(*phis)
    if model is not None and model.n != n:
        raise DimensionMismatch(f"permutation model has n={model.n}, systems have n={n}")
    m = len(phis)
    if (n + 1) ** m > MAX_MULTI_ENTRIES:
        raise SizeLimitExceeded(f"(n + 1)^m = {(n + 1) ** m} entries exceeds {MAX_MULTI_ENTRIES}")
    true_sets = [{size: phi.true_masks(size) for size in range(n + 1)} for phi in phis]
    out = np.empty((n + 1,) * m, dtype=object)
    for ks in product(range(n + 1), repeat=m):
        sizes = [n - k for k in ks]
        if min(sizes) == 0:
            out[ks] = _ZERO
            continue
        order = sorted(range(m), key=lambda i: -sizes[i])
        if model is None:
            count = sum(1 for _ in _chains(order, sizes, phis, true_sets, n))
            out[ks] = count * _chain_value(n, tuple(sizes[i] for i in order)) if count else _ZERO
        else:
            out[ks] = sum((_model_multi_value(model, c) for c in _chains(order, sizes, phis, true_sets, n)), _ZERO)
    return out


def _chains(order, sizes, phis, true_sets, n):
    """Yield nested tuples (largest first) with every member a true set of its system."""

    def rec(pos, parent, acc):
        if pos == len(order):
            yield acc
            return
        i = order[pos]
        size = sizes[i]
        if parent is None:
            candidates = true_sets[i][size]
        elif size == parent.bit_count():
            candidates = [parent] if phis[i].table[parent] else []
        else:
            table = phis[i].table
            candidates = [b for b in _nested_partners(parent, parent.bit_count(), size, n) if table[b]]
        for c in candidates:
            yield from rec(pos + 1, c, acc + [c])

    yield from rec(0, None, [])

