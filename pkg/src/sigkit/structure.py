"""Semicoherent structure functions stored as dense truth tables.

A subset ``A`` of the components ``[n] = {1, ..., n}`` is encoded as the
n-bit mask with bit ``i - 1`` set for each component ``i`` in ``A``. Every
public function that takes a subset accepts either an iterable of 1-indexed
components or, where documented, the raw mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyPathList,
    InvariantViolation,
    NotSemicoherent,
    OutOfRange,
    PathOutOfRange,
    SizeLimitExceeded,
)

MAX_COMPONENTS = 24


def to_mask(subset: Iterable[int], n: int, error=PathOutOfRange) -> int:
    mask = 0
    for i in subset:
        if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= n:
            raise error(f"component {i!r} is not in [1, {n}]")
        mask |= 1 << (int(i) - 1)
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def _sorted(mask: int) -> tuple[int, ...]:
    return tuple(sorted(from_mask(mask)))


def masks_of_size(n: int, k: int) -> Iterator[int]:
    """Masks of all k-element subsets of [n], in combinations order."""
    for combo in combinations(range(n), k):
        m = 0
        for i in combo:
            m |= 1 << i
        yield m


def _check_n(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise OutOfRange(f"component count must be a positive integer, got {n!r}")
    if n > MAX_COMPONENTS:
        raise SizeLimitExceeded(f"n={n} exceeds the truth-table limit of {MAX_COMPONENTS}")
    return int(n)


class StructureFunction:
    """Validated semicoherent structure function on ``n`` components.

    Instances are immutable; ``table`` is a read-only uint8 array of length
    ``2**n`` indexed by subset mask. Calling the instance with an iterable of
    1-indexed components returns 0 or 1.
    """

    __slots__ = ("n", "table", "_hash")

    def __init__(self, n: int, table):
        n = _check_n(n)
        arr = np.array(table, dtype=np.uint8).ravel()
        if arr.shape[0] != 1 << n:
            raise DimensionMismatch(f"truth table for n={n} needs {1 << n} entries, got {arr.shape[0]}")
        if np.any(arr > 1):
            raise NotSemicoherent("truth table entries must be 0 or 1")
        _validate(n, arr)
        arr.setflags(write=False)
        self.n = n
        self.table = arr
        self._hash = hash((n, arr.tobytes()))

    def __call__(self, subset: Iterable[int]) -> int:
        return int(self.table[to_mask(subset, self.n)])

    def value(self, mask: int) -> int:
        return int(self.table[mask])

    def __eq__(self, other):
        if not isinstance(other, StructureFunction):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.table, other.table))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        paths = [sorted(p) for p in self.minimal_path_sets()]
        return f"StructureFunction(n={self.n}, min_paths={paths})"

    def __and__(self, other: StructureFunction) -> StructureFunction:
        _same_n(self, other)
        return StructureFunction(self.n, self.table & other.table)

    def __or__(self, other: StructureFunction) -> StructureFunction:
        _same_n(self, other)
        return StructureFunction(self.n, self.table | other.table)

    def true_masks(self, size: int) -> list[int]:
        """Masks ``A`` with ``|A| = size`` and ``phi(A) = 1``."""
        t = self.table
        return [m for m in masks_of_size(self.n, size) if t[m]]

    def minimal_path_masks(self) -> list[int]:
        masks = np.arange(1 << self.n, dtype=np.int64)
        minimal = self.table.astype(bool)
        for i in range(self.n):
            bit = 1 << i
            has = (masks & bit) != 0
            minimal &= ~(has & (self.table[masks ^ bit] == 1))
        return [int(m) for m in np.flatnonzero(minimal)]

    def minimal_path_sets(self) -> list[frozenset[int]]:
        return [from_mask(m) for m in self.minimal_path_masks()]

    def truth_table_string(self) -> str:
        return "".join("1" if v else "0" for v in self.table)


def _same_n(a: StructureFunction, b: StructureFunction):
    if a.n != b.n:
        raise DimensionMismatch(f"structure functions have n={a.n} and n={b.n}")


def _validate(n: int, table: np.ndarray) -> None:
    masks = np.arange(1 << n, dtype=np.int64)
    for i in range(n):
        bit = 1 << i
        lower = masks[(masks & bit) == 0]
        bad = np.flatnonzero(table[lower] > table[lower | bit])
        if bad.size:
            a = int(lower[bad[0]])
            raise NotSemicoherent(
                f"not monotone: phi({list(_sorted(a))}) = 1 but phi({list(_sorted(a | bit))}) = 0",
                witness=(_sorted(a), _sorted(a | bit)),
            )
    if table[0] != 0:
        raise NotSemicoherent("phi(empty set) must be 0", witness=())
    if table[-1] != 1:
        raise NotSemicoherent(f"phi([{n}]) must be 1", witness=tuple(range(1, n + 1)))


def from_truth_table(n: int, table) -> StructureFunction:
    """Build a structure function from ``2**n`` values in subset-mask order.

    ``table`` may be a string of ``'0'``/``'1'`` characters or any sequence of
    booleans or 0/1 integers; index 0 is the empty set.
    """
    n = _check_n(n)
    if isinstance(table, str):
        if set(table) - {"0", "1"}:
            raise NotSemicoherent("truth table string may contain only '0' and '1'")
        table = [c == "1" for c in table]
    return StructureFunction(n, table)


def from_min_path_sets(n: int, paths: Sequence[Iterable[int]]) -> StructureFunction:
    """Structure function that is 1 exactly on supersets of some path.

    Paths are deduplicated but need not be minimal.
    """
    n = _check_n(n)
    path_masks = {to_mask(p, n) for p in paths}
    if not path_masks:
        raise EmptyPathList("at least one path set is required")
    if 0 in path_masks:
        raise PathOutOfRange("path sets must be nonempty")
    masks = np.arange(1 << n, dtype=np.int64)
    table = np.zeros(1 << n, dtype=np.uint8)
    for p in path_masks:
        table[(masks & p) == p] = 1
    return StructureFunction(n, table)


def k_out_of_n(n: int, k: int) -> StructureFunction:
    """System that fails at the k-th component failure (lifetime ``T_{k:n}``)."""
    n = _check_n(n)
    if not 1 <= k <= n:
        raise OutOfRange(f"k must be in [1, {n}], got {k}")
    from ._kernels import popcounts

    return StructureFunction(n, (popcounts(n) >= n - k + 1).astype(np.uint8))


def series(n: int) -> StructureFunction:
    return k_out_of_n(n, 1)


def parallel(n: int) -> StructureFunction:
    return k_out_of_n(n, n)


@dataclass(frozen=True)
class LifetimeSample:
    """One realization of the component lifetimes: positive and pairwise distinct."""

    times: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise DimensionMismatch("a lifetime sample needs at least one component")
        if any(not np.isfinite(t) or t <= 0 for t in times):
            raise InvariantViolation("lifetimes must be finite and strictly positive")
        if len(set(times)) != len(times):
            raise InvariantViolation("lifetimes must be pairwise distinct (no ties)")
        object.__setattr__(self, "times", times)

    @property
    def n(self) -> int:
        return len(self.times)

    def order_statistic(self, k: int) -> float:
        """``T_{k:n}``, with ``T_{0:n} = 0``."""
        if not 0 <= k <= self.n:
            raise OutOfRange(f"order statistic index {k} outside [0, {self.n}]")
        return 0.0 if k == 0 else sorted(self.times)[k - 1]


def system_lifetime(phi: StructureFunction, sample) -> tuple[float, int]:
    """Lifetime of the system and the index ``k`` with ``T_S = T_{k:n}``."""
    if not isinstance(sample, LifetimeSample):
        sample = LifetimeSample(tuple(sample))
    if sample.n != phi.n:
        raise DimensionMismatch(f"sample has {sample.n} components, system has {phi.n}")
    alive = (1 << phi.n) - 1
    order = sorted(range(phi.n), key=sample.times.__getitem__)
    for j, comp in enumerate(order, start=1):
        alive ^= 1 << comp
        if not phi.table[alive]:
            return sample.times[comp], j
    raise InvariantViolation("system never failed; phi(empty set) must be 0")  # pragma: no cover
