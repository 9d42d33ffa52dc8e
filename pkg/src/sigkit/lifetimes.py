"""Lifetime samplers and Monte Carlo estimators.

Everything in this module is approximate and floating point. Results depend
on ``(seed, count, partitions)`` only: the sample is split into
``partitions`` blocks, each drawn from its own child of
``numpy.random.SeedSequence(seed)``, so the number of worker threads never
changes the output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvariantViolation, OutOfRange, SizeLimitExceeded, TieResampleExhausted
from .quality import MAX_PERMUTATION_N, PermutationModel
from .structure import LifetimeSample, StructureFunction, to_mask

MAX_TIE_REDRAWS = 100


# --------------------------------------------------------------------------
# marginals


def _positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvariantViolation(f"{name} must be finite and strictly positive, got {value}")
    return value


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def sf(self, t):
        return math.exp(-self.rate * t) if t > 0 else 1.0

    def cdf(self, t):
        return -math.expm1(-self.rate * t) if t > 0 else 0.0


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "shape", _positive("shape", self.shape))
        object.__setattr__(self, "scale", _positive("scale", self.scale))

    def sample(self, rng, size):
        return self.scale * rng.weibull(self.shape, size)

    def sf(self, t):
        return math.exp(-((t / self.scale) ** self.shape)) if t > 0 else 1.0

    def cdf(self, t):
        return -math.expm1(-((t / self.scale) ** self.shape)) if t > 0 else 0.0


@dataclass(frozen=True)
class Uniform:
    """Uniform on ``(0, upper)``."""

    upper: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "upper", _positive("upper", self.upper))

    def sample(self, rng, size):
        return rng.uniform(0.0, self.upper, size)

    def cdf(self, t):
        return min(max(t / self.upper, 0.0), 1.0)

    def sf(self, t):
        return 1.0 - self.cdf(t)


Marginal = Exponential | Weibull | Uniform


# --------------------------------------------------------------------------
# lifetime models


@dataclass(frozen=True)
class LifetimeModel:
    """Joint law of the component lifetimes.

    kind
        ``"iid"``: one marginal shared by all components.
        ``"independent"``: one marginal per component.
        ``"exchangeable-mixture"``: pick a marginal by weight, draw an i.i.d.
        vector from it, then shuffle the coordinates uniformly at random.
    """

    n: int
    kind: str
    marginals: tuple
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise OutOfRange(f"n must be positive, got {self.n}")
        if self.kind == "iid":
            if len(self.marginals) != 1:
                raise DimensionMismatch("an iid model takes exactly one marginal")
        elif self.kind == "independent":
            if len(self.marginals) != self.n:
                raise DimensionMismatch(f"independent model needs {self.n} marginals, got {len(self.marginals)}")
        elif self.kind == "exchangeable-mixture":
            if not self.marginals or len(self.weights) != len(self.marginals):
                raise DimensionMismatch("mixture needs one weight per marginal")
            w = np.asarray(self.weights, dtype=float)
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise InvariantViolation(f"mixture weights must be nonnegative and sum to 1, got {w.sum()!r}")
            object.__setattr__(self, "weights", tuple(w / w.sum()))
        else:
            raise InvariantViolation(f"unknown lifetime model kind {self.kind!r}")

    @classmethod
    def iid(cls, n: int, marginal) -> LifetimeModel:
        return cls(n, "iid", (marginal,))

    @classmethod
    def independent(cls, marginals: Sequence) -> LifetimeModel:
        return cls(len(marginals), "independent", tuple(marginals))

    @classmethod
    def exchangeable_mixture(cls, n: int, components: Sequence[tuple[float, object]]) -> LifetimeModel:
        weights, marginals = zip(*components)
        return cls(n, "exchangeable-mixture", tuple(marginals), tuple(float(w) for w in weights))

    def _draw(self, rng, m: int) -> np.ndarray:
        n = self.n
        if self.kind == "iid":
            return self.marginals[0].sample(rng, (m, n))
        if self.kind == "independent":
            out = np.empty((m, n))
            for j, marg in enumerate(self.marginals):
                out[:, j] = marg.sample(rng, m)
            return out
        which = rng.choice(len(self.marginals), size=m, p=self.weights)
        out = np.empty((m, n))
        for c, marg in enumerate(self.marginals):
            rows = np.flatnonzero(which == c)
            if rows.size:
                out[rows] = marg.sample(rng, (rows.size, n))
        return rng.permuted(out, axis=1)


def _bad_rows(x: np.ndarray) -> np.ndarray:
    s = np.sort(x, axis=1)
    return np.flatnonzero(np.any(s[:, 1:] == s[:, :-1], axis=1) | (s[:, 0] <= 0))


def _draw_block(model: LifetimeModel, rng, m: int) -> np.ndarray:
    x = model._draw(rng, m)
    bad = _bad_rows(x)
    redraws = 0
    while bad.size:
        if redraws == MAX_TIE_REDRAWS:
            raise TieResampleExhausted(f"{bad.size} lifetime vectors still tied after {MAX_TIE_REDRAWS} redraws")
        x[bad] = model._draw(rng, bad.size)
        bad = bad[_bad_rows(x[bad])]
        redraws += 1
    return x


def _block_sizes(count: int, partitions: int) -> list[int]:
    base, extra = divmod(count, partitions)
    return [base + (i < extra) for i in range(partitions)]


def _rngs(seed, partitions: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(partitions)]


def _check_counts(count, partitions):
    if count < 1:
        raise OutOfRange(f"sample count must be at least 1, got {count}")
    if partitions < 1:
        raise OutOfRange(f"partition count must be at least 1, got {partitions}")


def sample(model: LifetimeModel, seed: int, count: int, partitions: int = 1) -> np.ndarray:
    """Draw ``count`` tie-free lifetime vectors as a ``(count, n)`` array."""
    _check_counts(count, partitions)
    blocks = [_draw_block(model, rng, m) for rng, m in zip(_rngs(seed, partitions), _block_sizes(count, partitions))]
    return np.concatenate(blocks, axis=0)


def iter_samples(model: LifetimeModel, seed: int, count: int, partitions: int = 1) -> Iterator[LifetimeSample]:
    for row in sample(model, seed, count, partitions):
        yield LifetimeSample(tuple(row))


# --------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class EstimateReport:
    estimate: np.ndarray
    n_samples: int
    std_error: np.ndarray
    seed: int
    partitions: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvariantViolation("an estimate needs at least one sample")
        if np.any(np.asarray(self.std_error) < 0):
            raise InvariantViolation("standard errors must be nonnegative")


def _binomial_se(p: np.ndarray, N: int) -> np.ndarray:
    return np.sqrt(p * (1.0 - p) / N)


def _map_blocks(fn, model, seed, count, partitions, threads):
    _check_counts(count, partitions)
    jobs = list(zip(_rngs(seed, partitions), _block_sizes(count, partitions)))
    work = lambda job: fn(_draw_block(model, job[0], job[1]))  # noqa: E731
    if threads > 1 and partitions > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(work, jobs))
    return [work(j) for j in jobs]


def rank_counts(
    model: LifetimeModel,
    phis: Sequence[StructureFunction],
    N: int,
    seed: int,
    partitions: int = 1,
    threads: int = 1,
) -> np.ndarray:
    """Counts of failure-rank tuples; shape ``(n,) * len(phis)``, 0-based axes."""
    n = model.n
    for phi in phis:
        if phi.n != n:
            raise DimensionMismatch(f"system has n={phi.n}, lifetime model has n={n}")
    tables = np.stack([phi.table for phi in phis])
    m = len(phis)
    strides = n ** np.arange(m - 1, -1, -1)

    def count(x):
        codes = (_kernels.system_ranks(tables, x) - 1) @ strides
        return np.bincount(codes, minlength=n**m)

    total = sum(_map_blocks(count, model, seed, N, partitions, threads))
    return total.reshape((n,) * m)


def empirical_signature(model, phi, N, seed, partitions=1, threads=1):
    counts = rank_counts(model, [phi], N, seed, partitions, threads)
    p = counts / N
    return p, EstimateReport(p, N, _binomial_se(p, N), seed, partitions)


def empirical_joint_signature(
    model: LifetimeModel,
    phi1: StructureFunction,
    phi2: StructureFunction,
    N: int,
    seed: int,
    partitions: int = 1,
    threads: int = 1,
) -> tuple[np.ndarray, EstimateReport]:
    """Monte Carlo joint signature.

    Returns an ``(n, n)`` array whose ``[k - 1, l - 1]`` entry estimates the
    probability that the k-th failure kills the first system and the l-th
    failure kills the second, with per-cell binomial standard errors.
    """
    counts = rank_counts(model, [phi1, phi2], N, seed, partitions, threads)
    p = counts / N
    return p, EstimateReport(p, N, _binomial_se(p, N), seed, partitions)


@dataclass(frozen=True)
class EmpiricalPermutationModel:
    """Observed frequencies of lifetime orderings. Approximate by construction."""

    n: int
    counts: dict
    n_samples: int

    def frequency(self, sigma: Sequence[int]) -> float:
        return self.counts.get(tuple(sigma), 0) / self.n_samples

    def std_error(self, sigma: Sequence[int]) -> float:
        p = self.frequency(sigma)
        return math.sqrt(p * (1 - p) / self.n_samples)

    def q(self, subset) -> float:
        """Estimated relative quality of ``subset``."""
        a = to_mask(subset, self.n)
        size = a.bit_count()
        if size in (0, self.n):
            return 1.0
        hits = 0
        for sigma, c in self.counts.items():
            if to_mask(sigma[self.n - size :], self.n) == a:
                hits += c
        return hits / self.n_samples

    def to_rational(self) -> PermutationModel:
        """The frequencies as an exact model (counts over N)."""
        return PermutationModel(self.n, {s: Fraction(c, self.n_samples) for s, c in self.counts.items()})


def empirical_permutation_model(
    model: LifetimeModel, N: int, seed: int, partitions: int = 1, threads: int = 1
) -> EmpiricalPermutationModel:
    n = model.n
    if n > MAX_PERMUTATION_N:
        raise SizeLimitExceeded(f"ordering frequencies are limited to n <= {MAX_PERMUTATION_N}")
    weights = n ** np.arange(n - 1, -1, -1)

    def count(x):
        codes = np.argsort(x, axis=1) @ weights
        return np.unique(codes, return_counts=True)

    totals: dict[int, int] = {}
    for codes, cnt in _map_blocks(count, model, seed, N, partitions, threads):
        for c, k in zip(codes.tolist(), cnt.tolist()):
            totals[c] = totals.get(c, 0) + k
    counts = {}
    for code, k in totals.items():
        digits = []
        for _ in range(n):
            code, d = divmod(code, n)
            digits.append(d + 1)
        counts[tuple(reversed(digits))] = k
    return EmpiricalPermutationModel(n, counts, N)
