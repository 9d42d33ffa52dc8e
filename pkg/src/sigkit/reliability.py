"""Joint reliability of two systems from the law of the component states.

``X(t)`` is the vector of component states at time ``t`` (bit ``i - 1`` set
when component ``i`` is still working). A component state model gives the
joint law of ``(X(t1), X(t2))``; all reliability values are floats.

Signature matrices enter as exact rationals and are converted to float once
with ``float(Fraction)``, which rounds to nearest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvariantViolation, OutOfRange, SizeLimitExceeded
from .lifetimes import LifetimeModel, sample
from .signature import SignatureMatrix
from .structure import StructureFunction, from_min_path_sets

MAX_DIRECT_N = 12
MAX_CHECK_N = 8


def _as_mask(state, n: int) -> int:
    if isinstance(state, (int, np.integer)):
        return int(state)
    bits = list(state)
    if len(bits) != n:
        raise DimensionMismatch(f"state vector has {len(bits)} entries, expected {n}")
    return sum(1 << i for i, v in enumerate(bits) if v)


def _state_tuple(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(n))


class ComponentStateModel:
    """Joint law of the component states at two times.

    Subclasses implement :meth:`pair_table`, returning the support as three
    parallel arrays ``(x_masks, y_masks, probabilities)``.
    """

    n: int
    kind: str

    def pair_table(self, t1: float, t2: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def prob(self, x, y, t1: float, t2: float) -> float:
        """``Pr(X(t1) = x and X(t2) = y)``."""
        xm, ym = _as_mask(x, self.n), _as_mask(y, self.n)
        xs, ys, ps = self.pair_table(t1, t2)
        hit = (xs == xm) & (ys == ym)
        return float(ps[hit].sum())

    def dense_pair_table(self, t1: float, t2: float) -> np.ndarray:
        """All ``4**n`` probabilities as a ``(2**n, 2**n)`` array indexed ``[x, y]``."""
        size = 1 << self.n
        out = np.zeros((size, size))
        xs, ys, ps = self.pair_table(t1, t2)
        np.add.at(out, (xs, ys), ps)
        return out

    def state_probabilities(self, t: float, later: float | None = None) -> np.ndarray:
        """``Pr(X(t) = x)`` for every mask, marginalizing the pair law at ``(t, later)``."""
        later = t + 1.0 if later is None else later
        xs, _, ps = self.pair_table(t, later)
        return np.bincount(xs, weights=ps, minlength=1 << self.n)

    def check(self, t1: float, t2: float, tol: float = 1e-12) -> None:
        """Raise :class:`InvariantViolation` if the pair law at ``(t1, t2)`` is invalid."""
        xs, ys, ps = self.pair_table(t1, t2)
        if np.any(ps < -tol) or np.any(ps > 1 + tol):
            raise InvariantViolation("state probabilities must lie in [0, 1]")
        if abs(math.fsum(ps) - 1.0) > tol:
            raise InvariantViolation(f"state probabilities sum to {math.fsum(ps)!r}")
        # nonrepairable: the later state vector is below the earlier one
        if t1 <= t2:
            bad = (ys & ~xs) != 0
        else:
            bad = (xs & ~ys) != 0
        if t1 == t2:
            bad |= xs != ys
        if np.any(ps[bad] > tol):
            raise InvariantViolation("a component is repaired between the two times")


def _ternary_digits(n: int) -> np.ndarray:
    codes = np.arange(3**n, dtype=np.int64)
    out = np.empty((3**n, n), dtype=np.int64)
    for i in range(n):
        codes, out[:, i] = np.divmod(codes, 3)
    return out


class _ProductStates(ComponentStateModel):
    """Independent components; each contributes a factor per state pair."""

    marginals: tuple

    def _marginal(self, i):
        raise NotImplementedError

    def pair_table(self, t1, t2):
        n = self.n
        if n > MAX_DIRECT_N:
            raise SizeLimitExceeded(f"pair enumeration is limited to n <= {MAX_DIRECT_N}")
        _check_times(t1, t2)
        early, late = min(t1, t2), max(t1, t2)
        # digit 0: dead at both times; 1: alive only at the earlier time; 2: alive at both
        factors = np.empty((n, 3))
        for i in range(n):
            marg = self._marginal(i)
            s_early, s_late = marg.sf(early), marg.sf(late)
            factors[i] = (1.0 - s_early, s_early - s_late, s_late)
        digits = _ternary_digits(n)
        ps = np.prod(factors[np.arange(n), digits], axis=1)
        bits = 1 << np.arange(n, dtype=np.int64)
        alive_early = ((digits >= 1) * bits).sum(axis=1)
        alive_late = ((digits == 2) * bits).sum(axis=1)
        if t1 <= t2:
            return alive_early, alive_late, ps
        return alive_late, alive_early, ps


def _check_times(t1, t2):
    for t in (t1, t2):
        if not (math.isfinite(t) and t >= 0):
            raise OutOfRange(f"times must be finite and nonnegative, got {t!r}")


class IIDProductStates(_ProductStates):
    kind = "iid-product"

    def __init__(self, n: int, marginal):
        if n < 1:
            raise OutOfRange(f"n must be positive, got {n}")
        self.n = n
        self.marginal = marginal

    def _marginal(self, i):
        return self.marginal

    def __repr__(self):
        return f"IIDProductStates(n={self.n}, marginal={self.marginal!r})"


class IndependentProductStates(_ProductStates):
    kind = "independent-product"

    def __init__(self, marginals: Sequence):
        if not marginals:
            raise OutOfRange("at least one marginal is required")
        self.n = len(marginals)
        self.marginals = tuple(marginals)

    def _marginal(self, i):
        return self.marginals[i]

    def __repr__(self):
        return f"IndependentProductStates({list(self.marginals)!r})"


class EmpiricalStates(ComponentStateModel):
    """State law estimated by counting over a fixed Monte Carlo sample."""

    kind = "empirical"

    def __init__(self, model: LifetimeModel, n_samples: int, seed: int = 0, partitions: int = 1):
        self.n = model.n
        self.model = model
        self.n_samples = n_samples
        self.seed = seed
        self.samples = sample(model, seed, n_samples, partitions)
        self._bits = 1 << np.arange(self.n, dtype=np.int64)

    def pair_table(self, t1, t2):
        _check_times(t1, t2)
        x = (self.samples > t1) @ self._bits
        y = (self.samples > t2) @ self._bits
        codes, counts = np.unique(x * (1 << self.n) + y, return_counts=True)
        return codes >> self.n, codes & ((1 << self.n) - 1), counts / self.n_samples

    def __repr__(self):
        return f"EmpiricalStates({self.model!r}, n_samples={self.n_samples}, seed={self.seed})"


class TabularStates(ComponentStateModel):
    """Explicit pair law at one fixed pair of times.

    ``table`` maps ``(x, y)`` (masks or 0/1 sequences) to probabilities.
    Queries at other times raise :class:`OutOfRange`.
    """

    kind = "tabular"

    def __init__(self, n: int, table: dict, t1: float, t2: float):
        self.n = n
        self.times = (float(t1), float(t2))
        items = [(_as_mask(x, n), _as_mask(y, n), float(p)) for (x, y), p in table.items() if p]
        self._xs = np.array([i[0] for i in items], dtype=np.int64)
        self._ys = np.array([i[1] for i in items], dtype=np.int64)
        self._ps = np.array([i[2] for i in items])
        self.check(t1, t2)

    def pair_table(self, t1, t2):
        if (float(t1), float(t2)) != self.times:
            raise OutOfRange(f"tabular model is defined only at times {self.times}")
        return self._xs, self._ys, self._ps


# --------------------------------------------------------------------------
# reliability


def _same_n(states: ComponentStateModel, *phis: StructureFunction) -> int:
    for phi in phis:
        if phi.n != states.n:
            raise DimensionMismatch(f"system has n={phi.n}, state model has n={states.n}")
    return states.n


def joint_reliability_direct(
    phi1: StructureFunction, phi2: StructureFunction, states: ComponentStateModel, t1: float, t2: float
) -> float:
    """``Pr(T_S1 > t1 and T_S2 > t2)`` summed over component state pairs."""
    n = _same_n(states, phi1, phi2)
    if n > MAX_DIRECT_N:
        raise SizeLimitExceeded(f"direct evaluation is limited to n <= {MAX_DIRECT_N}")
    xs, ys, ps = states.pair_table(t1, t2)
    keep = (phi1.table[xs] == 1) & (phi2.table[ys] == 1)
    return math.fsum(ps[keep])


def _iid_order_stat(n, k, l, marginal, t1, t2):
    # a: dead by the earlier time, b: dies in between, c: alive at the later time
    early, late = min(t1, t2), max(t1, t2)
    a = marginal.cdf(early)
    c = marginal.sf(late)
    b = max(1.0 - a - c, 0.0)
    need_early, need_late = (n - k + 1, n - l + 1) if t1 <= t2 else (n - l + 1, n - k + 1)
    terms = []
    nf = factorial(n)
    for m in range(need_late, n + 1):
        for j in range(max(need_early - m, 0), n - m + 1):
            i = n - j - m
            coef = nf // (factorial(i) * factorial(j) * factorial(m))
            terms.append(coef * a**i * b**j * c**m)
    return math.fsum(terms)


def order_stat_joint_reliability(
    n: int, k: int, l: int, states: ComponentStateModel, t1: float, t2: float
) -> float:
    """``Pr(T_{k:n} > t1 and T_{l:n} > t2)``.

    Closed multinomial form for i.i.d. product states, otherwise the sum of
    the pair law over ``|x| >= n - k + 1`` and ``|y| >= n - l + 1``.
    """
    if states.n != n:
        raise DimensionMismatch(f"state model has n={states.n}, expected {n}")
    if not (1 <= k <= n and 1 <= l <= n):
        raise OutOfRange(f"order statistic indices ({k}, {l}) outside [1, {n}]")
    if isinstance(states, IIDProductStates):
        _check_times(t1, t2)
        return _iid_order_stat(n, k, l, states.marginal, t1, t2)
    xs, ys, ps = states.pair_table(t1, t2)
    pc = _kernels.popcounts(n)
    keep = (pc[xs] >= n - k + 1) & (pc[ys] >= n - l + 1)
    return math.fsum(ps[keep])


@dataclass(frozen=True)
class JointReliabilitySurface:
    evaluator: Callable[[float, float], float]
    metadata: dict = field(default_factory=dict)

    def __call__(self, t1: float, t2: float) -> float:
        return self.evaluator(t1, t2)

    def grid(self, t1s: Sequence[float], t2s: Sequence[float]) -> np.ndarray:
        return np.array([[self(a, b) for b in t2s] for a in t1s])


def direct_surface(phi1, phi2, states) -> JointReliabilitySurface:
    return JointReliabilitySurface(
        lambda t1, t2: joint_reliability_direct(phi1, phi2, states, t1, t2),
        {"method": "direct", "states": repr(states)},
    )


class OrderStatisticSurfaces:
    """Factory ``(k, l) -> surface of Pr(T_{k:n} > t1 and T_{l:n} > t2)``."""

    def __init__(self, states: ComponentStateModel):
        self.states = states
        self.n = states.n

    def __call__(self, k: int, l: int) -> JointReliabilitySurface:
        n, states = self.n, self.states
        return JointReliabilitySurface(
            lambda t1, t2: order_stat_joint_reliability(n, k, l, states, t1, t2),
            {"method": "order-statistics", "k": k, "l": l, "states": repr(states)},
        )


def decompose_joint_reliability(
    s: SignatureMatrix, orderstats: Callable[[int, int], JointReliabilitySurface], t1: float, t2: float
) -> float:
    """``sum_{k,l} s[k, l] * Pr(T_{k:n} > t1 and T_{l:n} > t2)``."""
    n = s.n
    if getattr(orderstats, "n", n) != n:
        raise DimensionMismatch(f"signature has n={n}, order statistics have n={orderstats.n}")
    terms = []
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            w = float(s[k, l])
            if w:
                terms.append(w * orderstats(k, l)(t1, t2))
    return math.fsum(terms)


# --------------------------------------------------------------------------
# exchangeability checks


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a permutation-invariance check.

    ``witness`` is None when the check holds; otherwise a dict with the
    state vectors, the permutation ``sigma`` (as ``(sigma(1), ..., sigma(n))``)
    and both probabilities.
    """

    holds: bool
    witness: dict | None = None
    max_deviation: float = 0.0

    def __bool__(self):
        return self.holds


def _permutation_between(types_from: Sequence, types_to: Sequence) -> tuple[int, ...]:
    """``sigma`` with ``types_to[sigma(i)] == types_from[i]`` (1-indexed result)."""
    slots: dict = {}
    for j, t in enumerate(types_to):
        slots.setdefault(t, []).append(j)
    sigma = [0] * len(types_from)
    for i, t in enumerate(types_from):
        sigma[i] = slots[t].pop(0) + 1
    return tuple(sigma)


def apply_permutation(sigma: Sequence[int], x: Sequence[int]) -> tuple[int, ...]:
    """``sigma(x)``: the entry of ``x`` at position ``i`` moves to position ``sigma(i)``."""
    out = [0] * len(x)
    for i, target in enumerate(sigma):
        out[target - 1] = x[i]
    return tuple(out)


def _orbit_check(probs, keys, n_samples, tol, bands):
    """Scan orbits (equal ``keys``) for nonconstant ``probs``.

    Returns ``(first_bad_index_pair or None, max_deviation)``.
    """
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    starts = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1]])
    ends = np.r_[starts[1:], sk.size]
    worst = 0.0
    first = None
    for s0, e0 in zip(starts, ends):
        idx = order[s0:e0]
        if idx.size < 2:
            continue
        p = probs[idx]
        if n_samples is None:
            dev = float(p.max() - p.min())
            worst = max(worst, dev)
            bad = dev > tol
            ref, other = idx[np.argmin(p)], idx[np.argmax(p)]
        else:
            mean = p.mean()
            se = math.sqrt(mean * (1 - mean) / n_samples)
            z = np.abs(p - mean) / se if se > 0 else np.where(p != mean, np.inf, 0.0)
            worst = max(worst, float(z.max()))
            bad = z.max() > bands
            ref, other = idx[np.argmin(p)], idx[np.argmax(p)]
        if bad and first is None:
            first = (int(ref), int(other))
    return first, worst


def check_condition_12(
    states: ComponentStateModel, t1: float, t2: float, tol: float = 1e-12, bands: float = 3.0
) -> CheckResult:
    """Is the pair law invariant under simultaneous permutation of ``x`` and ``y``?

    Two pairs are related by some permutation exactly when they have the
    same counts of the four per-component state patterns, so the check
    compares probabilities within each such class. Analytic models use the
    absolute tolerance ``tol``; empirical models allow ``bands`` binomial
    standard errors around the class mean. ``max_deviation`` is in
    probability units for analytic models and in standard errors otherwise.
    """
    n = states.n
    if n > MAX_CHECK_N:
        raise SizeLimitExceeded(f"permutation checks are limited to n <= {MAX_CHECK_N}")
    size = 1 << n
    dense = states.dense_pair_table(t1, t2).ravel()
    codes = np.arange(size * size, dtype=np.int64)
    x, y = codes >> n, codes & (size - 1)
    pc = _kernels.popcounts(n)
    full = size - 1
    keys = (pc[x & y] * (n + 1) + pc[x & (full ^ y)]) * (n + 1) + pc[(full ^ x) & y]
    n_samples = getattr(states, "n_samples", None)
    bad, worst = _orbit_check(dense, keys, n_samples, tol, bands)
    if bad is None:
        return CheckResult(True, None, worst)
    a, b = bad
    xa, ya, xb, yb = (_state_tuple(int(v), n) for v in (x[a], y[a], x[b], y[b]))
    sigma = _permutation_between(list(zip(xa, ya)), list(zip(xb, yb)))
    return CheckResult(
        False,
        {
            "x": xa,
            "y": ya,
            "sigma": sigma,
            "sigma_x": apply_permutation(sigma, xa),
            "sigma_y": apply_permutation(sigma, ya),
            "p": float(dense[a]),
            "p_sigma": float(dense[b]),
        },
        worst,
    )


def check_state_exchangeability(
    states: ComponentStateModel, t: float, later: float | None = None, tol: float = 1e-12, bands: float = 3.0
) -> CheckResult:
    """Are the component states at time ``t`` exchangeable?

    The law of ``X(t)`` is obtained by marginalizing the pair law at
    ``(t, later)``; ``later`` defaults to ``t + 1``.
    """
    n = states.n
    if n > MAX_CHECK_N:
        raise SizeLimitExceeded(f"permutation checks are limited to n <= {MAX_CHECK_N}")
    probs = states.state_probabilities(t, later)
    keys = _kernels.popcounts(n)
    n_samples = getattr(states, "n_samples", None)
    bad, worst = _orbit_check(probs, keys, n_samples, tol, bands)
    if bad is None:
        return CheckResult(True, None, worst)
    a, b = bad
    xa, xb = _state_tuple(a, n), _state_tuple(b, n)
    sigma = _permutation_between(xa, xb)
    return CheckResult(
        False,
        {"x": xa, "sigma": sigma, "sigma_x": apply_permutation(sigma, xa), "p": float(probs[a]), "p_sigma": float(probs[b])},
        worst,
    )


def exponential_counterexample():
    """Two systems on two independent exponential components (rates 1 and 2).

    The first system is component 1 alone, the second is the series of both.
    Returns ``(phi1, phi2, states)``.
    """
    from .lifetimes import Exponential

    phi1 = from_min_path_sets(2, [[1]])
    phi2 = from_min_path_sets(2, [[1, 2]])
    return phi1, phi2, IndependentProductStates([Exponential(1.0), Exponential(2.0)])


__all__ = [
    "CheckResult",
    "ComponentStateModel",
    "EmpiricalStates",
    "IIDProductStates",
    "IndependentProductStates",
    "JointReliabilitySurface",
    "OrderStatisticSurfaces",
    "TabularStates",
    "apply_permutation",
    "check_condition_12",
    "check_state_exchangeability",
    "decompose_joint_reliability",
    "direct_surface",
    "exponential_counterexample",
    "joint_reliability_direct",
    "order_stat_joint_reliability",
]
