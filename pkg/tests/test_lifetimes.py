from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest

from sigkit.errors import DimensionMismatch, InvariantViolation, OutOfRange, SizeLimitExceeded, TieResampleExhausted
from sigkit.lifetimes import (
    EstimateReport,
    Exponential,
    LifetimeModel,
    Uniform,
    Weibull,
    empirical_joint_signature,
    empirical_permutation_model,
    empirical_signature,
    iter_samples,
    rank_counts,
    sample,
)
from sigkit.structure import from_min_path_sets, series, system_lifetime

GOLDEN_SEED = 20240917
# first three vectors for iid exponential(1), n = 4, one partition
GOLDEN_FIRST3 = [
    [0.5469811243053073, 0.08735981784640638, 1.6049121466857816, 0.545505738672217],
    [0.012642043305961023, 0.5660553907120087, 0.5434692434474201, 0.4991999872667937],
    [1.4828519954113437, 8.869353557477796, 1.8395436645797822, 0.7030964197635885],
]


def within(est, exact, se, bands=3.0):
    return abs(est - exact) <= bands * se


def test_golden_stream():
    x = sample(LifetimeModel.iid(4, Exponential(1.0)), GOLDEN_SEED, 3)
    assert x.tolist() == GOLDEN_FIRST3


def test_determinism_and_partitions():
    model = LifetimeModel.iid(3, Weibull(2.0))
    a = sample(model, 7, 1000, partitions=4)
    b = sample(model, 7, 1000, partitions=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(model, 8, 1000, partitions=4))
    assert a.shape == (1000, 3)


def test_threads_do_not_change_estimates(phi1, phi2):
    model = LifetimeModel.iid(4, Exponential(1.0))
    c1 = rank_counts(model, [phi1, phi2], 20000, seed=3, partitions=4, threads=1)
    c4 = rank_counts(model, [phi1, phi2], 20000, seed=3, partitions=4, threads=4)
    assert np.array_equal(c1, c4)
    assert c1.sum() == 20000


def test_independent_means():
    N = 100_000
    x = sample(LifetimeModel.independent([Exponential(1.0), Exponential(2.0)]), 11, N)
    for j, mean in enumerate((1.0, 0.5)):
        se = x[:, j].std(ddof=1) / np.sqrt(N)
        assert within(x[:, j].mean(), mean, se)


def test_mixture_order_is_fair():
    N = 100_000
    model = LifetimeModel.exchangeable_mixture(2, [(0.3, Exponential(1.0)), (0.7, Exponential(5.0))])
    x = sample(model, 12, N)
    p = np.mean(x[:, 0] < x[:, 1])
    assert within(p, 0.5, np.sqrt(0.25 / N))


def test_samples_are_tie_free_and_positive():
    x = sample(LifetimeModel.iid(5, Uniform(1.0)), 2, 10_000)
    s = np.sort(x, axis=1)
    assert (s[:, 0] > 0).all() and (np.diff(s, axis=1) > 0).all()


@dataclass(frozen=True)
class _Constant:
    value: float = 1.0

    def sample(self, rng, size):
        return np.full(size, self.value)


def test_tie_resample_exhausted():
    with pytest.raises(TieResampleExhausted):
        sample(LifetimeModel.iid(2, _Constant()), 0, 5)


def test_iter_samples():
    rows = list(iter_samples(LifetimeModel.iid(2, Exponential(1.0)), 0, 4))
    assert len(rows) == 4 and rows[0].n == 2


def test_model_validation():
    with pytest.raises(InvariantViolation):
        Exponential(0.0)
    with pytest.raises(InvariantViolation):
        Weibull(-1.0)
    with pytest.raises(DimensionMismatch):
        LifetimeModel(3, "independent", (Exponential(1.0),))
    with pytest.raises(InvariantViolation):
        LifetimeModel.exchangeable_mixture(2, [(0.5, Exponential(1.0)), (0.6, Exponential(2.0))])
    with pytest.raises(InvariantViolation):
        LifetimeModel(2, "copula", (Exponential(1.0),))
    with pytest.raises(OutOfRange):
        sample(LifetimeModel.iid(2, Exponential(1.0)), 0, 0)


def test_marginal_functions():
    e = Exponential(2.0)
    assert e.sf(0.5) == pytest.approx(np.exp(-1.0))
    assert e.cdf(0.0) == 0.0 and e.sf(-1.0) == 1.0
    w = Weibull(2.0, 3.0)
    assert w.sf(3.0) == pytest.approx(np.exp(-1.0))
    u = Uniform(2.0)
    assert u.cdf(0.5) == 0.25 and u.sf(3.0) == 0.0


def test_empirical_joint_signature_sums_to_one(phi1, phi2):
    p, rep = empirical_joint_signature(LifetimeModel.iid(4, Exponential(1.0)), phi1, phi2, 10_000, seed=1)
    assert p.shape == (4, 4)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert isinstance(rep, EstimateReport) and rep.n_samples == 10_000
    assert (rep.std_error >= 0).all()


def test_identical_systems_on_diagonal(phi2):
    p, _ = empirical_joint_signature(LifetimeModel.iid(4, Exponential(1.0)), phi2, phi2, 10_000, seed=1)
    assert np.count_nonzero(p - np.diag(np.diag(p))) == 0


def test_counterexample_ranks():
    # phi1 = x1 dies first exactly when T1 < T2; Pr = rate1 / (rate1 + rate2) = 1/3
    N = 200_000
    model = LifetimeModel.independent([Exponential(1.0), Exponential(2.0)])
    p, rep = empirical_joint_signature(model, from_min_path_sets(2, [[1]]), series(2), N, seed=4)
    assert within(p[0, 0], 1 / 3, rep.std_error[0, 0])
    assert within(p[1, 0], 2 / 3, rep.std_error[1, 0])
    assert p[0, 1] == p[1, 1] == 0


def test_empirical_signature_matches_scalar_ranks(phi2):
    model = LifetimeModel.iid(4, Exponential(1.0))
    p, _ = empirical_signature(model, phi2, 500, seed=9, partitions=2)
    ranks = [system_lifetime(phi2, row)[1] for row in sample(model, 9, 500, partitions=2)]
    assert p.tolist() == (np.bincount(ranks, minlength=5)[1:] / 500).tolist()


def test_permutation_frequencies_iid():
    N = 1_000_000
    emp = empirical_permutation_model(LifetimeModel.iid(3, Exponential(1.0)), N, seed=5, partitions=4, threads=2)
    assert len(emp.counts) == 6
    for sigma in emp.counts:
        assert within(emp.frequency(sigma), 1 / 6, np.sqrt((1 / 6) * (5 / 6) / N))


def test_permutation_frequencies_independent():
    N = 200_000
    emp = empirical_permutation_model(LifetimeModel.independent([Exponential(1.0), Exponential(2.0)]), N, seed=6)
    se = np.sqrt((2 / 9) / N)
    assert within(emp.frequency((1, 2)), 1 / 3, se)
    assert within(emp.q([2]), 1 / 3, se)
    assert within(emp.q([1]), 2 / 3, se)
    assert emp.q([]) == emp.q([1, 2]) == 1.0
    exact = emp.to_rational()
    assert exact.probs[(1, 2)] == Fraction(emp.counts[(1, 2)], N)


def test_permutation_frequencies_size_limit():
    with pytest.raises(SizeLimitExceeded):
        empirical_permutation_model(LifetimeModel.iid(9, Exponential(1.0)), 10, seed=0)


def test_rank_counts_dimension_check(phi1):
    with pytest.raises(DimensionMismatch):
        rank_counts(LifetimeModel.iid(3, Exponential(1.0)), [phi1], 10, seed=0)
