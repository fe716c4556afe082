import math

import numpy as np
import pytest
from scipy import stats

from appletasting.pg import pg_mean, pg_series_mean, pg_series_oracle, sample_pg, sample_pg_many


def _mean_and_se(x):
    return x.mean(), x.std(ddof=1) / math.sqrt(len(x))


def test_symmetric_in_c():
    a = sample_pg_many(np.full(10_000, 1.7), np.random.default_rng(1))
    b = sample_pg_many(np.full(10_000, -1.7), np.random.default_rng(2))
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_same_seed_same_draw():
    assert sample_pg(0.3, np.random.default_rng(7)) == sample_pg(0.3, np.random.default_rng(7))
    np.testing.assert_array_equal(
        sample_pg_many(np.linspace(-3, 3, 50), np.random.default_rng(3)),
        sample_pg_many(np.linspace(-3, 3, 50), np.random.default_rng(3)),
    )


@pytest.mark.parametrize("c", [0.0, 2.0])
def test_mean_matches_series_oracle(c):
    # expectation of the 10^3-term series: (1/2pi^2) sum_k 1/((k-1/2)^2 + c^2/4pi^2)
    target = pg_series_mean(c, 1000)
    m, se = _mean_and_se(sample_pg_many(np.full(100_000, c), np.random.default_rng(11)))
    assert abs(m - target) < 3 * se


def test_series_mean_converges_to_closed_form():
    for c in [0.0, 0.5, 1.0, 2.0, 5.0]:
        assert pg_series_mean(c, 10_000) == pytest.approx(pg_mean(c), abs=1e-5)
    assert pg_mean(0.0) == 0.25


def test_oracle_single_term_arithmetic():
    value = pg_series_oracle(0.0, 1, np.random.default_rng(0), gammas=np.array([1.0]))
    assert value == pytest.approx(2 / math.pi**2)


def test_oracle_matches_sampler_ks():
    rng = np.random.default_rng(5)
    a = sample_pg_many(np.full(10_000, 1.0), rng)
    b = pg_series_oracle(1.0, 1000, rng, size=10_000)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_oracle_mean_decreases_with_c():
    rng = np.random.default_rng(9)
    m0 = pg_series_oracle(0.0, 200, rng, size=100_000).mean()
    m3 = pg_series_oracle(3.0, 200, rng, size=100_000).mean()
    assert m3 < m0


def test_extreme_tilts_are_positive_and_finite():
    x = sample_pg_many(np.array([0.0, 1e-8, 50.0, -300.0, 1e4]), np.random.default_rng(0))
    assert np.all(x > 0) and np.all(np.isfinite(x))
    big = sample_pg_many(np.full(20_000, 300.0), np.random.default_rng(4))
    m, se = _mean_and_se(big)
    assert abs(m - pg_mean(300.0)) < 4 * se


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        sample_pg(float("nan"), np.random.default_rng(0))
    with pytest.raises(ValueError):
        sample_pg_many([1.0, float("inf")], np.random.default_rng(0))
    with pytest.raises(ValueError):
        pg_series_oracle(1.0, 0, np.random.default_rng(0))
