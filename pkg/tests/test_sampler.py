import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from coupontable.errors import DomainError, MarginOutOfRange, ResourceLimit
from coupontable.exact import cell_pmf, hypergeom_pmf, moments_recursive
from coupontable.model import MarginVector
from coupontable.sampler import (
    IndicatorMatrix,
    birthday_scenario,
    cell_counts,
    decompose,
    decompose_batch,
    histogram,
    hypergeometric,
    sample_cell,
    sample_cells,
    sample_indicator_batch,
    sample_indicators,
    sample_table,
    stream,
)

F = Fraction


def band(p, reps, k=3):
    return k * math.sqrt(p * (1 - p) / reps)


class TestSampleTable:
    def test_margins_hold(self):
        mv = MarginVector(4, (2, 2))
        for seed in range(200):
            t = sample_table(mv, seed)
            assert t[0, 0] + t[0, 1] == 2 and t[0, 0] + t[1, 0] == 2
            assert t.sum() == 4

    def test_margins_three_way(self):
        mv = MarginVector(30, (7, 19, 11))
        for seed in range(50):
            t = sample_table(mv, seed)
            assert t[0].sum() == 7 and t[:, 0].sum() == 11 and t[:, :, 0].sum() == 19

    def test_margins_keep_caller_order(self):
        im = sample_indicators(MarginVector(20, (15, 3, 8)), seed=1)
        assert im.margins == (3, 8, 15)

    def test_all_but_one(self):
        n = 10
        mv = MarginVector(n, (n - 1,) * 4)
        for seed in range(50):
            im = sample_indicators(mv, seed)
            missed = set(np.nonzero(im.J)[1].tolist())
            assert decompose(im).Y == n - len(missed)

    def test_probability_of_one(self):
        mv = MarginVector(4, (2, 2))
        reps = 10**5
        bits = sample_indicator_batch(mv, stream(11), reps)
        x = cell_counts(bits)[:, 0, 0]
        assert abs((x == 1).mean() - 2 / 3) <= band(2 / 3, reps)

    def test_resource_cap(self, monkeypatch):
        import coupontable.sampler as sampler

        monkeypatch.setattr(sampler, "FULL_TABLE_CAP", 100)
        with pytest.raises(ResourceLimit):
            sample_indicators(MarginVector(60, (10, 20)), seed=0)


class TestSampleCell:
    def test_three_collectors(self):
        mv = MarginVector(4, (2, 2, 2))
        reps = 10**5
        x = sample_cells(mv, reps, seed=5)
        for k, p in enumerate((19 / 36, 16 / 36, 1 / 36)):
            assert abs((x == k).mean() - p) <= band(p, reps)

    def test_one_step_chain(self):
        mv = MarginVector(10, (3, 9))
        reps = 50_000
        x = sample_cells(mv, reps, seed=2)
        law = hypergeom_pmf(10, 3, 9)
        for k in law.support():
            p = float(law.prob(k))
            assert abs((x == k).mean() - p) <= band(p, reps, 4)

    def test_deterministic(self):
        mv = MarginVector(100, (30, 40, 50))
        assert sample_cell(mv, 9) == sample_cell(mv, 9)
        assert np.array_equal(sample_cell(mv, 9, size=100), sample_cell(mv, 9, size=100))
        assert np.array_equal(sample_cells(mv, 10_000, 4), sample_cells(mv, 10_000, 4, workers=3))

    def test_in_support(self):
        mv = MarginVector(50, (10, 45, 48))
        x = sample_cells(mv, 20_000, seed=0)
        lo, hi = mv.support
        assert x.min() >= lo and x.max() <= hi

    def test_rejects_invalid(self):
        with pytest.raises(MarginOutOfRange):
            sample_cell(MarginVector(5, (0, 3)), 0)

    @pytest.mark.parametrize("mv", [MarginVector(20, (5, 12, 17)), MarginVector(200, (150, 160)),
                                    MarginVector(10**6, (1000, 1000, 999000))])
    def test_moments_within_four_se(self, mv):
        reps = 50_000
        x = sample_cells(mv, reps, seed=17).astype(float)
        mom = moments_recursive(mv)
        mean, var = float(mom.mean), float(mom.variance)
        assert abs(x.mean() - mean) <= 4 * math.sqrt(var / reps)
        # variance of the sample variance uses the fourth central moment
        p = cell_pmf(mv)
        xs = np.arange(p.lo, p.hi + 1)
        mu4 = float(np.sum(p.as_float() * (xs - mean) ** 4))
        assert abs(x.var(ddof=1) - var) <= 4 * math.sqrt((mu4 - var**2) / reps)

    def test_large_urn_fallback(self):
        rng = stream(1)
        n = 10**12
        x = hypergeometric(rng, n, np.full(20_000, 10**6), 10**6)
        # mean 1, variance about 1
        assert abs(x.mean() - 1) < 4 * math.sqrt(1 / 20_000)

    def test_agrees_with_full_table(self):
        mv = MarginVector(12, (4, 7, 9))
        reps = 100_000
        a = sample_cells(mv, reps, seed=21)
        b = cell_counts(sample_indicator_batch(mv, stream(22), reps))[:, 0, 0, 0]
        ha, hb = histogram(a), histogram(b)
        keys = sorted(set(ha) | set(hb))
        table = np.array([[ha.get(k, 0) for k in keys], [hb.get(k, 0) for k in keys]])
        table = table[:, table.sum(axis=0) >= 5]
        assert stats.chi2_contingency(table)[1] > 0.001


class TestDecompose:
    def test_hand_count(self):
        im = IndicatorMatrix.from_sets(4, [{1, 2}, {2, 3}])
        d = decompose(im)
        assert (d.Y, d.Yp, d.Ypp) == (1, 1, 1)

    def test_full_overlap(self):
        im = IndicatorMatrix.from_sets(6, [{1, 2, 3}] * 3)
        d = decompose(im)
        assert (d.Y, d.Yp) == (3, 0)

    def test_perfect_packing(self):
        d = decompose(IndicatorMatrix.from_sets(5, [{1, 2}, {3, 4, 5}]))
        assert (d.Y, d.Ypp) == (0, 0)

    def test_identities_on_samples(self):
        mv = MarginVector(15, (5, 9, 12, 14))
        bits = sample_indicator_batch(mv, stream(3), 2000)
        Y, Yp, Ypp = decompose_batch(bits)
        x = cell_counts(bits)[:, 0, 0, 0, 0]
        a = np.asarray(mv.a)
        assert np.array_equal(Y, x)
        assert np.array_equal(Yp, a[0] - x)
        assert np.array_equal(Ypp, x + (mv.m - 1) * mv.n - a.sum())

    def test_indicator_validation(self):
        with pytest.raises(DomainError):
            IndicatorMatrix(np.ones((1, 4), dtype=bool))


class TestBirthday:
    def test_two_collectors(self):
        n = 50
        s = birthday_scenario(n, 2, 40_000, seed=1)
        assert abs(s.exact_mean - 1 / n) < 1e-12
        assert abs(s.mean - 1 / n) <= 4 * math.sqrt((1 / n) / 40_000)
        assert set(s.histogram) <= {0, 1}

    def test_vanishing_rate(self):
        n = 10**8
        m = round(n**0.25)
        s = birthday_scenario(n, m, 5000, seed=2)
        assert s.exact_mean < 1e-4 and s.mean < 0.01

    def test_rate_one(self):
        s = birthday_scenario(10**6, 1414, 10**4, seed=7)
        assert abs(s.mean - 0.9997) <= 0.03
        assert abs(s.var - 1.0) <= 0.1

    def test_workers_do_not_matter(self):
        a = birthday_scenario(1000, 40, 3000, seed=4, workers=1)
        b = birthday_scenario(1000, 40, 3000, seed=4, workers=3)
        assert a == b

    def test_domain(self):
        with pytest.raises(DomainError):
            birthday_scenario(10, 1, 10, seed=0)


def test_seed_required():
    with pytest.raises(DomainError):
        stream(None)
