import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import enumerate_cell_law, enumerate_hypergeom, mean_var

from coupontable.errors import DomainError, ResourceLimit
from coupontable.exact import (
    EXACT,
    LOGFLOAT,
    Pmf,
    cell_pmf,
    hypergeom_pmf,
    moments_recursive,
    variance_m2,
)
from coupontable.model import MarginVector

F = Fraction


class TestHypergeom:
    def test_enumerated_value(self):
        # 10/21 from enumerating all C(10,5) = 252 draws
        p = hypergeom_pmf(10, 4, 5)
        assert p.prob(2) == F(10, 21)
        assert p.support() == range(0, 5)

    def test_no_successes(self):
        p = hypergeom_pmf(10, 0, 5)
        assert p.offset == 0 and p.probs == (F(1),)

    def test_small_enumerated_law(self):
        assert hypergeom_pmf(4, 2, 2).probs == (F(1, 6), F(4, 6), F(1, 6))

    @pytest.mark.parametrize("n,k,d", [(7, 3, 4), (8, 8, 3), (9, 2, 9), (6, 5, 4)])
    def test_matches_enumeration(self, n, k, d):
        law = enumerate_hypergeom(n, k, d)
        p = hypergeom_pmf(n, k, d)
        assert {x: p.prob(x) for x in p.support()} == law

    def test_float_mode(self):
        p = hypergeom_pmf(1000, 300, 400, mode=LOGFLOAT)
        e = hypergeom_pmf(1000, 300, 400, mode=EXACT)
        diff = sum(abs(float(e.prob(x)) - float(p.prob(x))) for x in e.support())
        assert diff < 1e-12

    @pytest.mark.parametrize("args", [(-1, 2, 2), (5, 6, 2), (5, 2, -1), (5, 2, 6)])
    def test_domain_errors(self, args):
        with pytest.raises(DomainError):
            hypergeom_pmf(*args)


class TestCellPmf:
    def test_two_collectors(self):
        assert cell_pmf(MarginVector(4, (2, 2))).probs == (F(1, 6), F(4, 6), F(1, 6))

    def test_three_collectors(self):
        p = cell_pmf(MarginVector(4, (2, 2, 2)))
        assert p.offset == 0 and p.probs == (F(19, 36), F(16, 36), F(1, 36))

    def test_large_margins(self):
        # enumerated over 210 * 10 * 10 subset triples
        p = cell_pmf(MarginVector(10, (4, 9, 9)))
        assert p.offset == 2
        assert p.probs == (F(3, 25), F(13, 25), F(9, 25))

    @pytest.mark.parametrize("n,a", [(5, (2, 3, 4)), (6, (3, 3)), (6, (1, 5, 5)), (5, (4, 4, 4)), (7, (3, 2))])
    def test_matches_enumeration(self, n, a):
        law = enumerate_cell_law(n, a)
        p = cell_pmf(MarginVector(n, a), mode=EXACT)
        assert {x: p.prob(x) for x in p.support()} == law

    def test_support_bounds(self):
        for n in range(2, 8):
            for a in itertools.combinations_with_replacement(range(1, n), 3):
                mv = MarginVector(n, a)
                p = cell_pmf(mv)
                assert p.lo == max(0, sum(a) - 2 * n)
                assert p.hi == a[0]

    @given(st.integers(2, 9).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n - 1), min_size=2, max_size=4))),
           st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_permutation_invariance(self, args, rnd):
        n, a = args
        shuffled = list(a)
        rnd.shuffle(shuffled)
        assert cell_pmf(MarginVector(n, tuple(a))) == cell_pmf(MarginVector(n, tuple(shuffled)))

    def test_permutation_invariance_before_sorting(self):
        # the chain run in the caller's order gives the same law as the sorted one
        mv = MarginVector(9, (2, 7, 5))
        orders = {tuple(o) for o in itertools.permutations(mv.a)}
        laws = set()
        for o in orders:
            laws.add(_chain_in_order(9, o))
        assert len(laws) == 1
        assert laws.pop() == tuple(cell_pmf(mv).probs)

    def test_float_matches_exact(self):
        for a in [(30, 40, 50), (5, 990, 995), (1000, 1000, 998968)]:
            n = 10**6 if a[-1] > 1000 else 1000
            mv = MarginVector(n, a)
            e = cell_pmf(mv, mode=EXACT)
            f = cell_pmf(mv, mode=LOGFLOAT)
            tv = 0.5 * sum(abs(float(e.prob(x)) - float(f.prob(x))) for x in e.support())
            assert tv < 1e-10
            assert abs(f.total() - 1) < 1e-12

    def test_support_cap(self):
        with pytest.raises(ResourceLimit):
            cell_pmf(MarginVector(10**6, (5000, 6000)), support_cap=1000)

    def test_auto_mode(self):
        assert cell_pmf(MarginVector(100, (5, 6))).mode == EXACT
        assert cell_pmf(MarginVector(10**5, (5, 6))).mode == LOGFLOAT


def _chain_in_order(n, order):
    """Exact chain without sorting, via the hypergeometric pmf."""
    law = {order[0]: F(1)}
    for ak in order[1:]:
        nxt = {}
        for x, w in law.items():
            h = hypergeom_pmf(n, x, ak)
            for y in h.support():
                nxt[y] = nxt.get(y, F(0)) + w * h.prob(y)
        law = {y: p for y, p in nxt.items() if p}
    lo, hi = min(law), max(law)
    return tuple(law.get(y, F(0)) for y in range(lo, hi + 1))


class TestMoments:
    def test_two_collectors(self):
        mom = moments_recursive(MarginVector(10, (4, 5)))
        assert mom.E == (4, 2) and mom.V == (0, F(2, 3))

    def test_three_collectors(self):
        # 384/900 + (30/90)(2/3) by hand
        mom = moments_recursive(MarginVector(10, (4, 5, 6)))
        assert mom.E == (4, 2, F(6, 5))
        assert mom.V[-1] == F(146, 225)

    def test_enumerated_instance(self):
        law = enumerate_cell_law(6, (2, 3, 3))
        mom = moments_recursive(MarginVector(6, (2, 3, 3)))
        assert (mom.mean, mom.variance) == mean_var(law) == (F(1, 2), F(33, 100))

    def test_single_coupon(self):
        assert moments_recursive(MarginVector(10, (1, 5))).variance == F(1, 4)

    def test_sequence_invariants(self):
        mom = moments_recursive(MarginVector(50, (10, 20, 30, 49)))
        assert mom.E[0] == 10 and mom.V[0] == 0
        assert all(e1 > e2 for e1, e2 in zip(mom.E, mom.E[1:]))
        assert all(v >= 0 for v in mom.V)

    @given(st.integers(2, 12).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, n - 1), min_size=2, max_size=4))))
    @settings(max_examples=80, deadline=None)
    def test_pmf_moments_agree(self, args):
        n, a = args
        mv = MarginVector(n, tuple(a))
        p = cell_pmf(mv, mode=EXACT)
        mom = moments_recursive(mv)
        assert p.mean() == mom.mean and p.var() == mom.variance


class TestVarianceM2:
    def test_value(self):
        assert variance_m2(10, 4, 5) == F(2, 3)

    @pytest.mark.parametrize("n,a", [(10, 3), (100, 37), (7, 1)])
    def test_complement_simplification(self, n, a):
        assert variance_m2(n, a, n - 1) == F(a * (n - a), n * n)

    def test_corollary_instance(self):
        # direct evaluation; the n^(1/3) order is 100 here
        v = variance_m2(10**6, 10**4, 10**4)
        assert v == F(330000, 3367)
        assert abs(float(v) - 98.0101) < 1e-4

    def test_domain(self):
        with pytest.raises(DomainError):
            variance_m2(10, 0, 5)
        with pytest.raises(DomainError):
            variance_m2(10, 4, 10)


class TestPmf:
    def test_trimming_and_transform(self):
        p = Pmf(3, [F(0), F(1, 4), F(3, 4), F(0)])
        assert p.offset == 4 and len(p) == 2
        q = p.transform(-1, 10)
        assert q.offset == 5 and q.probs == (F(3, 4), F(1, 4))
        assert q.mean() == 10 - p.mean()

    def test_float_underflow_reported(self):
        p = Pmf(0, np.array([1e-310, 0.5, 0.5, 1e-305]), LOGFLOAT)
        assert p.offset == 1 and len(p) == 2
        assert 0 < p.truncated_mass < 1e-300

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            Pmf(0, [F(1, 2), F(-1, 2), F(1)])
