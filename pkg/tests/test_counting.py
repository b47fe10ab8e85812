import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pssq.arith import squarefree_mask
from pssq.counting import (CountResult, cached_count, count_averaged,
                           count_averaged_double_loop, count_direct, count_dyadic,
                           count_inverse, count_inverse_batch, count_inverse_reference,
                           distinct_squarefree_parts, squarefree_part, trivial_bound,
                           within_trivial_bound)
from pssq.errors import MeaninglessRange, ResourceLimit, ValidationError
from pssq.exact_power import CExponent, power_floor
from pssq.records import ResultCache

C_GRID = ["5/4", "3/2", "7/4", "5/2", "7/2"]


def brute(c, s, lo, hi):
    """Plain enumeration with no shared tables."""
    hits = 0
    for n in range(lo, hi + 1):
        k = power_floor(n, c)
        if k % s == 0:
            r = math.isqrt(k // s)
            hits += r * r == k // s
    return hits


class TestExamples:
    def test_fixed_s(self):
        assert count_direct("3/2", 1, 20).value == 3
        assert count_direct("3/2", 2, 20).value == 3
        assert count_direct("3/2", 1, 1).value == 1
        assert count_inverse("3/2", 1, 20).value == 3
        assert count_inverse("3/2", 10 ** 6, 20).value == 0

    def test_frozen_c52_s3(self):
        assert count_direct("5/2", 3, 1000).value == 3
        assert count_inverse("5/2", 3, 1000).value == 3
        assert brute("5/2", 3, 1, 1000) == 3

    def test_dyadic(self):
        assert count_dyadic("3/2", 1, 20).value == 2
        assert count_dyadic("3/2", 1, 2).value == 0
        with pytest.raises(ValidationError):
            count_dyadic("3/2", 1, 1)

    def test_averaged(self):
        assert count_averaged("3/2", 1, 20).value == 3
        assert count_averaged("3/2", 2, 20).value == 6
        assert count_averaged("3/2", 89, 20).value == 20
        with pytest.raises(MeaninglessRange):
            count_averaged("3/2", 90, 20)

    def test_distinct_parts(self):
        assert distinct_squarefree_parts("3/2", 1) == 1
        # values 1, 2, 5, 8 have square-free parts 1, 2, 5, 2
        assert distinct_squarefree_parts("3/2", 4) == 3
        parts = {squarefree_part(power_floor(n, "3/2")).s for n in range(1, 21)}
        assert distinct_squarefree_parts("3/2", 20) == len(parts) == 16

    def test_trivial_bound(self):
        # min(N, N^(c/2)) with N^(3/4) = 31.62... < 100
        assert trivial_bound("3/2", 1, 100) == pytest.approx(10 ** 1.5, rel=1e-12)
        assert trivial_bound("5/4", 1, 100) == pytest.approx(10 ** 1.25, rel=1e-12)
        assert trivial_bound("3/2", 10 ** 6, 10 ** 4) == pytest.approx(1.0, rel=1e-12)
        assert trivial_bound(CExponent(7, 2), 1, 10) == 10

    def test_direct_ceiling(self):
        with pytest.raises(ResourceLimit):
            count_direct("3/2", 1, 10 ** 9)
        with pytest.raises(ResourceLimit):
            count_direct("3/2", 1, 1000, ceiling=999)

    def test_record(self):
        rec = count_direct("3/2", 1, 20).to_record(timing=False)
        assert rec == {"c": "3/2", "s": 1, "N": 20, "value": 3, "oracle": "direct"}
        with pytest.raises(ValidationError):
            CountResult(CExponent(3, 2), 1, 5, 6, "direct")


class TestOracles:
    @pytest.mark.parametrize("c", C_GRID + ["11/7", "13/5"])
    def test_direct_matches_brute(self, c):
        for s in (1, 2, 3, 5, 6, 7, 10):
            assert count_direct(c, s, 3000).value == brute(c, s, 1, 3000)

    @given(st.sampled_from(C_GRID + ["9/8", "10/3", "29/11"]), st.integers(1, 60),
           st.integers(1, 4000))
    def test_inverse_matches_direct(self, c, s, N):
        d = count_direct(c, s, N).value
        assert count_inverse(c, s, N).value == d

    @given(st.sampled_from(C_GRID), st.integers(1, 30), st.integers(1, 3000))
    def test_fast_inverse_matches_reference(self, c, s, N):
        assert count_inverse(c, s, N).value == count_inverse_reference(c, s, N)

    @given(st.sampled_from(C_GRID), st.integers(1, 50), st.integers(2, 10 ** 4))
    def test_additivity_and_trivial_bound(self, c, s, N):
        full = count_direct(c, s, N).value
        assert full == count_direct(c, s, N // 2).value + count_dyadic(c, s, N).value
        assert within_trivial_bound(full, c, s, N)
        assert full <= math.floor(s ** -0.5 * N ** (float(CExponent.parse(c)) / 2)) + 1

    def test_inverse_large_c_huge_values(self):
        # values beyond int64 go through the object path
        c = "13/3"
        assert count_inverse(c, 1, 5000).value == count_direct(c, 1, 5000).value

    def test_batch_equals_single(self):
        batch = count_inverse_batch("7/4", range(1, 20), 5000)
        for s, v in batch.items():
            assert v == count_inverse("7/4", s, 5000).value

    def test_worker_count_does_not_change_values(self):
        a = count_inverse_batch("5/2", [1, 2, 3], 3 * 10 ** 4, workers=1)
        b = count_inverse_batch("5/2", [1, 2, 3], 3 * 10 ** 4, workers=3)
        assert a == b
        assert count_direct("3/2", 2, 200_000, workers=4).value == \
            count_direct("3/2", 2, 200_000).value

    def test_approximate_mode_counts(self):
        c = CExponent.approximate(1.4142135623730951)
        d = count_direct(c, 1, 500).value
        assert d == count_inverse(c, 1, 500).value
        assert d >= 1


class TestMonotone:
    @given(st.sampled_from(C_GRID), st.integers(1, 20), st.integers(1, 2000))
    def test_monotone_in_N(self, c, s, N):
        assert count_direct(c, s, N).value <= count_direct(c, s, N + 1).value

    @given(st.sampled_from(["5/4", "3/2", "7/4"]), st.integers(1, 99), st.integers(50, 3000))
    def test_monotone_in_S(self, c, S, N):
        assert count_averaged(c, S, N).value <= count_averaged(c, S + 1, N).value


def test_averaged_equals_double_loop():
    for c in ["5/4", "3/2", "7/4", "5/2"]:
        for N in (100, 1000, 10 ** 4):
            for S in (1, 2, 10, 37, 100):
                single = count_averaged(c, S, N).value
                assert single == count_averaged_double_loop(c, S, N)
                sq = np.flatnonzero(squarefree_mask(S))
                assert single == sum(count_direct(c, int(s), N).value for s in sq)


def test_cache_hit_returns_stored_value(tmp_path):
    cache = ResultCache(str(tmp_path / "cache.csv"))
    first = cached_count(cache, "3/2", 1, 20, "direct")
    second = cached_count(cache, "3/2", 1, 20, "direct")
    assert first.value == second.value == 3
    assert len(list(cache.keys())) == 1
