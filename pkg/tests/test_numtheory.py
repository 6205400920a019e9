import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_pow
from shorlab.numtheory import (
    CandidateSource,
    ExtractionFailure,
    FactoringInstance,
    FailureReason,
    SharedFactor,
    convergents,
    extract_factors,
    infer_period,
    mod_pow,
    multiplicative_order,
    qubit_budget,
    register_size_for,
)


class TestModPow:
    @pytest.mark.parametrize("A, x, N, expected", [(7, 0, 15, 1), (7, 3, 15, 13), (92, 16, 119, 1)])
    def test_examples(self, A, x, N, expected):
        assert mod_pow(A, x, N) == expected

    def test_worked_example_residues(self):
        assert [mod_pow(7, x, 15) for x in range(4)] == [1, 7, 4, 13]

    def test_exhaustive_small_grid(self):
        for N in range(2, 40):
            for A in range(0, 40):
                for x in range(0, 40):
                    assert mod_pow(A, x, N) == naive_pow(A, x, N)

    @given(st.integers(0, 2**10 - 1), st.integers(0, 2**10 - 1), st.integers(2, 2**10 - 1))
    @settings(max_examples=400)
    def test_matches_repeated_multiplication(self, A, x, N):
        assert mod_pow(A, x, N) == naive_pow(A, x, N)

    def test_big_integers(self):
        N = (1 << 61) - 1
        assert mod_pow(3, 10**18, N) == pow(3, 10**18, N)

    def test_rejects_bad_modulus(self):
        with pytest.raises(ValueError):
            mod_pow(3, 2, 1)


class TestOrder:
    @pytest.mark.parametrize("A, N, r", [(7, 15, 4), (11, 15, 2), (92, 119, 16), (14, 15, 2), (2, 21, 6)])
    def test_examples(self, A, N, r):
        assert multiplicative_order(A, N) == r

    def test_rejects_shared_factor(self):
        with pytest.raises(ValueError):
            multiplicative_order(5, 15)

    def test_exhaustive_minimality(self):
        for N in range(3, 120):
            for A in range(2, N):
                if math.gcd(A, N) != 1:
                    continue
                r = multiplicative_order(A, N)
                assert naive_pow(A, r, N) == 1
                assert all(naive_pow(A, j, N) != 1 for j in range(1, r))

    @given(st.integers(3, 10**4).flatmap(lambda N: st.tuples(st.just(N), st.integers(2, N - 1))))
    @settings(max_examples=200)
    def test_sampled_up_to_1e4(self, pair):
        N, A = pair
        if math.gcd(A, N) != 1:
            return
        r = multiplicative_order(A, N)
        assert pow(A, r, N) == 1
        assert all(pow(A, j, N) != 1 for j in range(1, r))


class TestInstance:
    def test_valid(self):
        inst = FactoringInstance(15, 7)
        assert (inst.N, inst.A) == (15, 7)

    def test_shared_factor_is_reported(self):
        with pytest.raises(SharedFactor) as info:
            FactoringInstance(15, 5)
        assert info.value.factor == 5

    @pytest.mark.parametrize("N, A", [(16, 3), (1, 1), (15, 1), (15, 15)])
    def test_invalid(self, N, A):
        with pytest.raises(ValueError):
            FactoringInstance(N, A)


class TestExtractFactors:
    def test_fifteen(self):
        assert set(extract_factors(7, 4, 15)) == {3, 5}

    def test_twentyone(self):
        assert extract_factors(2, 6, 21) == (7, 3)

    @pytest.mark.parametrize(
        "A, r, N, reason",
        [
            (14, 2, 15, FailureReason.TRIVIAL_ROOT),
            (7, 3, 15, FailureReason.NOT_A_PERIOD),
            (4, 3, 7, FailureReason.ODD_PERIOD),
            (7, 8, 15, FailureReason.NON_MINIMAL_PERIOD),
        ],
    )
    def test_failures(self, A, r, N, reason):
        with pytest.raises(ExtractionFailure) as info:
            extract_factors(A, r, N)
        assert info.value.reason is reason

    def test_success_implies_divisors(self):
        for N in range(9, 200, 2):
            for A in range(2, N):
                if math.gcd(A, N) != 1:
                    continue
                try:
                    g1, g2 = extract_factors(A, multiplicative_order(A, N), N)
                except ExtractionFailure:
                    continue
                assert N % g1 == 0 and N % g2 == 0
                assert 1 < g1 < N or 1 < g2 < N


class TestInferPeriod:
    def test_zero_is_indeterminate(self):
        assert infer_period(0, 16, 15) == []

    @pytest.mark.parametrize("c", [4, 12])
    def test_quarter_peaks(self, c):
        rs = [cand.r for cand in infer_period(c, 16, 15)]
        assert 4 in rs
        assert rs == sorted(set(rs))

    def test_half_peak_gives_reduced_denominator_only(self):
        assert [c.r for c in infer_period(8, 16, 15)] == [2]

    def test_exact_divisor_source(self):
        cands = infer_period(1024 * 3, 1 << 14, 119)
        assert cands[-1].r == 16
        assert cands[-1].source is CandidateSource.EXACT_DIVISOR

    def test_continued_fraction_source(self):
        # 85/512 is close to 1/6 but 6 does not divide 512
        rs = {c.r: c.source for c in infer_period(85, 512, 21)}
        assert rs[6] is CandidateSource.CONTINUED_FRACTION

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            infer_period(16, 16, 15)

    def test_exact_peaks_always_recover_r(self):
        for n in range(8, 15):
            M = 1 << n
            for r in range(2, 65):
                if M % r:
                    continue
                for lam in range(1, r):
                    if math.gcd(lam, r) == 1:
                        assert r in [c.r for c in infer_period(lam * M // r, M, 64)]

    def test_rounded_peaks_recover_r(self):
        # Nearest-integer peaks satisfy |c/M - lam/r| <= 1/(2M) <= 1/(2r^2) once M >= r^2.
        for n in range(8, 15):
            M = 1 << n
            for r in range(2, 65):
                if r * r > M:
                    continue
                for lam in range(1, r):
                    if math.gcd(lam, r) == 1:
                        c = round(Fraction(lam * M, r))
                        assert r in [cand.r for cand in infer_period(c, M, 64)]

    def test_convergents_of_known_fraction(self):
        assert list(convergents(85, 512))[:3] == [Fraction(0), Fraction(1, 6), Fraction(42, 253)]


class TestSizing:
    @pytest.mark.parametrize("N, n", [(15, 8), (119, 14), (5, 5)])
    def test_examples(self, N, n):
        assert register_size_for(N) == n

    def test_bound_holds_up_to_1e6(self):
        for N in range(3, 10**6 + 1):
            n = register_size_for(N)
            assert N * N <= 1 << n < 2 * N * N

    @pytest.mark.parametrize("s, q", [(4, 29), (1, 8), (7, 50)])
    def test_qubit_budget(self, s, q):
        assert qubit_budget(s) == q
