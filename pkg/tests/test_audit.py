import csv
import io
import json

import numpy as np
import pytest

from oracles import naive_distribution
from shorlab.audit import (
    Verdict,
    claim_peak_bound,
    claim_peak_bound_sweep,
    claim_power_of_two_form,
    claim_rerun_probability,
    claim_success_trend,
    exact_recovery_probability,
    exact_success_probability,
    golden_table,
    power_of_two_orders,
    reproduce_eq18,
    reproduce_eq18_19,
    reproduce_eq19,
    reproduce_eq21,
    success_sweep,
    sweep_bases,
    sweep_to_csv,
    wilson_interval,
    SWEEP_COLUMNS,
)
from shorlab.numtheory import multiplicative_order
from shorlab.qstate import Problem, Stage
from shorlab.strategies import Strategy


class TestGolden:
    def test_both_reproduced(self):
        assert [r.verdict for r in reproduce_eq18_19()] == [Verdict.REPRODUCED] * 2

    def test_perturbed_table_is_inconsistent(self):
        golden = golden_table(Stage.POST_QFT)
        golden[(4, 7)] = -golden[(4, 7)]
        assert reproduce_eq19(golden).verdict is Verdict.INCONSISTENT

    def test_missing_entry_is_inconsistent(self):
        golden = golden_table(Stage.POST_MODEXP)
        golden.pop((0, 1))
        rep = reproduce_eq18(golden)
        assert rep.verdict is Verdict.INCONSISTENT
        assert rep.evidence["unexpected"] == [[0, 1]]

    def test_post_modexp_all_quarter(self):
        assert set(golden_table(Stage.POST_MODEXP).values()) == {0.25}
        assert len(golden_table(Stage.POST_MODEXP)) == 16


class TestEq21:
    def test_reproduced(self):
        rep = reproduce_eq21()
        assert rep.verdict is Verdict.REPRODUCED
        assert rep.evidence["stated_input_qubits"] == 13
        assert rep.evidence["qubits_required_for_listed_values"] == 14
        assert rep.evidence["low_zero_bits"] == 10

    def test_thirteen_qubits_disagree(self):
        rep = reproduce_eq21(n=13)
        assert rep.verdict is Verdict.INCONSISTENT
        assert rep.evidence["spacing"] == 512


class TestPeakBound:
    def test_dividing_cases_meet_bound(self):
        for n in (4, 8):
            rep = claim_peak_bound(Problem.create(15, 7, n=n))
            assert rep.verdict is Verdict.CONSISTENT
            assert abs(rep.evidence["max_mass"] - 0.25) < 1e-12

    def test_twentyone(self):
        rep = claim_peak_bound(Problem.create(21, 2, n=9))
        exact = naive_distribution(21, 2, 9).max()
        assert abs(rep.evidence["max_mass"] - exact) < 1e-12
        # (2*86**2 + 4*85**2) / 512**2 = 10923/65536 > 1/6
        assert abs(rep.evidence["max_mass"] - 10923 / 65536) < 1e-12
        assert rep.evidence["argmax_p"] == 0
        assert rep.verdict is Verdict.INCONSISTENT

    def test_sweep(self):
        rep = claim_peak_bound_sweep(60)
        assert rep.evidence["instances"] == 29
        assert rep.verdict is Verdict.INCONSISTENT
        assert all(w["r_divides_M"] is False for w in rep.evidence["witnesses"])


class TestPowerOfTwoForm:
    def test_twenty(self):
        rep = claim_power_of_two_form(20)
        assert rep.verdict is Verdict.REFUTED
        pairs = {(c["N"], c["A"]) for c in rep.evidence["counterexamples"]}
        assert {(15, 7), (15, 11)} <= pairs

    def test_small_range_inconclusive(self):
        assert claim_power_of_two_form(5).verdict is Verdict.INCONCLUSIVE

    def test_only_form_numbers(self):
        # nine is the lone odd composite below 15 and equals 2**3 + 1
        assert claim_power_of_two_form(13).verdict is Verdict.CONSISTENT

    def test_orders_match_oracle(self):
        for N in (15, 45, 51, 255):
            expected = [(A, multiplicative_order(A, N)) for A in range(2, N)
                        if np.gcd(A, N) == 1 and multiplicative_order(A, N) & (multiplicative_order(A, N) - 1) == 0]
            assert power_of_two_orders(N) == expected

    def test_cap(self):
        with pytest.raises(ValueError):
            claim_power_of_two_form(10**4 + 1)


class TestRerun:
    def test_fifteen(self):
        rep = claim_rerun_probability(Problem.create(15, 7, n=4, m=4), 10**4, 1)
        ev = rep.evidence
        assert ev["same_value_exact"] == pytest.approx(1 / 16, abs=1e-12)
        assert ev["single_run_recovery_exact"] == pytest.approx(0.5, abs=1e-12)
        assert abs(ev["same_value_rate"] - 1 / 16) < 3 * ev["same_value_se"] + 1e-9
        assert rep.verdict is Verdict.CONSISTENT

    def test_rejects_few_trials(self):
        with pytest.raises(ValueError):
            claim_rerun_probability(Problem.create(15, 7, n=4), 0)

    def test_enumeration(self):
        assert exact_recovery_probability(Problem.create(15, 7, n=4)) == pytest.approx(0.5)


class TestSweep:
    def test_fifteen_rate(self):
        rows = success_sweep([15], Strategy.STANDARD, 10**4, seed=0, bases={15: [7]})
        (row,) = rows
        assert row.r == 4 and row.n == 8
        assert abs(row.rate - 0.5) < 0.02

    def test_twentyone_against_enumeration(self):
        prob = Problem.create(21, 2, n=9)
        # frozen from the brute-force distribution in tests/oracles.py
        exact = 0.3284172755470
        assert exact_success_probability(prob) == pytest.approx(exact, abs=1e-9)
        (row,) = success_sweep([21], "standard", 10**4, seed=4, bases={21: [2]})
        se = np.sqrt(exact * (1 - exact) / row.trials)
        assert abs(row.rate - exact) < 3 * se

    @pytest.mark.parametrize("strategy", ["standard", "output_first", "skip_qft"])
    def test_rates_match_enumeration(self, strategy):
        for N, A in [(15, 2), (33, 5), (35, 3), (39, 2)]:
            prob = Problem.create(N, A, n=min(12, Problem.create(N, A).n))
            exact = exact_success_probability(prob, Strategy.STANDARD if strategy == "output_first" else strategy)
            from shorlab.audit import sweep_instance
            row = sweep_instance(prob, strategy, 5000, seed=1)
            tol = 3 * np.sqrt(max(exact * (1 - exact), 1e-12) / 5000) + 1e-12
            assert abs(row.rate - exact) <= tol

    def test_empty(self):
        assert success_sweep([]) == []

    def test_skips_large(self):
        (row, *_) = success_sweep([2049], trials=10, extra_bases=0)
        assert row.skipped and row.trials == 0

    def test_bases(self):
        bases = sweep_bases(35, 3, seed=0)
        assert bases[0] == 2 and len(set(bases)) == 4
        assert bases == sweep_bases(35, 3, seed=0)

    def test_csv_header(self):
        rows = success_sweep([15, 21], trials=200)
        text = sweep_to_csv(rows)
        reader = csv.reader(io.StringIO(text))
        assert next(reader) == SWEEP_COLUMNS
        assert SWEEP_COLUMNS == "N,A,r,n,strategy,trials,successes,rate,ci_low,ci_high".split(",")
        assert len(list(reader)) == len(rows) == 8

    def test_wilson(self):
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi and abs((lo + hi) / 2 - 0.5) < 1e-12
        assert wilson_interval(0, 10)[0] == 0.0


class TestReports:
    def test_reproducible_bytes(self):
        a = claim_rerun_probability(Problem.create(21, 2), 10**4, 3).to_json()
        b = claim_rerun_probability(Problem.create(21, 2), 10**4, 3).to_json()
        assert a == b

    def test_trend_report_shape(self):
        rep = claim_success_trend(N_max=45, trials=300, seed=0)
        assert rep.evidence["instances"] > 0
        assert rep.verdict in set(Verdict)
        json.loads(rep.to_json())
