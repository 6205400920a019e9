"""Desk-scale experiments that check worked examples and quantitative claims.

Each check returns a ``ClaimReport`` whose verdict is computed from the
simulator, never presumed. Reports are deterministic in (config, seed).
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .noise import ReadoutModel, apply_readout_noise
from .numtheory import infer_period, register_size_for, smallest_base
from .qstate import MAX_SAMPLING_M, Problem, Stage, dense_state
from .strategies import Strategy, resolve, sample_skip_qft, skip_qft_candidates

TOL_EXACT = 1e-12
Z95 = 1.959963984540054


class Verdict(str, enum.Enum):
    REPRODUCED = "reproduced"
    REFUTED = "refuted_by_counterexample"
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ClaimReport:
    claim_id: str
    locus: str
    verdict: Verdict
    evidence: dict
    trials: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


# Worked example N=15, A=7, n=m=4, as printed: residue -> input values (amplitude 1/4 each).
GOLDEN_POST_MODEXP = {
    1: (0, 4, 8, 12),
    7: (1, 5, 9, 13),
    4: (2, 6, 10, 14),
    13: (3, 7, 11, 15),
}
# After the QFT: residue -> coefficients (times 1/4) on p = 0, 4, 8, 12.
GOLDEN_POST_QFT = {
    1: (1, 1, 1, 1),
    7: (1, 1j, -1, -1j),
    4: (1, -1, 1, -1),
    13: (1, -1j, -1, 1j),
}


def golden_table(stage: Stage | str) -> dict[tuple[int, int], complex]:
    """Golden amplitudes keyed by (input value, residue)."""
    if Stage(stage) is Stage.POST_MODEXP:
        return {(x, f): 0.25 + 0j for f, xs in GOLDEN_POST_MODEXP.items() for x in xs}
    return {(p, f): 0.25 * c for f, cs in GOLDEN_POST_QFT.items() for p, c in zip((0, 4, 8, 12), cs)}


def _compare_dense(claim_id, locus, stage, golden):
    problem = Problem.create(15, 7, n=4, m=4)
    got = dense_state(problem, stage).as_dict()
    keys = set(got) | set(golden)
    worst = max(abs(got.get(k, 0) - golden.get(k, 0)) for k in keys)
    missing = sorted(set(golden) - set(got))
    extra = sorted(set(got) - set(golden))
    ok = not missing and not extra and worst <= TOL_EXACT
    evidence = {
        "N": 15, "A": 7, "n": 4, "m": 4,
        "entries": len(got),
        "golden_entries": len(golden),
        "max_abs_deviation": worst,
        "missing": [list(k) for k in missing],
        "unexpected": [list(k) for k in extra],
        "tolerance": TOL_EXACT,
    }
    return ClaimReport(claim_id, locus, Verdict.REPRODUCED if ok else Verdict.INCONSISTENT, evidence)


def reproduce_eq18(golden: dict | None = None) -> ClaimReport:
    golden = golden_table(Stage.POST_MODEXP) if golden is None else golden
    return _compare_dense("eq18", "post-modexp expansion, N=15 A=7", Stage.POST_MODEXP, golden)


def reproduce_eq19(golden: dict | None = None) -> ClaimReport:
    golden = golden_table(Stage.POST_QFT) if golden is None else golden
    return _compare_dense("eq19", "post-QFT phase table, N=15 A=7", Stage.POST_QFT, golden)


def reproduce_eq18_19() -> list[ClaimReport]:
    return [reproduce_eq18(), reproduce_eq19()]


# Listed outcomes for N=119, A=92: multiples of 1024 below 16384, each 1/16.
EQ21_VALUES = tuple(1024 * lam for lam in range(16))
EQ21_STATED_QUBITS = 13


def reproduce_eq21(n: int = 14) -> ClaimReport:
    problem = Problem.create(119, 92, n=n)
    dist = problem.distribution
    support = dist.support()
    masses = dist.mass(support)
    same_support = tuple(support.tolist()) == EQ21_VALUES
    worst = float(np.max(np.abs(masses - 1 / 16))) if len(support) else math.inf
    ok = same_support and worst <= TOL_EXACT
    nonzero = [int(v) for v in support if v]
    low_zero_bits = min((v & -v).bit_length() - 1 for v in nonzero) if nonzero else n
    evidence = {
        "N": 119, "A": 92, "r": problem.order, "n": n, "M": problem.M,
        "support_size": len(support),
        "support": support.tolist(),
        "spacing": int(support[1] - support[0]) if len(support) > 1 else None,
        "max_mass_deviation": worst,
        "low_zero_bits": low_zero_bits,
        "stated_input_qubits": EQ21_STATED_QUBITS,
        "qubits_required_for_listed_values": register_size_for(119),
        "note": "listed outcomes 0..15360 in steps of 1024 require M = 2**14; "
                "13 input qubits give steps of 512",
        "tolerance": TOL_EXACT,
    }
    return ClaimReport("eq21", "N=119 A=92 outcome list", Verdict.REPRODUCED if ok else Verdict.INCONSISTENT, evidence)


def peak_maximum(problem: Problem) -> tuple[int, float]:
    """(argmax p, max P(p)) of the post-QFT distribution."""
    dist = problem.distribution
    if dist.divides:
        ps = dist.support()
        masses = dist.mass(ps)
    else:
        if problem.M > MAX_SAMPLING_M:
            raise ValueError(f"peak search capped at M={MAX_SAMPLING_M}")
        ps = np.arange(problem.M)
        masses = dist.pmf
    i = int(np.argmax(masses))
    return int(ps[i]), float(masses[i])


def claim_peak_bound(problem: Problem) -> ClaimReport:
    p, peak = peak_maximum(problem)
    r = problem.order
    ok = peak <= 1 / r + TOL_EXACT
    evidence = {
        "N": problem.N, "A": problem.A, "n": problem.n, "r": r,
        "r_divides_M": problem.M % r == 0,
        "max_mass": peak, "argmax_p": p, "bound": 1 / r, "excess": peak - 1 / r,
    }
    return ClaimReport("peak_bound", "single-outcome probability bound 1/r",
                       Verdict.CONSISTENT if ok else Verdict.INCONSISTENT, evidence)


def claim_peak_bound_sweep(N_max: int = 200, max_witnesses: int = 10) -> ClaimReport:
    """Peak bound over every odd N in [3, N_max] with its smallest valid base."""
    checked = 0
    witnesses = []
    violations = 0
    for N in range(3, N_max + 1, 2):
        problem = Problem.create(N, smallest_base(N))
        if problem.M > MAX_SAMPLING_M:
            continue
        report = claim_peak_bound(problem)
        checked += 1
        if report.verdict is Verdict.INCONSISTENT:
            violations += 1
            if len(witnesses) < max_witnesses:
                witnesses.append(report.evidence)
    evidence = {
        "N_max": N_max, "instances": checked, "violations": violations,
        "witnesses": witnesses, "tolerance": TOL_EXACT,
    }
    verdict = Verdict.INCONSISTENT if violations else Verdict.CONSISTENT
    return ClaimReport("peak_bound", "single-outcome probability bound 1/r", verdict, evidence)


def _is_odd_composite(N: int) -> bool:
    if N < 9 or N % 2 == 0:
        return False
    return any(N % d == 0 for d in range(3, math.isqrt(N) + 1, 2))


def _is_two_power_plus_one(N: int) -> bool:
    t = N - 1
    return t > 0 and t & (t - 1) == 0


def power_of_two_orders(N: int) -> list[tuple[int, int]]:
    """(A, r) for every base A coprime to N whose order r is a power of two."""
    A = np.arange(2, N, dtype=np.int64)
    A = A[np.gcd(A, N) == 1]
    x = A.copy()
    order = np.zeros(A.shape, dtype=np.int64)
    for j in range(1, N.bit_length() + 1):
        x = x * x % N
        hit = (x == 1) & (order == 0)
        order[hit] = 1 << j
    keep = order > 0
    return list(zip(A[keep].tolist(), order[keep].tolist()))


def claim_power_of_two_form(N_max: int = 100, max_listed: int = 10) -> ClaimReport:
    """Look for odd composite N with a power-of-two order that are not 2**k + 1."""
    if N_max > 10**4:
        raise ValueError("N_max capped at 10**4")
    cases = 0
    counterexamples = []
    total_counter = 0
    for N in range(9, N_max + 1, 2):
        if not _is_odd_composite(N):
            continue
        found = power_of_two_orders(N)
        cases += len(found)
        if _is_two_power_plus_one(N):
            continue
        total_counter += len(found)
        for A, r in found:
            if len(counterexamples) < max_listed:
                counterexamples.append({"N": N, "A": A, "r": r})
    if total_counter:
        verdict = Verdict.REFUTED
    elif cases:
        verdict = Verdict.CONSISTENT
    else:
        verdict = Verdict.INCONCLUSIVE
    evidence = {
        "N_max": N_max, "power_of_two_cases": cases,
        "counterexample_count": total_counter, "counterexamples": counterexamples,
    }
    return ClaimReport("pow2form", "power-of-two period implies N = 2**k + 1", verdict, evidence)


def _recovers(problem: Problem, c: int) -> bool:
    r = problem.order
    return any(cand.r == r for cand in infer_period(c, problem.M, problem.N))


def exact_recovery_probability(problem: Problem) -> float:
    """Probability that a single standard run lists the true order among its candidates."""
    dist = problem.distribution
    ps = dist.support()
    masses = dist.mass(ps)
    return float(sum(w for p, w in zip(ps.tolist(), masses.tolist()) if _recovers(problem, p)))


def claim_rerun_probability(problem: Problem, trials: int = 10**4, seed: int = 0) -> ClaimReport:
    """Compare repeat-outcome and two-run recovery rates with 1/r**2."""
    if trials < 10**4:
        raise ValueError("trials must be >= 10**4")
    rng = np.random.default_rng(seed)
    dist = problem.distribution
    r = problem.order
    bound = 1 / r**2
    ps = dist.support()
    masses = dist.mass(ps)
    nonzero = ps > 0
    target = int(ps[nonzero][np.argmax(masses[nonzero])])
    exact_same = float(dist.mass(target)) ** 2

    draws = dist.sample(rng, size=2 * trials).reshape(trials, 2)
    same = np.mean((draws[:, 0] == target) & (draws[:, 1] == target))
    se_same = math.sqrt(same * (1 - same) / trials)

    memo: dict[int, bool] = {}
    def rec(c):
        if c not in memo:
            memo[c] = _recovers(problem, c)
        return memo[c]
    recovered = np.mean([rec(int(a)) or rec(int(b)) for a, b in draws])
    se_rec = math.sqrt(recovered * (1 - recovered) / trials)
    single = exact_recovery_probability(problem)

    ok = same <= bound + 3 * se_same
    evidence = {
        "N": problem.N, "A": problem.A, "n": problem.n, "r": r, "bound": bound,
        "target_value": target,
        "same_value_rate": float(same), "same_value_se": se_same, "same_value_exact": exact_same,
        "two_run_recovery_rate": float(recovered), "two_run_recovery_se": se_rec,
        "single_run_recovery_exact": single,
        "two_run_recovery_exact": 1 - (1 - single) ** 2,
    }
    return ClaimReport("rerun", "repeat-run probability bound 1/r**2",
                       Verdict.CONSISTENT if ok else Verdict.INCONSISTENT, evidence, trials, seed)


@dataclass
class SweepRow:
    N: int
    A: int
    r: int
    n: int
    strategy: str
    trials: int
    successes: int
    skipped: bool = False
    exact_rate: float | None = field(default=None)

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else math.nan

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)

    @property
    def mean_runs_to_success(self) -> float:
        return self.trials / self.successes if self.successes else math.inf

    def to_dict(self) -> dict:
        lo, hi = self.ci
        d = asdict(self)
        d.update(rate=self.rate, ci_low=lo, ci_high=hi, mean_runs_to_success=self.mean_runs_to_success)
        return d


SWEEP_COLUMNS = ["N", "A", "r", "n", "strategy", "trials", "successes", "rate", "ci_low", "ci_high"]


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials == 0:
        return math.nan, math.nan
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def sweep_bases(N: int, extra: int = 3, seed: int = 0) -> list[int]:
    """Smallest valid base plus ``extra`` seeded random distinct coprime bases."""
    first = smallest_base(N)
    pool = [A for A in range(2, N) if math.gcd(A, N) == 1 and A != first]
    rng = np.random.default_rng([seed, N])
    picked = rng.choice(len(pool), size=min(extra, len(pool)), replace=False) if pool else []
    return [first, *sorted(pool[i] for i in picked)]


def _draw(problem: Problem, strategy: Strategy, rng, trials: int) -> np.ndarray:
    if strategy is Strategy.STANDARD:
        return problem.distribution.sample(rng, size=trials)
    if strategy is Strategy.SKIP_QFT:
        return sample_skip_qft(problem, rng, size=trials)
    if strategy is Strategy.OUTPUT_FIRST:
        state = problem.state
        l = np.searchsorted(np.cumsum(state.counts), rng.integers(problem.M, size=trials), side="right")
        counts = state.counts[l]
        out = np.empty(trials, dtype=np.int64)
        for c in np.unique(counts):
            sel = counts == c
            # The collapsed input distribution depends on the branch only through its length.
            branch = next(state.branch(i) for i in range(len(state.counts)) if state.counts[i] == c)
            out[sel] = branch.distribution().sample(rng, size=int(sel.sum()))
        return out
    raise ValueError(f"sweep does not support strategy {strategy.value}")


def _outcome_succeeds(problem: Problem, strategy: Strategy, c: int) -> bool:
    if strategy is Strategy.SKIP_QFT:
        cands = skip_qft_candidates([c], problem.N)
    else:
        cands = infer_period(c, problem.M, problem.N)
    return resolve(problem, cands, c == 0)[1] is not None


def exact_success_probability(problem: Problem, strategy: Strategy | str = Strategy.STANDARD) -> float:
    """Single-run factoring probability by enumerating every outcome."""
    strategy = Strategy(strategy)
    if strategy is Strategy.SKIP_QFT:
        count = int(problem.state.counts[0])
        hits = sum(_outcome_succeeds(problem, strategy, problem.order * u) for u in range(count))
        return hits / count
    dist = problem.distribution
    ps = dist.support()
    masses = dist.mass(ps)
    return float(sum(w for p, w in zip(ps.tolist(), masses.tolist()) if _outcome_succeeds(problem, strategy, p)))


def sweep_instance(
    problem: Problem,
    strategy: Strategy | str,
    trials: int,
    seed: int = 0,
    readout: ReadoutModel | None = None,
) -> SweepRow:
    strategy = Strategy(strategy)
    rng = np.random.default_rng([seed, problem.N, problem.A])
    outcomes = _draw(problem, strategy, rng, trials)
    if readout is not None:
        outcomes = apply_readout_noise(outcomes, problem.n, readout, rng) % problem.M
    memo: dict[int, bool] = {}
    successes = 0
    for c in outcomes.tolist():
        if c not in memo:
            memo[c] = _outcome_succeeds(problem, strategy, c)
        successes += memo[c]
    return SweepRow(problem.N, problem.A, problem.order, problem.n, strategy.value, trials, successes)


def success_sweep(
    N_list: Iterable[int],
    strategy: Strategy | str = Strategy.STANDARD,
    trials: int = 10**4,
    seed: int = 0,
    extra_bases: int = 3,
    bases: dict[int, Sequence[int]] | None = None,
    readout: ReadoutModel | None = None,
) -> list[SweepRow]:
    """Empirical single-run factoring rate per (N, A).

    Instances whose register would exceed the sampling cap are returned as
    skipped rows with zero trials.
    """
    rows = []
    for N in sorted(set(N_list)):
        As = bases[N] if bases and N in bases else sweep_bases(N, extra_bases, seed)
        for A in As:
            n = register_size_for(N)
            problem = Problem.create(N, A, n=n)
            if problem.M > MAX_SAMPLING_M:
                rows.append(SweepRow(N, A, problem.order, n, Strategy(strategy).value, 0, 0, skipped=True))
                continue
            rows.append(sweep_instance(problem, strategy, trials, seed, readout))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        d = row.to_dict()
        if row.skipped:
            d.update(rate="", ci_low="", ci_high="")
        writer.writerow([d[c] for c in SWEEP_COLUMNS])
    return buf.getvalue()


def claim_success_trend(N_max: int = 101, trials: int = 2000, seed: int = 0) -> ClaimReport:
    """Rank correlation between N and the single-run success rate over small odd composites."""
    from scipy.stats import spearmanr

    Ns = [N for N in range(9, N_max + 1, 2) if _is_odd_composite(N)]
    rows = success_sweep(Ns, Strategy.STANDARD, trials, seed)
    rows = [r for r in rows if not r.skipped]
    rho, pval = spearmanr([r.N for r in rows], [r.rate for r in rows])
    if pval < 0.01:
        verdict = Verdict.CONSISTENT if rho < 0 else Verdict.INCONSISTENT
    else:
        verdict = Verdict.INCONCLUSIVE
    evidence = {
        "N_max": N_max, "instances": len(rows), "spearman_rho": float(rho), "p_value": float(pval),
        "rows": [{"N": r.N, "A": r.A, "r": r.r, "rate": r.rate} for r in rows],
    }
    return ClaimReport("success_trend", "success probability falls as N grows", verdict, evidence,
                       trials * len(rows), seed)


CLAIMS = ("eq18", "eq19", "eq21", "peak_bound", "pow2form", "rerun", "success_trend")


def run_claim(claim_id: str, seed: int = 0, max_n: int = 100, trials: int = 10**4) -> ClaimReport:
    if claim_id == "eq18":
        return reproduce_eq18()
    if claim_id == "eq19":
        return reproduce_eq19()
    if claim_id == "eq21":
        return reproduce_eq21()
    if claim_id == "peak_bound":
        return claim_peak_bound_sweep(200)
    if claim_id == "pow2form":
        return claim_power_of_two_form(max_n)
    if claim_id == "rerun":
        return claim_rerun_probability(Problem.create(15, 7, n=4, m=4), trials, seed)
    if claim_id == "success_trend":
        return claim_success_trend(seed=seed)
    raise ValueError(f"unknown claim {claim_id!r}; choose from {', '.join(CLAIMS)}")


def run_all(seed: int = 0, max_n: int = 100, trials: int = 10**4) -> list[ClaimReport]:
    return [run_claim(c, seed, max_n, trials) for c in CLAIMS]
