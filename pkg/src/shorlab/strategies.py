"""End-to-end run pipelines.

Every pipeline is a pure function of (problem, seed): it draws measurement
outcomes from the exact simulated state, infers period candidates, checks
each candidate with a modular exponentiation, and only then tries to extract
factors. Failures are recorded on the returned ``RunRecord``, never raised.
"""

from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .noise import ReadoutModel, apply_readout_noise
from .numtheory import (
    CandidateSource,
    ExtractionFailure,
    PeriodCandidate,
    divisors,
    extract_factors,
    infer_period,
    mod_pow,
)
from .qstate import Problem, measure_input, measure_output_first

# A bit whose ensemble mean falls in this band is counted as variable.
VARIABLE_BAND = (0.25, 0.75)


class Strategy(str, enum.Enum):
    STANDARD = "standard"
    OUTPUT_FIRST = "output_first"
    SKIP_QFT = "skip_qft"
    ACCUMULATE = "accumulate"
    NMR_ENSEMBLE = "nmr_ensemble"


@dataclass(frozen=True)
class RunRecord:
    strategy: Strategy
    N: int
    A: int
    n: int
    seed: int | None
    samples: tuple[tuple[str, int], ...]
    period_candidates: tuple[PeriodCandidate, ...]
    period: int | None = None
    factors: tuple[int, int] | None = None
    failure: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.factors is None) == (self.failure is None):
            raise ValueError("a run has either factors or a failure reason, not both")
        if self.factors is not None and any(self.N % f for f in self.factors):
            raise ValueError(f"reported factors {self.factors} do not divide {self.N}")

    @property
    def succeeded(self) -> bool:
        return self.factors is not None

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "N": self.N,
            "A": self.A,
            "n": self.n,
            "seed": self.seed,
            "params": dict(self.params),
            "samples": [{"register": reg, "value": v} for reg, v in self.samples],
            "period_candidates": [c.to_dict() for c in self.period_candidates],
            "period": self.period,
            "factors": list(self.factors) if self.factors else None,
            "failure": self.failure,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            strategy=Strategy(d["strategy"]),
            N=d["N"],
            A=d["A"],
            n=d["n"],
            seed=d["seed"],
            samples=tuple((s["register"], s["value"]) for s in d["samples"]),
            period_candidates=tuple(
                PeriodCandidate(c["r"], CandidateSource(c["source"]), c["sample"]) for c in d["period_candidates"]
            ),
            period=d["period"],
            factors=tuple(d["factors"]) if d["factors"] else None,
            failure=d["failure"],
            params=d.get("params", {}),
        )


@dataclass(frozen=True)
class EnsembleReport:
    N: int
    A: int
    n: int
    seed: int | None
    shots: int
    bit_means: tuple[float, ...]
    variable_bits: int
    r_estimate: int
    verified: bool

    def to_dict(self) -> dict:
        return {
            "strategy": Strategy.NMR_ENSEMBLE.value,
            "N": self.N,
            "A": self.A,
            "n": self.n,
            "seed": self.seed,
            "shots": self.shots,
            "bit_means": list(self.bit_means),
            "variable_bits": self.variable_bits,
            "r_estimate": self.r_estimate,
            "verified": self.verified,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _rng(seed, rng):
    return rng if rng is not None else np.random.default_rng(seed)


def _read(value, bits, readout, rng):
    if readout is None:
        return int(value)
    return int(apply_readout_noise(int(value), bits, readout, rng))


def resolve(problem: Problem, candidates: Sequence[PeriodCandidate], indeterminate: bool = False):
    """Return (period, factors, failure) for a candidate list.

    Candidates that are not periods of A are skipped; the first verified
    candidate that yields factors wins.
    """
    if not candidates:
        return None, None, "indeterminate" if indeterminate else "no_candidates"
    A, N = problem.A, problem.N
    verified = [c for c in candidates if mod_pow(A, c.r, N) == 1]
    if not verified:
        return None, None, "no_verified_candidate"
    first_failure = None
    for c in verified:
        try:
            g1, g2 = extract_factors(A, c.r, N)
        except ExtractionFailure as exc:
            first_failure = first_failure or exc.reason.value
            continue
        return c.r, (g1, g2), None
    return None, None, first_failure


def _record(strategy, problem, seed, samples, candidates, indeterminate, params=None):
    period, factors, failure = resolve(problem, candidates, indeterminate)
    return RunRecord(
        strategy=strategy,
        N=problem.N,
        A=problem.A,
        n=problem.n,
        seed=seed,
        samples=tuple(samples),
        period_candidates=tuple(candidates),
        period=period,
        factors=factors,
        failure=failure,
        params=params or {},
    )


def run_standard(problem: Problem, seed: int | None = 0, *, readout: ReadoutModel | None = None, rng=None) -> RunRecord:
    """QFT the input register and measure it; the output register is left alone."""
    rng = _rng(seed, rng)
    p = _read(measure_input(problem.distribution, rng), problem.n, readout, rng)
    candidates = infer_period(p, problem.M, problem.N)
    return _record(Strategy.STANDARD, problem, seed, [("input", p)], candidates, p == 0)


def run_output_first(problem: Problem, seed: int | None = 0, *, readout: ReadoutModel | None = None, rng=None) -> RunRecord:
    """Measure the output register, then QFT and measure the collapsed input register."""
    rng = _rng(seed, rng)
    residue, branch = measure_output_first(problem.state, rng)
    residue = _read(residue, problem.m, readout, rng)
    p = _read(branch.distribution().sample(rng), problem.n, readout, rng)
    candidates = infer_period(p, problem.M, problem.N)
    return _record(
        Strategy.OUTPUT_FIRST, problem, seed, [("output", residue), ("input", p)], candidates, p == 0
    )


def output_first_marginal(problem: Problem) -> np.ndarray:
    """Exact input-outcome probabilities when the output register is measured first."""
    state = problem.state
    total = np.zeros(problem.M)
    for l in range(len(state.counts)):
        branch = state.branch(l)
        total += branch.count / problem.M * branch.distribution().pmf
    return total


def skip_qft_candidates(values: Iterable[int], N: int) -> list[PeriodCandidate]:
    """Divisors (<= N) of the gcd of the nonzero values, which are all multiples of r."""
    nonzero = [v for v in values if v]
    if not nonzero:
        return []
    g = math.gcd(*nonzero)
    source = CandidateSource.GCD_OF_SAMPLES if len(nonzero) > 1 else CandidateSource.EXACT_DIVISOR
    return [PeriodCandidate(d, source, nonzero[-1]) for d in divisors(g) if 1 < d <= N]


def sample_skip_qft(problem: Problem, rng: np.random.Generator, size: int | None = None):
    """Input-register outcomes with the output register prepared in residue 1."""
    count = int(problem.state.counts[0])
    return problem.order * rng.integers(count, size=size)


def run_skip_qft(
    problem: Problem,
    seed: int | None = 0,
    *,
    history: Sequence[int] = (),
    readout: ReadoutModel | None = None,
    rng=None,
) -> RunRecord:
    """Prepare the output register in residue 1 and read the input register without a QFT.

    ``history`` holds earlier skip-QFT samples for the same problem; the gcd
    over all of them narrows the candidate set.
    """
    rng = _rng(seed, rng)
    x = _read(sample_skip_qft(problem, rng), problem.n, readout, rng)
    values = [*history, x]
    candidates = skip_qft_candidates(values, problem.N)
    return _record(
        Strategy.SKIP_QFT, problem, seed, [("input", x)], candidates, not any(values),
        {"history": list(history)},
    )


def run_accumulate(
    problem: Problem,
    k: int,
    seed: int | None = 0,
    *,
    source: str = "standard",
    readout: ReadoutModel | None = None,
    rng=None,
) -> RunRecord:
    """Sum k input-register results into an auxiliary register and measure only that.

    Each addend is an independent run of ``source`` ("standard" or
    "skip_qft"). With skip-QFT addends the sum is a multiple of r and its
    divisors are the candidates. With standard addends the sum reduced mod M
    is treated like a single QFT outcome.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    source = Strategy(source)
    rng = _rng(seed, rng)
    aux_bits = problem.n + math.ceil(math.log2(k))
    if source is Strategy.SKIP_QFT:
        draws = sample_skip_qft(problem, rng, size=k)
    elif source is Strategy.STANDARD:
        draws = problem.distribution.sample(rng, size=k)
    else:
        raise ValueError(f"unsupported accumulation source {source.value}")
    total = _read(int(np.sum(draws)), aux_bits, readout, rng)
    if source is Strategy.SKIP_QFT:
        candidates = skip_qft_candidates([total], problem.N)
        indeterminate = total == 0
    else:
        c = total % problem.M
        candidates = infer_period(c, problem.M, problem.N)
        indeterminate = c == 0
    params = {"k": k, "source": source.value, "aux_bits": aux_bits}
    return _record(Strategy.ACCUMULATE, problem, seed, [("aux", total)], candidates, indeterminate, params)


def bit_means(values: np.ndarray, n: int) -> np.ndarray:
    """Mean of bit j (weight 2**j) across values, for j in [0, n)."""
    values = np.asarray(values, dtype=np.int64)
    bits = (values[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return bits.mean(axis=0)


def run_nmr_ensemble(
    problem: Problem,
    shots: int,
    seed: int | None = 0,
    *,
    readout: ReadoutModel | None = None,
    rng=None,
) -> EnsembleReport:
    """Bitwise average of many independent post-QFT readouts.

    The count K of bits whose mean sits in ``VARIABLE_BAND`` gives the
    estimate r = 2**K, which is only meaningful when r is a power of two;
    ``verified`` records whether A**(2**K) = 1 (mod N).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = _rng(seed, rng)
    values = problem.distribution.sample(rng, size=shots)
    if readout is not None:
        values = apply_readout_noise(values, problem.n, readout, rng)
    means = bit_means(values, problem.n)
    lo, hi = VARIABLE_BAND
    K = int(np.count_nonzero((means >= lo) & (means <= hi)))
    r_est = 1 << K
    return EnsembleReport(
        N=problem.N,
        A=problem.A,
        n=problem.n,
        seed=seed,
        shots=shots,
        bit_means=tuple(float(x) for x in means),
        variable_bits=K,
        r_estimate=r_est,
        verified=mod_pow(problem.A, r_est, problem.N) == 1,
    )


RUNNERS: dict[Strategy, Callable[..., RunRecord]] = {
    Strategy.STANDARD: run_standard,
    Strategy.OUTPUT_FIRST: run_output_first,
    Strategy.SKIP_QFT: run_skip_qft,
}


def run_batch(runner: Callable, problem: Problem, seeds: Iterable[int], workers: int | None = None, **kwargs) -> list:
    """Run ``runner(problem, seed, **kwargs)`` for each seed; results sorted by seed."""
    seeds = sorted(seeds)
    call = partial(runner, problem, **kwargs)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(call, seeds))
    return [call(s) for s in seeds]


def to_jsonl(records: Iterable) -> str:
    return "".join(r.to_json() + "\n" for r in records)
