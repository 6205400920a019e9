"""Classical number theory behind order finding.

Modular exponentiation, the brute-force order oracle, period inference from
measured input-register values, and factor extraction from a period.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator


class SharedFactor(ValueError):
    """Raised when the base shares a factor with N.

    This is not really a failure: ``factor`` already divides N.
    """

    def __init__(self, N: int, A: int, factor: int):
        super().__init__(f"gcd({A}, {N}) = {factor} is already a factor of {N}")
        self.N = N
        self.A = A
        self.factor = factor


class FailureReason(str, enum.Enum):
    ODD_PERIOD = "odd_period"
    TRIVIAL_ROOT = "trivial_root"
    NOT_A_PERIOD = "not_a_period"
    # A^(r/2) == 1: r is a multiple of the order, not the order itself.
    NON_MINIMAL_PERIOD = "non_minimal_period"


class ExtractionFailure(Exception):
    """Factor extraction did not produce a nontrivial divisor."""

    def __init__(self, reason: FailureReason, A: int, r: int, N: int):
        super().__init__(f"{reason.value}: A={A}, r={r}, N={N}")
        self.reason = reason


class CandidateSource(str, enum.Enum):
    EXACT_DIVISOR = "exact_divisor"
    CONTINUED_FRACTION = "continued_fraction"
    GCD_OF_SAMPLES = "gcd_of_samples"
    BIT_COUNT = "bit_count"


@dataclass(frozen=True)
class FactoringInstance:
    N: int
    A: int

    def __post_init__(self):
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"N must be odd and >= 3, got {self.N}")
        if not 1 < self.A < self.N:
            raise ValueError(f"A must satisfy 1 < A < N, got A={self.A}, N={self.N}")
        g = math.gcd(self.A, self.N)
        if g != 1:
            raise SharedFactor(self.N, self.A, g)


@dataclass(frozen=True)
class PeriodCandidate:
    r: int
    source: CandidateSource
    sample: int

    def to_dict(self) -> dict:
        return {"r": self.r, "source": self.source.value, "sample": self.sample}


def mod_pow(A: int, x: int, N: int) -> int:
    """A**x mod N by right-to-left square-and-multiply."""
    if N < 2:
        raise ValueError("modulus must be >= 2")
    if x < 0:
        raise ValueError("exponent must be non-negative")
    result = 1
    base = A % N
    while x:
        if x & 1:
            result = result * base % N
        base = base * base % N
        x >>= 1
    return result


def multiplicative_order(A: int, N: int) -> int:
    """Smallest r >= 1 with A**r = 1 (mod N), by direct iteration."""
    if math.gcd(A, N) != 1:
        raise ValueError(f"order undefined: gcd({A}, {N}) != 1")
    if N == 1:
        return 1
    a = A % N
    value, r = a, 1
    while value != 1:
        value = value * a % N
        r += 1
    return r


def extract_factors(A: int, r: int, N: int) -> tuple[int, int]:
    """Return ``(gcd(A^(r/2) - 1, N), gcd(A^(r/2) + 1, N))``.

    Raises ExtractionFailure when r is not a period of A, is odd, or gives
    only trivial divisors.
    """
    if r < 1 or mod_pow(A, r, N) != 1:
        raise ExtractionFailure(FailureReason.NOT_A_PERIOD, A, r, N)
    if r % 2:
        raise ExtractionFailure(FailureReason.ODD_PERIOD, A, r, N)
    half = mod_pow(A, r // 2, N)
    if half == N - 1:
        raise ExtractionFailure(FailureReason.TRIVIAL_ROOT, A, r, N)
    if half == 1:
        raise ExtractionFailure(FailureReason.NON_MINIMAL_PERIOD, A, r, N)
    return math.gcd(half - 1, N), math.gcd(half + 1, N)


def continued_fraction(num: int, den: int) -> list[int]:
    """Partial quotients of num/den."""
    terms = []
    while den:
        q, rem = divmod(num, den)
        terms.append(q)
        num, den = den, rem
    return terms


def convergents(num: int, den: int) -> Iterator[Fraction]:
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    for a in continued_fraction(num, den):
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        yield Fraction(h, k)


def infer_period(c: int, M: int, N: int) -> list[PeriodCandidate]:
    """Period candidates from one measured input value c out of M outcomes.

    Two rules contribute. The exact-divisor rule solves c = lam * M / r with
    lam / r in lowest terms, giving r = M / gcd(c, M). Continued fractions add
    every convergent denominator of c / M that does not exceed N. Returns
    candidates sorted by r, one per value; an empty list means c says nothing.
    """
    if not 0 <= c < M:
        raise ValueError(f"sample {c} outside [0, {M})")
    if c == 0:
        return []
    found: dict[int, PeriodCandidate] = {}
    r_exact = M // math.gcd(c, M)
    if r_exact <= N:
        found[r_exact] = PeriodCandidate(r_exact, CandidateSource.EXACT_DIVISOR, c)
    for conv in convergents(c, M):
        d = conv.denominator
        if d > N:
            break
        if d == 1:
            continue
        found.setdefault(d, PeriodCandidate(d, CandidateSource.CONTINUED_FRACTION, c))
    return [found[r] for r in sorted(found)]


def divisors(value: int) -> list[int]:
    """Positive divisors of value, ascending."""
    small, large = [], []
    i = 1
    while i * i <= value:
        if value % i == 0:
            small.append(i)
            if i * i != value:
                large.append(value // i)
        i += 1
    return small + large[::-1]


def register_size_for(N: int) -> int:
    """Smallest n with N**2 <= 2**n; this always also gives 2**n < 2 * N**2."""
    if N < 3:
        raise ValueError("N must be >= 3")
    n = (N * N - 1).bit_length()
    assert N * N <= 1 << n < 2 * N * N
    return n


def qubit_budget(s: int) -> int:
    """Estimated total qubit count for an s-bit N (reporting only)."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return 7 * s + 1


def smallest_base(N: int) -> int:
    """Smallest A in [2, N) coprime to N."""
    for A in range(2, N):
        if math.gcd(A, N) == 1:
            return A
    raise ValueError(f"no valid base for N={N}")
