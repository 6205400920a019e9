"""Register state through modular exponentiation and the QFT.

After modular exponentiation the joint state splits into r branches, one per
residue A^l mod N, each a uniform superposition over the arithmetic
progression l, l + r, ..., l + s_l * r. ``PeriodicState`` stores only that
structure (O(r) memory). The post-QFT outcome probabilities follow from the
geometric-series closed form and are evaluated pointwise, so no 2^n-sized
amplitude vector is ever needed on the main path. ``dense_state`` builds the
full amplitude table by direct summation and exists for validation only.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numtheory import FactoringInstance, mod_pow, multiplicative_order, register_size_for

# Largest input register for which dense amplitude tables may be built.
DENSE_MAX_QUBITS = 12
# Largest M for which a non-peaked distribution can be sampled by inversion.
MAX_SAMPLING_M = 1 << 20


@dataclass(frozen=True)
class Problem:
    instance: FactoringInstance
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("input register needs at least one qubit")
        if (1 << self.m) <= self.instance.N:
            raise ValueError(f"output register of {self.m} qubits cannot hold residues mod {self.instance.N}")

    @classmethod
    def create(cls, N: int, A: int, n: int | None = None, m: int | None = None) -> "Problem":
        """Build a problem; n defaults to the N**2 sizing rule, m to the bit length of N."""
        instance = FactoringInstance(N, A)
        if n is None:
            n = register_size_for(N)
        if m is None:
            m = N.bit_length()
        return cls(instance, n, m)

    @property
    def N(self) -> int:
        return self.instance.N

    @property
    def A(self) -> int:
        return self.instance.A

    @property
    def M(self) -> int:
        return 1 << self.n

    @cached_property
    def order(self) -> int:
        return multiplicative_order(self.A, self.N)

    @cached_property
    def state(self) -> "PeriodicState":
        return apply_modexp(prepare_uniform(self))

    @cached_property
    def distribution(self) -> "Distribution":
        return qft_distribution(self.state)


@dataclass(frozen=True)
class UniformState:
    """(1/sqrt(M)) * sum_j |j>|0>, held symbolically."""

    problem: Problem

    @property
    def M(self) -> int:
        return self.problem.M

    @property
    def amplitude(self) -> float:
        return 1.0 / math.sqrt(self.M)

    def amplitudes(self) -> np.ndarray:
        if self.problem.n > DENSE_MAX_QUBITS:
            raise ValueError(f"dense amplitudes capped at n={DENSE_MAX_QUBITS}")
        return np.full(self.M, self.amplitude)


def prepare_uniform(problem: Problem) -> UniformState:
    return UniformState(problem)


@dataclass(frozen=True, eq=False)
class PeriodicState:
    """Post-modexp state as r branches.

    ``counts[l]`` is s_l + 1, the number of exponents in branch l, and
    ``residues[l]`` is A^l mod N.
    """

    M: int
    r: int
    residues: tuple[int, ...]
    counts: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return self.counts - 1

    def branch(self, l: int) -> "Branch":
        return Branch(self.M, self.r, l, int(self.counts[l]), self.residues[l])


def apply_modexp(uniform: UniformState) -> PeriodicState:
    problem = uniform.problem
    M, A, N = problem.M, problem.A, problem.N
    r = problem.order
    l = np.arange(r, dtype=np.int64) if r <= M else np.arange(M, dtype=np.int64)
    # For r > M only the first M branches are populated, one exponent each.
    counts = (M - 1 - l) // r + 1
    residues = []
    value = 1
    for _ in range(len(l)):
        residues.append(value)
        value = value * A % N
    residues = tuple(residues)
    return PeriodicState(M, r, residues, counts)


@dataclass(frozen=True)
class Branch:
    """Input register collapsed onto one residue: uniform over {l + q*r}."""

    M: int
    r: int
    l: int
    count: int
    residue: int

    def values(self) -> np.ndarray:
        return self.l + self.r * np.arange(self.count, dtype=np.int64)

    def distribution(self) -> "Distribution":
        return Distribution(self.M, self.r, ((self.count, 1.0 / (self.M * self.count)),))


def _mulmod(a, b, M: int):
    """(a * b) % M elementwise without int64 overflow."""
    a = np.asarray(a)
    if M < (1 << 31):
        return (a.astype(np.int64) * np.int64(b)) % M
    return np.array([(int(x) * int(b)) % M for x in a.ravel()], dtype=object).reshape(a.shape)


def geometric_mass(p, count: int, r: int, M: int) -> np.ndarray:
    """|sum_{q<count} exp(2 pi i p q r / M)|**2 for each p.

    Phases are reduced modulo M in exact integer arithmetic before the float
    conversion. Outcomes with p*r = 0 (mod M) take the limiting value count**2.
    """
    k = _mulmod(p, r, M)
    kc = _mulmod(k, count, M)
    k = np.asarray(k, dtype=np.float64)
    kc = np.asarray(kc, dtype=np.float64)
    out = np.full(k.shape, float(count) ** 2)
    peak = k == 0
    off = ~peak
    out[off] = (np.sin(np.pi * kc[off] / M) / np.sin(np.pi * k[off] / M)) ** 2
    return out


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability of each input-register outcome p after the QFT.

    ``groups`` holds (count, weight) pairs and
    P(p) = sum(weight * |G_count(p)|**2); branches of equal length share a
    group, so there are at most two groups for the full state.
    """

    M: int
    r: int
    groups: tuple[tuple[int, float], ...]
    threshold: float = field(default=1e-12)

    @property
    def divides(self) -> bool:
        return self.M % self.r == 0

    def mass(self, p) -> np.ndarray | float:
        scalar = np.isscalar(p)
        p = np.atleast_1d(np.asarray(p, dtype=np.int64 if self.M < (1 << 62) else object))
        total = np.zeros(p.shape)
        for count, weight in self.groups:
            total += weight * geometric_mass(p, count, self.r, self.M)
        return float(total[0]) if scalar else total

    @cached_property
    def pmf(self) -> np.ndarray:
        if self.M > MAX_SAMPLING_M:
            raise ValueError(f"full distribution capped at M={MAX_SAMPLING_M}")
        return self.mass(np.arange(self.M, dtype=np.int64))

    @cached_property
    def _cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def support(self) -> np.ndarray:
        """Outcomes with mass above the threshold, ascending."""
        if self.divides:
            peaks = np.arange(self.r, dtype=np.int64) * (self.M // self.r)
            return peaks[self.mass(peaks) > self.threshold]
        return np.flatnonzero(self.pmf > self.threshold)

    def total(self) -> float:
        if self.divides:
            return float(self.mass(self.support()).sum())
        return float(self.pmf.sum())

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw outcomes by exact inversion; peaks are drawn directly when r divides M."""
        if self.divides:
            peaks = self.support()
            probs = self.mass(peaks)
            idx = np.searchsorted(np.cumsum(probs), rng.random(size) * probs.sum(), side="right")
            idx = np.minimum(idx, len(peaks) - 1)
            return peaks[idx] if size is not None else int(peaks[idx])
        cdf = self._cdf
        idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
        idx = np.minimum(idx, self.M - 1)
        return idx.astype(np.int64) if size is not None else int(idx)

    def to_csv(self, support_only: bool = True) -> str:
        ps = self.support() if support_only else np.arange(self.M)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "mass"])
        for p, w in zip(ps.tolist(), np.atleast_1d(self.mass(ps)).tolist()):
            writer.writerow([p, repr(w)])
        return buf.getvalue()


def qft_distribution(state: PeriodicState) -> Distribution:
    lengths, multiplicity = np.unique(state.counts, return_counts=True)
    M2 = float(state.M) ** 2
    groups = tuple((int(c), int(k) / M2) for c, k in zip(lengths, multiplicity))
    return Distribution(state.M, state.r, groups)


def measure_input(distribution: Distribution, rng: np.random.Generator) -> int:
    return distribution.sample(rng)


def measure_output_first(state: PeriodicState, rng: np.random.Generator) -> tuple[int, Branch]:
    """Measure the output register; branch l is hit with probability (s_l + 1) / M."""
    cdf = np.cumsum(state.counts)
    l = int(np.searchsorted(cdf, rng.integers(state.M), side="right"))
    branch = state.branch(l)
    return branch.residue, branch


class Stage(str, enum.Enum):
    POST_MODEXP = "post_modexp"
    POST_QFT = "post_qft"


@dataclass(frozen=True)
class DenseState:
    """Explicit amplitude table: (input value, output value, amplitude) rows."""

    entries: tuple[tuple[int, int, complex], ...]

    def norm(self) -> float:
        return sum(abs(a) ** 2 for _, _, a in self.entries)

    def as_dict(self) -> dict[tuple[int, int], complex]:
        return {(x, f): a for x, f, a in self.entries}

    def input_marginal(self, M: int) -> np.ndarray:
        out = np.zeros(M)
        for x, _, a in self.entries:
            out[x] += abs(a) ** 2
        return out

    def to_json_obj(self) -> dict:
        return {"entries": [{"x": x, "f": f, "re": a.real, "im": a.imag} for x, f, a in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def dense_state(problem: Problem, stage: Stage | str, atol: float = 1e-12) -> DenseState:
    """Full amplitude table, evaluated term by term from A^x mod N.

    Post-QFT amplitudes are (1/M) * sum over the x sharing an output value of
    exp(2 pi i p x / M); entries with magnitude below ``atol`` are dropped.
    """
    stage = Stage(stage)
    if problem.n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense state capped at n={DENSE_MAX_QUBITS} input qubits, got n={problem.n}")
    M, A, N = problem.M, problem.A, problem.N
    f = [mod_pow(A, x, N) for x in range(M)]
    amp = 1.0 / math.sqrt(M)
    if stage is Stage.POST_MODEXP:
        return DenseState(tuple((x, f[x], complex(amp)) for x in range(M)))

    groups: dict[int, list[int]] = {}
    for x, fx in enumerate(f):
        groups.setdefault(fx, []).append(x)
    p = np.arange(M, dtype=np.int64)
    entries = []
    for fx, xs in groups.items():
        xs = np.asarray(xs, dtype=np.int64)
        col = np.empty(M, dtype=np.complex128)
        for start in range(0, M, 256):
            block = p[start:start + 256]
            phase = (block[:, None] * xs[None, :]) % M
            col[start:start + 256] = np.exp(2j * np.pi * phase / M).sum(axis=1) / M
        for pi in np.flatnonzero(np.abs(col) > atol):
            entries.append((int(pi), fx, complex(col[pi])))
    first = {fx: xs[0] for fx, xs in groups.items()}
    entries.sort(key=lambda e: (e[0], first[e[1]]))
    return DenseState(tuple(entries))
