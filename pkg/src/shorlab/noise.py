"""Symmetric, independent per-qubit readout errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReadoutModel:
    """Each qubit is read correctly with probability F, flipped otherwise."""

    F: float = 1.0

    def __post_init__(self):
        if not 0.5 <= self.F <= 1.0:
            raise ValueError(f"readout fidelity must lie in [0.5, 1], got {self.F}")


def apply_readout_noise(value, n: int, model: ReadoutModel, rng: np.random.Generator):
    """Flip each of the n low bits of ``value`` independently with probability 1 - F.

    ``value`` may be an int or an integer array; the result has the same shape.
    With F = 1 the input is returned unchanged and ``rng`` is not consumed.
    """
    if model.F == 1.0:
        return value
    scalar = np.isscalar(value)
    v = np.atleast_1d(np.asarray(value, dtype=np.int64))
    flips = rng.random((v.size, n)) < (1.0 - model.F)
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    mask = (flips * weights).sum(axis=1).reshape(v.shape)
    out = v ^ mask
    return int(out[0]) if scalar else out


def register_fidelity(model: ReadoutModel, n: int) -> float:
    """Probability that all n qubits of a register read out correctly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return model.F ** n
