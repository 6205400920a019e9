import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from shorlab.noise import ReadoutModel, apply_readout_noise, register_fidelity


def test_bounds():
    with pytest.raises(ValueError):
        ReadoutModel(0.4)
    with pytest.raises(ValueError):
        ReadoutModel(1.01)


@given(st.integers(0, 2**20 - 1))
def test_perfect_fidelity_is_identity(value):
    assert apply_readout_noise(value, 20, ReadoutModel(1.0), np.random.default_rng(0)) == value


def test_coin_flip():
    rng = np.random.default_rng(1)
    out = apply_readout_noise(np.zeros(10**5, dtype=np.int64), 1, ReadoutModel(0.5), rng)
    assert set(np.unique(out).tolist()) == {0, 1}
    assert abs(out.mean() - 0.5) < 0.01


def test_fully_correct_fraction():
    rng = np.random.default_rng(2)
    vals = rng.integers(0, 1 << 10, size=10**5)
    out = apply_readout_noise(vals, 10, ReadoutModel(0.99), rng)
    assert abs(np.mean(out == vals) - 0.99**10) < 0.005
    assert abs(0.99**10 - 0.9044) < 1e-4


@pytest.mark.parametrize("F", [0.9, 0.99])
@pytest.mark.parametrize("n", [4, 8, 14])
def test_rate_within_three_standard_errors(F, n):
    trials = 10**5
    rng = np.random.default_rng([n, int(F * 100)])
    vals = rng.integers(0, 1 << n, size=trials)
    rate = np.mean(apply_readout_noise(vals, n, ReadoutModel(F), rng) == vals)
    expected = F**n
    assert abs(rate - expected) <= 3 * math.sqrt(expected * (1 - expected) / trials)


def test_flip_counts_are_binomial():
    n, F, trials = 8, 0.9, 10**5
    rng = np.random.default_rng(7)
    vals = rng.integers(0, 1 << n, size=trials)
    flipped = np.bitwise_xor(apply_readout_noise(vals, n, ReadoutModel(F), rng), vals)
    flips = np.array([bin(int(x)).count("1") for x in flipped])
    observed = np.bincount(flips, minlength=n + 1)
    expected = stats.binom.pmf(np.arange(n + 1), n, 1 - F) * trials
    # pool sparse tail cells so every expected count is at least 5
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_scalar_and_array_shapes():
    rng = np.random.default_rng(0)
    assert isinstance(apply_readout_noise(5, 4, ReadoutModel(0.9), rng), int)
    assert apply_readout_noise(np.arange(6).reshape(2, 3), 4, ReadoutModel(0.9), rng).shape == (2, 3)


@pytest.mark.parametrize("F, n, expected", [(1.0, 1000, 1.0), (0.99, 1, 0.99)])
def test_register_fidelity_exact(F, n, expected):
    assert register_fidelity(ReadoutModel(F), n) == expected


def test_register_fidelity_thousand_qubits():
    value = register_fidelity(ReadoutModel(0.99), 1000)
    assert math.isclose(value, math.exp(1000 * math.log(0.99)), rel_tol=1e-12)
    assert 4.2e-5 < value < 4.4e-5
