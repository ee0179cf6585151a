import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from foldfft.oracle import brute_force_min_registers, dft, idft

from conftest import random_complex


@pytest.mark.parametrize("n", [1, 2, 8, 64])
def test_dft_of_impulse_is_all_ones(n):
    x = np.zeros(n)
    x[0] = 1
    assert np.allclose(dft(x), np.ones(n))


def test_dft_of_ones_is_scaled_impulse():
    X = dft(np.ones(16))
    assert X[0] == pytest.approx(16)
    assert np.max(np.abs(X[1:])) < 1e-12


def test_idft_inverts_dft(rng):
    x = random_complex(rng, 64)
    assert np.max(np.abs(idft(dft(x)) - x)) < 1e-12


def test_dft_matches_numpy(rng):
    x = random_complex(rng, 32)
    assert np.max(np.abs(dft(x) - np.fft.fft(x))) < 1e-10


@pytest.mark.parametrize("n", [16, 256, 1024])
def test_linearity_and_parseval(rng, n):
    x, y = random_complex(rng, n), random_complex(rng, n)
    a, b = 0.3 - 1.2j, 2.5
    lhs, rhs = dft(a * x + b * y), a * dft(x) + b * dft(y)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs)) * n
    energy = np.sum(np.abs(x) ** 2)
    assert np.sum(np.abs(dft(x)) ** 2) == pytest.approx(n * energy, rel=1e-12)


def test_disjoint_intervals_need_one_register():
    assert brute_force_min_registers([(0, 1), (2, 3), (4, 5)], period=8) == 1


@pytest.mark.parametrize("k", [1, 3, 7])
def test_overlapping_intervals_need_k_registers(k):
    assert brute_force_min_registers([(2, 5)] * k, period=8) == k


def test_empty_and_zero_length():
    assert brute_force_min_registers([], period=4) == 0
    assert brute_force_min_registers([(3, 3), (5, 5)], period=4) == 0


def test_lifetime_longer_than_period_wraps():
    # one value alive for 2.5 periods overlaps itself from neighbouring frames
    assert brute_force_min_registers([(0, 10)], period=4) == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(lambda T: st.tuples(
    st.just(T),
    st.lists(st.tuples(st.integers(0, 30), st.integers(0, 25)), max_size=12))))
def test_brute_force_is_translation_invariant(case):
    T, raw = case
    intervals = [(s, s + d) for s, d in raw]
    shifted = [(s + 3 * T, e + 3 * T) for s, e in intervals]
    assert brute_force_min_registers(intervals, T) == brute_force_min_registers(shifted, T)
