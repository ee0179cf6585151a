"""Brute-force reference transforms and register-count oracle.

Kept deliberately O(N^2) / per-cycle so nothing here shares a code path
with the flow-graph, scheduling or folding code it is used to check.
"""

import numpy as np


def _dft_matrix(n: int, sign: int) -> np.ndarray:
    k = np.arange(n)
    # reduce n*k mod N before scaling to keep the angles exact
    return np.exp(sign * 2j * np.pi * (np.outer(k, k) % n) / n)


def dft(x) -> np.ndarray:
    """Direct-summation DFT, X[k] = sum_n x[n] exp(-2j pi n k / N)."""
    x = np.asarray(x, dtype=complex)
    return _dft_matrix(len(x), -1) @ x


def idft(X) -> np.ndarray:
    """Direct-summation inverse DFT with 1/N scaling."""
    X = np.asarray(X, dtype=complex)
    return (_dft_matrix(len(X), +1) @ X) / len(X)


def brute_force_min_registers(intervals, period: int) -> int:
    """Maximum number of simultaneously live values in periodic steady state.

    Each interval ``(start, end)`` is a value held in a register during
    cycles start .. end-1; the pattern repeats every *period* cycles.
    Every frame instance is enumerated explicitly for each cycle of one
    period.
    """
    if not intervals:
        return 0
    best = 0
    for t in range(period):
        live = 0
        for start, end in intervals:
            # one instance per frame: count cycles t + m*period inside [start, end)
            cycle = t
            while cycle < end:
                if cycle >= start:
                    live += 1
                cycle += period
        best = max(best, live)
    return best
