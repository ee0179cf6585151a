# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cycle kernel; same instruction set as ``_pykernel``."""

cdef enum:
    OP_IN = 0
    OP_MOVE = 1
    OP_DIF = 2
    OP_DIT = 3
    OP_MUL = 4
    OP_OUT = 5


def run_program(const int[:, ::1] code, const int[::1] offsets, const double complex[::1] consts,
                double complex[::1] state, const double complex[:, ::1] inp,
                double complex[:, ::1] out, int period, long n_cycles, int snap_lo, int snap_hi,
                double complex[:, ::1] snaps):
    cdef long t
    cdef int r, i, j, op, a, b, c, d, k
    cdef double complex x, y, s
    cdef bint take_snaps = snaps.shape[0] > 0
    with nogil:
        for t in range(n_cycles):
            r = t % period
            for i in range(offsets[r], offsets[r + 1]):
                op = code[i, 0]
                a = code[i, 1]
                b = code[i, 2]
                if op == OP_MOVE:
                    state[a] = state[b]
                elif op == OP_DIF:
                    c = code[i, 3]
                    d = code[i, 4]
                    k = code[i, 5]
                    x = state[a]
                    y = state[b]
                    state[c] = x + y
                    state[d] = (x - y) * consts[k]
                elif op == OP_DIT:
                    c = code[i, 3]
                    d = code[i, 4]
                    k = code[i, 5]
                    x = state[a]
                    y = state[b] * consts[k]
                    s = consts[k + 1]
                    state[c] = (x + y) * s
                    state[d] = (x - y) * s
                elif op == OP_MUL:
                    state[a] = state[a] * consts[code[i, 5]]
                elif op == OP_IN:
                    state[a] = inp[t, b]
                else:
                    out[t, b] = state[a]
            if take_snaps:
                for j in range(snap_lo, snap_hi):
                    snaps[t, j - snap_lo] = state[j]
