"""Pure-Python cycle kernel (fallback when the compiled one is unavailable).

Instruction rows are ``(op, a, b, c, d, k)``:

======  =====================================================
IN      state[a] = inp[t, b]
MOVE    state[a] = state[b]
DIF     x, y = state[a], state[b]; state[c] = x + y; state[d] = (x - y) * K[k]
DIT     y = state[b] * K[k]; state[c] = (x + y) * K[k+1]; state[d] = (x - y) * K[k+1]
MUL     state[a] *= K[k]
OUT     out[t, b] = state[a]
======  =====================================================
"""

OP_IN, OP_MOVE, OP_DIF, OP_DIT, OP_MUL, OP_OUT = range(6)


def run_program(code, offsets, consts, state, inp, out, period, n_cycles, snap_lo, snap_hi, snaps):
    """Execute *n_cycles* cycles in place on numpy buffers.

    Row ``offsets[r]:offsets[r+1]`` of *code* is the program of time
    partition r.  If *snaps* has rows, registers ``state[snap_lo:snap_hi]``
    are copied into it after every cycle.
    """
    program = [[tuple(row) for row in code[offsets[r]:offsets[r + 1]].tolist()] for r in range(period)]
    K = consts.tolist()
    st = state.tolist()
    x_in = inp.tolist()
    y_out = out.tolist()
    take_snaps = snaps.shape[0] > 0
    for t in range(n_cycles):
        for op, a, b, c, d, k in program[t % period]:
            if op == OP_MOVE:
                st[a] = st[b]
            elif op == OP_DIF:
                x, y = st[a], st[b]
                st[c] = x + y
                st[d] = (x - y) * K[k]
            elif op == OP_DIT:
                x, y = st[a], st[b] * K[k]
                s = K[k + 1]
                st[c] = (x + y) * s
                st[d] = (x - y) * s
            elif op == OP_MUL:
                st[a] = st[a] * K[k]
            elif op == OP_IN:
                st[a] = x_in[t][b]
            else:
                y_out[t][b] = st[a]
        if take_snaps:
            snaps[t, :] = st[snap_lo:snap_hi]
    state[:] = st
    out[:, :] = y_out
