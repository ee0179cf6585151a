"""Compare the compiled and pure-Python simulation kernels.

    python benchmarks/bench_kernel.py --n 64 256 --frames 40

Both kernels run the same compiled program on the same inputs; the
script checks that their output streams are identical and reports the
cycle rate of each.
"""

import argparse
import time

import numpy as np

from foldfft.designs import DESIGNS, build_design
from foldfft.sim import _compiled_run, _pykernel, compile_program


def time_kernel(run, prog, inp, n_cycles, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        state = np.full(prog.state_size, np.nan + 0j)
        out = np.full_like(inp, np.nan)
        snaps = np.zeros((0, prog.reg_hi - prog.reg_lo), complex)
        t0 = time.perf_counter()
        run(prog.code, prog.offsets, prog.consts, state, inp, out, prog.period, n_cycles,
            prog.reg_lo, prog.reg_hi, snaps)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--design", nargs="+", choices=DESIGNS, default=["proposed1", "proposed2"])
    ap.add_argument("--frames", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _compiled_run is None:
        print("compiled kernel not built; only the Python kernel is available")
    print(f"{'design':<22}{'N':>6}{'cycles':>9}{'python Mc/s':>13}{'cython Mc/s':>13}{'speedup':>9}")
    for n in args.n:
        for design in args.design:
            net = build_design(design, n)
            rng = np.random.default_rng(0)
            x = rng.standard_normal((args.frames, len(net.channels), n)) + 0j
            T = net.folding_factor
            slots = net.input_slots()
            cycles = (args.frames - 1) * T + max(c for c, *_ in net.output_slots()) + 1
            inp = np.full((cycles, net.lanes), np.nan + 0j)
            for f in range(args.frames):
                for cycle, lane, ch, idx in slots:
                    inp[cycle + f * T, lane] = x[f, 0 if ch is None else net.channels.index(ch), idx]
            prog = compile_program(net)
            t_py, out_py = time_kernel(_pykernel.run_program, prog, inp, cycles, args.repeat)
            line = f"{design:<22}{n:>6}{cycles:>9}{cycles / t_py / 1e6:>13.3f}"
            if _compiled_run is not None:
                t_cy, out_cy = time_kernel(_compiled_run, prog, inp, cycles, args.repeat)
                assert np.array_equal(out_py, out_cy, equal_nan=True), "kernels disagree"
                line += f"{cycles / t_cy / 1e6:>13.3f}{t_py / t_cy:>8.1f}x"
            print(line)


if __name__ == "__main__":
    main()
