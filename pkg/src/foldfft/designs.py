"""The four FFT/IFFT cascade designs and their closed-form resource figures.

``baseline``             FFT folding reused by the IFFT, reorder buffer between
``proposed1``            IFFT folded ASAP on the FFT output order, no buffer
``baseline-interleaved`` two channels, reused folding, buffer plus lane steering
``proposed2``            two channels, IFFT folded ASAP, no buffer
"""

from __future__ import annotations

import cmath

from .flowgraph import build_fft_flowgraph, build_ifft_flowgraph, log2_exact
from .folding import ArchNetlist, cascade, fold
from .schedule import (
    asap_ifft_schedule,
    asap_interleaved_ifft_schedule,
    fft_sequential_schedule,
    interleaved_fft_schedule,
    naive_ifft_schedule,
    naive_interleaved_ifft_schedule,
    schedule_output_times,
)

DESIGNS = ("baseline", "proposed1", "baseline-interleaved", "proposed2")
PROPOSED_OF = {"baseline": "proposed1", "baseline-interleaved": "proposed2"}

# exp(0.3j) rotation applied to one forward twiddle by the fault injector
FAULT_ROTATION = cmath.exp(0.3j)


def design_schedules(design: str, n_points: int):
    """(FFT schedule, IFFT schedule) of *design*."""
    if design not in DESIGNS:
        raise ValueError(f"unknown design {design!r}; choose from {', '.join(DESIGNS)}")
    log2_exact(n_points)
    fwd = build_fft_flowgraph(n_points)
    if design in ("baseline", "proposed1"):
        fft = fft_sequential_schedule(n_points)
        if design == "baseline":
            return fft, naive_ifft_schedule(n_points)
        return fft, asap_ifft_schedule(n_points, schedule_output_times(fft, fwd))
    fft = interleaved_fft_schedule(n_points)
    if design == "baseline-interleaved":
        return fft, naive_interleaved_ifft_schedule(n_points)
    return fft, asap_interleaved_ifft_schedule(n_points, schedule_output_times(fft, fwd))


def build_design(design: str, n_points: int, inject_fault: bool = False) -> ArchNetlist:
    """Folded FFT -> pointwise multiply -> IFFT netlist of *design*.

    With *inject_fault* the twiddle of forward butterfly A_1 is rotated by
    exp(0.3j), a deliberate arithmetic error (A_0 when N=2).
    """
    fft_sched, ifft_sched = design_schedules(design, n_points)
    fwd, inv = build_fft_flowgraph(n_points), build_ifft_flowgraph(n_points)
    fft_net = fold(fwd, fft_sched, tag="fft")
    ifft_net = fold(inv, ifft_sched, tag="ifft")
    net = cascade(fft_net, ifft_net, reoc=design.startswith("baseline"), name=design)
    if inject_fault:
        net.twiddle_override = {("fft", 0, 1 % (n_points // 2)): FAULT_ROTATION}
    return net


def closed_form_targets(design: str, n_points: int) -> dict:
    """Closed-form resource targets for *design* at size *n_points*.

    Memory and MUX counts exclude the pointwise multiplier; ``bf`` is
    butterflies per transform.  The proposed interleaved latency is
    1.5N-2, the value its folding sets produce.
    """
    N = n_points
    k = log2_exact(N)
    reoc = N // 2 - 2
    table = {
        "baseline": dict(memory=(5 * N) // 2 - 4 + reoc, mux=4 * k + 2, latency=(3 * N) // 2 - 3),
        "proposed1": dict(memory=(5 * N) // 2 - 4, mux=4 * k - 2, latency=(5 * N) // 4 - 2),
        "baseline-interleaved": dict(memory=4 * N - 4 + reoc, mux=4 * k + 4, latency=2 * N - 3),
        "proposed2": dict(memory=4 * N - 4, mux=4 * k, latency=(3 * N) // 2 - 2),
    }
    if design not in table:
        raise ValueError(f"unknown design {design!r}")
    return dict(table[design], bf=k, throughput=2)
