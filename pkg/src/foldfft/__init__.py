"""Folded 2-parallel radix-2 FFT/IFFT cascades.

Build flow graphs, fold them onto one butterfly per stage under a
schedule, size the reorder registers, count resources and check the
result with a cycle-accurate simulator.
"""

from .designs import DESIGNS, build_design, design_schedules, closed_form_targets
from .flowgraph import (
    FlowGraph,
    bit_reverse_permutation,
    build_fft_flowgraph,
    build_ifft_flowgraph,
    evaluate_flowgraph,
)
from .folding import (
    ArchNetlist,
    NegativeDelay,
    ResourceReport,
    cascade,
    count_resources,
    fold,
    lifetime_analysis,
    savings,
    synthesize_dsd,
)
from .schedule import (
    Schedule,
    asap_ifft_schedule,
    asap_interleaved_ifft_schedule,
    fft_sequential_schedule,
    interleaved_fft_schedule,
    naive_ifft_schedule,
    naive_interleaved_ifft_schedule,
    schedule_output_times,
)
from .sim import Trace, measure_latency, measure_throughput, run_cascade, simulate

__version__ = "0.1.0"
